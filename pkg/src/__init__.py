"""
LSCL - local style curriculum learning for robust segmentation
"""

__version__ = "1.0.0"
