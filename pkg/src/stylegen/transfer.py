"""Global moment-matching style transfer S(x_c, x_s)."""

import numpy as np

from src.utils.errors import DegenerateContentError

MIN_CONTENT_STD = 1e-6


def moment_style_transfer(x_c: np.ndarray, x_s: np.ndarray, clamp: bool = True) -> np.ndarray:
    """
    Give the content image the mean and standard deviation of the style image.

    z = (x_c − μ_c) / σ_c · σ_s + μ_s, with population statistics over all pixels.

    Args:
        x_c: Content image
        x_s: Style image (any shape)
        clamp: Clip the result to [0,1]

    Returns:
        Stylised image shaped like ``x_c``

    Raises:
        DegenerateContentError: If σ_c ≤ 1e-6
    """
    x_c = np.asarray(x_c, dtype=np.float64)
    x_s = np.asarray(x_s, dtype=np.float64)
    mu_c, sigma_c = x_c.mean(), x_c.std()
    if sigma_c <= MIN_CONTENT_STD:
        raise DegenerateContentError(f"degenerate content: σ_c = {sigma_c:.3g}")
    z = (x_c - mu_c) / sigma_c * x_s.std() + x_s.mean()
    return np.clip(z, 0.0, 1.0) if clamp else z
