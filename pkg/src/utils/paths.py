"""
Output directory layout for experiment runs.

    <out>/
    ├── data/          # one subdirectory per split (train, style-pool, test-A..D)
    ├── checkpoints/   # <method>.ckpt
    ├── logs/          # loss curves, train logs, run logs
    ├── reports/       # metric CSVs, report.json
    ├── seeds/         # seed_<s>/ runs of the multi-seed robustness command
    └── debug/         # optional PGM dumps
"""

from pathlib import Path
from datetime import datetime
from typing import Optional, Union

from .file_utils import ensure_directory


class RunPaths:
    """Resolve every file location of a run from its output directory."""

    def __init__(self, out_dir: Union[Path, str]):
        self.root = Path(out_dir)

    @property
    def data_dir(self) -> Path:
        return self.root / "data"

    @property
    def checkpoints_dir(self) -> Path:
        return self.root / "checkpoints"

    @property
    def logs_dir(self) -> Path:
        return self.root / "logs"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    @property
    def debug_dir(self) -> Path:
        return self.root / "debug"

    def split_dir(self, split: str) -> Path:
        return self.data_dir / split

    def checkpoint(self, method: str) -> Path:
        return self.checkpoints_dir / f"{method}.ckpt"

    def train_log(self, method: str) -> Path:
        return self.logs_dir / f"trainlog_{method}.csv"

    def curriculum_dump_dir(self, method: str) -> Path:
        return self.debug_dir / "curriculum" / method

    def prediction_dump_dir(self, method: str) -> Path:
        return self.debug_dir / "predictions" / method

    def manifest(self, command: str) -> Path:
        return self.root / f"manifest_{command}.json"

    def seed_dir(self, seed: int) -> Path:
        """Run directory of one seed of a multi-seed experiment."""
        return self.root / "seeds" / f"seed_{seed}"

    def ensure(self) -> "RunPaths":
        """Create the top-level directories."""
        for directory in (self.data_dir, self.checkpoints_dir, self.logs_dir, self.reports_dir):
            ensure_directory(directory)
        return self


def get_log_file_path(logs_dir: Path, log_type: str = "run", timestamp: Optional[datetime] = None) -> Path:
    """
    Get path for a log file named by date (one per day).

    Args:
        logs_dir: Directory holding log files
        log_type: Type of log ('run', 'error', 'debug')
        timestamp: Optional timestamp, defaults to now

    Returns:
        Path object for the log file
    """
    if timestamp is None:
        timestamp = datetime.now()

    ensure_directory(logs_dir)
    date_str = timestamp.strftime("%Y%m%d")
    return logs_dir / f"{log_type}_{date_str}.log"
