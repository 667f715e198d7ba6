"""
Evaluation harness: per-image metrics, per-method tables and the
cross-method report.

Report files (all under the reports directory):
    metrics.csv         method,vendor,structure,metric,mean,std
    phase_metrics.csv   method,phase,structure,metric,mean,std
    summary.csv         method,<V>_DSC,<V>_DSC_std,<V>_HD,<V>_HD_std,...,DSC_Score,HD_Score,MinMax_Score
    report.json         fingerprint, methods, scores and wall-clock timings
"""

import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from src.evaluation.tta import predict_labels
from src.metrics.distance import assd, hausdorff
from src.metrics.overlap import dice_coefficient, jaccard
from src.metrics.ranking import RECORD_COLUMNS, STRUCTURES, MetricTable, minmax_score, summary_frame
from src.models.sample import Dataset
from src.segnet.unet import UNetModel
from src.utils.file_utils import ensure_directory, save_csv, save_json
from src.utils.logger import get_logger
from src.utils.pgm import write_pgm

logger = get_logger(__name__)

METRIC_FUNCTIONS = {
    "DSC": dice_coefficient,
    "JAC": jaccard,
    "HD": hausdorff,
    "ASSD": assd,
}
PREDICTION_GREY_STEP = 85  # class id → visible grey level in dumps


def image_records(pred: np.ndarray, gt: np.ndarray, method: str, vendor: str, phase: str,
                  image_id: str) -> List[dict]:
    """Metric rows of one image for every structure."""
    rows = []
    for class_id, structure in STRUCTURES.items():
        for metric, fn in METRIC_FUNCTIONS.items():
            rows.append({
                "method": method,
                "vendor": vendor,
                "phase": phase,
                "image": image_id,
                "structure": structure,
                "metric": metric,
                "value": float(fn(pred, gt, class_id)),
            })
    return rows


def evaluate_predictions(predictions: Sequence[np.ndarray], test: Dataset, method: str) -> pd.DataFrame:
    """
    Per-image metric records for given label maps.

    Args:
        predictions: One h×w label map per test sample
        test: Ground-truth samples
        method: Method name for the records

    Returns:
        Frame with RECORD_COLUMNS
    """
    if len(test) == 0:
        raise ValueError("Cannot evaluate on an empty dataset")
    if len(predictions) != len(test):
        raise ValueError(f"{len(predictions)} predictions for {len(test)} samples")
    rows = []
    for index, (pred, sample) in enumerate(zip(predictions, test)):
        rows += image_records(pred, sample.label, method, sample.vendor, sample.phase, f"{test.split}/{index:04d}")
    return pd.DataFrame(rows, columns=RECORD_COLUMNS)


def predict_dataset(model: UNetModel, test: Dataset, use_tta: bool, dump_dir: Optional[Union[Path, str]] = None,
                    progress: bool = False) -> List[np.ndarray]:
    """Label maps for every sample, optionally dumped as PGM."""
    predictions = []
    for index, sample in enumerate(tqdm(test, desc=f"predict {test.split}", disable=not progress, leave=False)):
        pred = predict_labels(model, sample.image, use_tta)
        if dump_dir is not None:
            write_pgm(pred * PREDICTION_GREY_STEP, Path(dump_dir) / f"{index:04d}_{sample.vendor}.pgm")
        predictions.append(pred)
    return predictions


def evaluate_records(model: UNetModel, test: Dataset, use_tta: bool, method: str = "model",
                     dump_dir: Optional[Union[Path, str]] = None, progress: bool = False) -> pd.DataFrame:
    """Predict and score every test sample; returns per-image records."""
    if len(test) == 0:
        raise ValueError("Cannot evaluate on an empty dataset")
    return evaluate_predictions(predict_dataset(model, test, use_tta, dump_dir, progress), test, method)


def evaluate(model: UNetModel, test: Dataset, use_tta: bool, method: str = "model") -> MetricTable:
    """
    Per-vendor mean/std of DSC, JAC, HD and ASSD for LV, MYO, RV and their average.

    Args:
        model: Network
        test: Test samples (any mix of vendors)
        use_tta: Average the rotation passes
        method: Method name in the table

    Returns:
        Vendor-grouped MetricTable
    """
    return MetricTable.from_records(evaluate_records(model, test, use_tta, method))


class EvalReport(BaseModel):
    """Merged metric tables, min-max scores, config fingerprint and timings."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    table: MetricTable
    phase_table: Optional[MetricTable] = None
    scores: pd.DataFrame
    fingerprint: str
    wall_clock: Dict[str, float] = Field(default_factory=dict)
    notes: Dict[str, Any] = Field(default_factory=dict)

    @property
    def methods(self) -> List[str]:
        return self.table.methods

    def score(self, method: str) -> float:
        row = self.scores[self.scores["method"] == method]
        if row.empty:
            raise KeyError(f"No score for method '{method}'")
        return float(row["MinMax_Score"].iloc[0])

    def summary(self) -> pd.DataFrame:
        return summary_frame(self.table, self.scores)


def compare_report(tables: Sequence[MetricTable], fingerprint: str,
                   wall_clock: Optional[Dict[str, float]] = None,
                   phase_tables: Optional[Sequence[MetricTable]] = None) -> EvalReport:
    """
    Merge per-method tables and rank them.

    Args:
        tables: One vendor-grouped table per method (at least two methods overall)
        fingerprint: Config fingerprint of the run
        wall_clock: Timing entries in seconds
        phase_tables: Optional phase-grouped tables of the same methods

    Returns:
        EvalReport

    Raises:
        ValueError: Fewer than two methods or vendors that differ between methods
    """
    merged = MetricTable.merge(list(tables))
    if len(merged.methods) < 2:
        raise ValueError(f"A comparison needs at least 2 methods, got {merged.methods}")
    reference = set(tables[0].groups)
    for table in tables[1:]:
        if set(table.groups) != reference:
            raise ValueError(
                f"Vendor mismatch between methods: {sorted(reference)} vs {sorted(table.groups)}"
            )
    phase = MetricTable.merge(list(phase_tables)) if phase_tables else None
    return EvalReport(
        table=merged,
        phase_table=phase,
        scores=minmax_score(merged),
        fingerprint=fingerprint,
        wall_clock=dict(wall_clock or {}),
    )


def write_report(report: EvalReport, reports_dir: Union[Path, str]) -> List[Path]:
    """
    Write the report CSVs and report.json.

    Args:
        report: Report to write
        reports_dir: Destination directory

    Returns:
        Paths of the written files
    """
    directory = ensure_directory(reports_dir)
    written = [
        save_csv(report.table.frame, directory / "metrics.csv"),
        save_csv(report.summary(), directory / "summary.csv"),
    ]
    if report.phase_table is not None:
        written.append(save_csv(report.phase_table.frame, directory / "phase_metrics.csv"))

    payload = {
        "fingerprint": report.fingerprint,
        "methods": report.methods,
        "scores": report.scores.to_dict(orient="records"),
        "wall_clock": report.wall_clock,
        "notes": report.notes,
    }
    save_json(payload, directory / "report.json")
    written.append(directory / "report.json")
    logger.info(f"📊 Wrote {len(written)} report files to {directory}")
    return written


def timed_records(model: UNetModel, test: Dataset, use_tta: bool, method: str,
                  dump_dir: Optional[Union[Path, str]] = None, progress: bool = False):
    """Records plus mean inference seconds per image."""
    started = time.perf_counter()
    records = evaluate_records(model, test, use_tta, method, dump_dir, progress)
    return records, (time.perf_counter() - started) / len(test)
