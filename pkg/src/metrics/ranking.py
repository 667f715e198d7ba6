"""
Metric tables and cross-method min-max ranking.

Per-image records (one value per method × image × structure × metric) are
aggregated into a ``MetricTable`` of mean/std cells grouped by vendor (or by
cardiac phase). ``minmax_score`` ranks methods the way the challenge leaderboard
does: each (vendor, metric) cell is min-max normalised across methods and the
normalised cells are averaged.
"""

from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

METRICS = ("DSC", "JAC", "HD", "ASSD")
HIGHER_IS_BETTER = {"DSC": True, "JAC": True, "HD": False, "ASSD": False}
STRUCTURES = {1: "LV", 2: "MYO", 3: "RV"}
AVERAGE = "avg"
STRUCTURE_ORDER = [*STRUCTURES.values(), AVERAGE]
RECORD_COLUMNS = ["method", "vendor", "phase", "image", "structure", "metric", "value"]
RANKED_METRICS = ("DSC", "HD")


class MetricTable:
    """Mean/std per (method, group, structure, metric); group is ``vendor`` or ``phase``."""

    def __init__(self, frame: pd.DataFrame, group: str = "vendor"):
        self.group = group
        self.columns = ["method", group, "structure", "metric", "mean", "std"]
        missing = [c for c in self.columns if c not in frame.columns]
        if missing:
            raise ValueError(f"MetricTable frame lacks columns {missing}")
        self.frame = frame[self.columns].reset_index(drop=True)
        self._validate()

    def _validate(self) -> None:
        for metric, cells in self.frame.groupby("metric")["mean"]:
            if metric in ("DSC", "JAC") and ((cells < 0).any() or (cells > 1).any()):
                raise ValueError(f"{metric} values must lie in [0,1]")
            if metric in ("HD", "ASSD") and (cells < 0).any():
                raise ValueError(f"{metric} values must be non-negative")

    @classmethod
    def from_records(cls, records: pd.DataFrame, group: str = "vendor") -> "MetricTable":
        """
        Aggregate per-image records into mean/std cells, adding structure-averaged rows.

        Args:
            records: Frame with RECORD_COLUMNS
            group: Grouping column ('vendor' or 'phase')

        Returns:
            MetricTable
        """
        if records.empty:
            raise ValueError("No metric records to aggregate")
        averaged = (
            records.groupby(["method", "vendor", "phase", "image", "metric"], sort=False)["value"]
            .mean()
            .reset_index()
            .assign(structure=AVERAGE)
        )
        full = pd.concat([records, averaged[RECORD_COLUMNS]], ignore_index=True)
        grouped = full.groupby(["method", group, "structure", "metric"], sort=False)["value"]
        frame = pd.DataFrame({"mean": grouped.mean(), "std": grouped.std(ddof=0)}).reset_index()
        return cls(_sorted(frame, group, list(dict.fromkeys(records["method"]))), group)

    @classmethod
    def merge(cls, tables: Sequence["MetricTable"]) -> "MetricTable":
        """Stack tables of distinct methods sharing the same grouping."""
        if not tables:
            raise ValueError("Nothing to merge")
        group = tables[0].group
        if any(t.group != group for t in tables):
            raise ValueError("Cannot merge tables with different groupings")
        methods = [m for t in tables for m in t.methods]
        if len(set(methods)) != len(methods):
            raise ValueError(f"Duplicate methods across tables: {methods}")
        frame = pd.concat([t.frame for t in tables], ignore_index=True)
        return cls(_sorted(frame, group, methods), group)

    @property
    def methods(self) -> List[str]:
        return list(dict.fromkeys(self.frame["method"]))

    @property
    def groups(self) -> List[str]:
        return list(dict.fromkeys(self.frame[self.group]))

    def cell(self, method: str, group_value: str, metric: str, structure: str = AVERAGE) -> float:
        """Mean value of one cell."""
        f = self.frame
        hit = f[(f["method"] == method) & (f[self.group] == group_value)
                & (f["metric"] == metric) & (f["structure"] == structure)]
        if hit.empty:
            raise KeyError(f"No cell for ({method}, {group_value}, {structure}, {metric})")
        return float(hit["mean"].iloc[0])

    def mean_over(self, method: str, groups: Sequence[str], metric: str = "DSC") -> float:
        """Unweighted mean of structure-averaged cells over ``groups``."""
        return float(np.mean([self.cell(method, g, metric) for g in groups]))

    def subset(self, methods: Sequence[str]) -> "MetricTable":
        return MetricTable(self.frame[self.frame["method"].isin(methods)], self.group)

    def rescaled(self, metric: str, scale: float, offset: float = 0.0) -> "MetricTable":
        """Copy with an affine map applied to one metric's means (positive scale keeps ranking)."""
        frame = self.frame.copy()
        rows = frame["metric"] == metric
        frame.loc[rows, "mean"] = frame.loc[rows, "mean"] * scale + offset
        frame.loc[rows, "std"] = frame.loc[rows, "std"] * abs(scale)
        return MetricTable(frame, self.group)


def _sorted(frame: pd.DataFrame, group: str, methods: List[str]) -> pd.DataFrame:
    keys = pd.DataFrame({
        "m": frame["method"].map({m: i for i, m in enumerate(methods)}),
        "g": frame[group].astype(str),
        "s": frame["structure"].map({s: i for i, s in enumerate(STRUCTURE_ORDER)}),
        "k": frame["metric"].map({m: i for i, m in enumerate(METRICS)}),
    })
    order = keys.sort_values(["m", "g", "s", "k"], kind="stable").index
    return frame.loc[order].reset_index(drop=True)


def minmax_score(table: MetricTable) -> pd.DataFrame:
    """
    DSC Score, HD Score and Min-max Score per method.

    Args:
        table: Vendor-grouped table with at least two methods

    Returns:
        Frame with columns method, DSC_Score, HD_Score, MinMax_Score

    Raises:
        ValueError: Fewer than two methods or a missing (method, vendor, metric) cell
    """
    methods = table.methods
    if len(methods) < 2:
        raise ValueError(f"Min-max ranking needs at least 2 methods, got {len(methods)}")
    vendors = table.groups

    values: Dict[str, Dict[tuple, float]] = {m: {} for m in methods}
    for method in methods:
        for vendor in vendors:
            for metric in RANKED_METRICS:
                try:
                    values[method][(vendor, metric)] = table.cell(method, vendor, metric)
                except KeyError as e:
                    raise ValueError(f"Incomplete table: {e}") from e

    normalised: Dict[str, List[float]] = {m: [] for m in methods}
    for vendor in vendors:
        for metric in RANKED_METRICS:
            column = np.array([values[m][(vendor, metric)] for m in methods])
            low, high = column.min(), column.max()
            for method, v in zip(methods, column):
                if high == low:
                    normalised[method].append(0.0)
                elif HIGHER_IS_BETTER[metric]:
                    normalised[method].append((v - low) / (high - low))
                else:
                    normalised[method].append((high - v) / (high - low))

    rows = []
    for method in methods:
        rows.append({
            "method": method,
            "DSC_Score": float(np.mean([values[method][(v, "DSC")] for v in vendors])),
            "HD_Score": float(np.mean([values[method][(v, "HD")] for v in vendors])),
            "MinMax_Score": float(np.mean(normalised[method])),
        })
    return pd.DataFrame(rows, columns=["method", "DSC_Score", "HD_Score", "MinMax_Score"])


def summary_frame(table: MetricTable, scores: pd.DataFrame) -> pd.DataFrame:
    """Leaderboard layout: per-vendor DSC/HD mean and std, then the three scores."""
    rows = []
    for method in table.methods:
        row: Dict[str, object] = {"method": method}
        for vendor in table.groups:
            for metric in RANKED_METRICS:
                f = table.frame
                hit = f[(f["method"] == method) & (f[table.group] == vendor)
                        & (f["metric"] == metric) & (f["structure"] == AVERAGE)]
                row[f"{vendor}_{metric}"] = float(hit["mean"].iloc[0])
                row[f"{vendor}_{metric}_std"] = float(hit["std"].iloc[0])
        rows.append(row)
    return pd.DataFrame(rows).merge(scores, on="method", how="left")
