"""Evaluation harness, cross-method reports and report files."""

import json

import pandas as pd
import pytest

from src.evaluation.harness import (
    compare_report,
    evaluate,
    evaluate_predictions,
    evaluate_records,
    write_report,
)
from src.metrics.ranking import RECORD_COLUMNS, MetricTable
from src.models.sample import Dataset

from conftest import labelled_sample


@pytest.fixture
def test_split():
    samples = [labelled_sample(seed, vendor=vendor) for seed, vendor in zip(range(20, 24), "AABB")]
    return Dataset(split="test-mixed", samples=samples)


def _table(records: pd.DataFrame, method: str) -> MetricTable:
    return MetricTable.from_records(records.assign(method=method))


def test_oracle_predictions_are_perfect(test_split):
    records = evaluate_predictions([s.label for s in test_split], test_split, "oracle")
    assert records.columns.tolist() == RECORD_COLUMNS
    table = MetricTable.from_records(records)
    frame = table.frame
    assert (frame[frame["metric"].isin(["DSC", "JAC"])]["mean"] == 1.0).all()
    assert (frame[frame["metric"].isin(["HD", "ASSD"])]["mean"] == 0.0).all()
    assert table.groups == ["A", "B"]


def test_records_cover_every_structure_and_metric(test_split):
    records = evaluate_predictions([s.label for s in test_split], test_split, "oracle")
    assert len(records) == len(test_split) * 3 * 4
    assert records["image"].iloc[0] == "test-mixed/0000"


def test_empty_dataset_rejected(tiny_model):
    with pytest.raises(ValueError):
        evaluate(tiny_model, Dataset(split="test-A"), use_tta=False)


def test_prediction_count_must_match(test_split):
    with pytest.raises(ValueError):
        evaluate_predictions([test_split[0].label], test_split, "m")


def test_evaluation_is_deterministic(tiny_model, test_split):
    first = evaluate(tiny_model, test_split, use_tta=True, method="m").frame
    second = evaluate(tiny_model, test_split, use_tta=True, method="m").frame
    pd.testing.assert_frame_equal(first, second)


def test_prediction_dump(tmp_path, tiny_model, test_split):
    evaluate_records(tiny_model, test_split, use_tta=False, dump_dir=tmp_path)
    assert sorted(p.name for p in tmp_path.glob("*.pgm")) == ["0000_A.pgm", "0001_A.pgm", "0002_B.pgm", "0003_B.pgm"]


def test_dominant_method_scores_one(test_split):
    perfect = evaluate_predictions([s.label for s in test_split], test_split, "perfect")
    blank = evaluate_predictions([s.label * 0 for s in test_split], test_split, "blank")
    report = compare_report([_table(perfect, "perfect"), _table(blank, "blank")], fingerprint="abc")
    assert report.score("perfect") == 1.0
    assert report.score("blank") == 0.0
    assert report.methods == ["perfect", "blank"]
    with pytest.raises(KeyError):
        report.score("missing")


def test_identical_methods_tie(test_split):
    records = evaluate_predictions([s.label for s in test_split], test_split, "x")
    report = compare_report([_table(records, "a"), _table(records, "b")], fingerprint="f")
    assert report.score("a") == report.score("b")


def test_single_method_rejected(test_split):
    records = evaluate_predictions([s.label for s in test_split], test_split, "x")
    with pytest.raises(ValueError):
        compare_report([_table(records, "a")], fingerprint="f")


def test_vendor_mismatch_rejected(test_split):
    records = evaluate_predictions([s.label for s in test_split], test_split, "x")
    only_a = records[records["vendor"] == "A"]
    with pytest.raises(ValueError, match="Vendor mismatch"):
        compare_report([_table(records, "a"), _table(only_a, "b")], fingerprint="f")


def test_report_files(tmp_path, test_split):
    perfect = evaluate_predictions([s.label for s in test_split], test_split, "perfect")
    blank = evaluate_predictions([s.label * 0 for s in test_split], test_split, "blank")
    tables = [_table(perfect, "perfect"), _table(blank, "blank")]
    phases = [MetricTable.from_records(perfect, "phase"), MetricTable.from_records(blank.assign(method="blank"), "phase")]
    report = compare_report(tables, fingerprint="abc", wall_clock={"evaluate_seconds": 1.5}, phase_tables=phases)
    written = write_report(report, tmp_path)
    assert {p.name for p in written} == {"metrics.csv", "summary.csv", "phase_metrics.csv", "report.json"}

    metrics = (tmp_path / "metrics.csv").read_text().splitlines()
    assert metrics[0] == "method,vendor,structure,metric,mean,std"
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0] == ("method,A_DSC,A_DSC_std,A_HD,A_HD_std,B_DSC,B_DSC_std,B_HD,B_HD_std,"
                          "DSC_Score,HD_Score,MinMax_Score")
    assert (tmp_path / "phase_metrics.csv").read_text().splitlines()[0] == "method,phase,structure,metric,mean,std"

    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["fingerprint"] == "abc"
    assert payload["methods"] == ["perfect", "blank"]
    assert payload["wall_clock"] == {"evaluate_seconds": 1.5}


def test_report_bytes_are_reproducible(tmp_path, test_split):
    perfect = evaluate_predictions([s.label for s in test_split], test_split, "perfect")
    blank = evaluate_predictions([s.label * 0 for s in test_split], test_split, "blank")
    for target in ("one", "two"):
        report = compare_report([_table(perfect, "perfect"), _table(blank, "blank")], fingerprint="abc")
        write_report(report, tmp_path / target)
    for name in ("metrics.csv", "summary.csv", "report.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()
