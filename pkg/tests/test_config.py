"""Experiment configuration: defaults, JSON files, fingerprints and validation."""

import json

import pytest
from pydantic import ValidationError

from src.config.settings import (
    CurriculumParams,
    DatasetSpec,
    ExperimentConfig,
    FinetuneSchedule,
    Settings,
    UNetConfig,
    VendorStyle,
)


def test_defaults():
    config = ExperimentConfig()
    assert config.seed == 0
    assert config.dataset.image_size == 64
    assert config.dataset.train_vendors == ["A", "B"]
    assert config.dataset.test_vendors == ["A", "B", "C", "D"]
    assert (config.model.base_channels, config.model.depth) == (8, 2)
    assert (config.curriculum.n, config.curriculum.epsilon, config.curriculum.pool_size) == (3, 0.25, 4)
    assert config.finetune.momentum == 0.9
    assert config.evaluation.use_tta is True
    assert config.pretrain.rotation_augment and config.finetune.rotation_augment
    assert config.finetune.clip_norm == 5.0
    assert config.evaluation.robustness_seeds == [0, 1, 2]


def test_json_round_trip(tmp_path, tiny_config):
    path = tiny_config.to_json(tmp_path / "nested" / "config.json")
    loaded = ExperimentConfig.from_json(path)
    assert loaded == tiny_config
    assert loaded.fingerprint() == tiny_config.fingerprint()
    assert path.read_text() == loaded.to_json(tmp_path / "again.json").read_text()


def test_partial_json_fills_defaults(tmp_path):
    path = tmp_path / "partial.json"
    path.write_text(json.dumps({"seed": 9, "curriculum": {"n": 5}}))
    config = ExperimentConfig.from_json(path)
    assert config.seed == 9
    assert config.curriculum.n == 5
    assert config.curriculum.epsilon == 0.25


def test_fingerprint_ignores_output_dir(tiny_config):
    moved = tiny_config.with_overrides(output_dir="/elsewhere")
    assert moved.fingerprint() == tiny_config.fingerprint()
    assert len(tiny_config.fingerprint()) == 64


def test_fingerprint_tracks_results(tiny_config):
    assert tiny_config.with_overrides(seed=4).fingerprint() != tiny_config.fingerprint()
    assert tiny_config.with_overrides(use_tta=True).fingerprint() != tiny_config.fingerprint()


def test_overrides_leave_original_alone(tiny_config):
    updated = tiny_config.with_overrides(seed=11, use_tta=True)
    assert (updated.seed, updated.evaluation.use_tta) == (11, True)
    assert (tiny_config.seed, tiny_config.evaluation.use_tta) == (3, False)
    assert tiny_config.with_overrides() == tiny_config


def test_component_seeds_differ():
    config = ExperimentConfig(seed=1)
    assert config.component_seed("pretrain") == ExperimentConfig(seed=1).component_seed("pretrain")
    assert config.component_seed("pretrain") != config.component_seed("finetune")
    assert config.component_seed("pretrain") != ExperimentConfig(seed=2).component_seed("pretrain")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="init-config"):
        ExperimentConfig.from_json(tmp_path / "absent.json")


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{seed: 1")
    with pytest.raises(ValueError, match="Invalid JSON"):
        ExperimentConfig.from_json(path)


def test_unknown_field(tmp_path):
    path = tmp_path / "extra.json"
    path.write_text(json.dumps({"seeds": 1}))
    with pytest.raises(ValueError, match="Invalid configuration"):
        ExperimentConfig.from_json(path)


def test_image_size_must_fit_depth():
    with pytest.raises(ValidationError, match="2\\^depth"):
        ExperimentConfig(dataset=DatasetSpec(image_size=36), model=UNetConfig(depth=3))


def test_image_size_must_fit_pool_size():
    with pytest.raises(ValidationError, match="pool_size"):
        ExperimentConfig(dataset=DatasetSpec(image_size=32), curriculum=CurriculumParams(pool_size=5))


@pytest.mark.parametrize("epsilon", [0.0, 1.0])
def test_epsilon_bounds_accepted(epsilon):
    assert CurriculumParams(epsilon=epsilon).epsilon == epsilon


@pytest.mark.parametrize("epsilon", [-0.1, 1.5])
def test_epsilon_out_of_range(epsilon):
    with pytest.raises(ValidationError):
        CurriculumParams(epsilon=epsilon)


def test_vendor_style_intensities_in_range():
    with pytest.raises(ValidationError):
        VendorStyle(name="A", class_intensity=[0.1, 1.2, 0.3, 0.4], gamma=1.0, noise_sigma=0.0, bias_amplitude=0.0)


def test_vendor_styles_must_cover_vendors():
    styles = DatasetSpec().vendor_styles
    del styles["D"]
    with pytest.raises(ValidationError, match="lacks entries"):
        DatasetSpec(vendor_styles=styles)


def test_vendor_style_name_must_match_key():
    styles = DatasetSpec().vendor_styles
    styles["C"] = styles["A"]
    with pytest.raises(ValidationError, match="is named"):
        DatasetSpec(vendor_styles=styles)


def test_runtime_settings_from_environment(monkeypatch):
    monkeypatch.setenv("LSCL_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("LSCL_PROGRESS", "false")
    settings = Settings()
    assert settings.log_level == "DEBUG"
    assert settings.progress is False


def test_clip_norm_can_be_disabled(tmp_path):
    path = tmp_path / "unclipped.json"
    path.write_text(json.dumps({"finetune": {"clip_norm": None}}))
    assert ExperimentConfig.from_json(path).finetune.clip_norm is None


def test_clip_norm_must_be_positive():
    with pytest.raises(ValidationError):
        FinetuneSchedule(clip_norm=0.0)
