"""Shared fixtures: small configurations that keep every test fast."""

import numpy as np
import pytest

from src.config.settings import (
    CurriculumParams,
    DatasetSpec,
    EvalSettings,
    ExperimentConfig,
    FinetuneSchedule,
    PretrainSchedule,
    UNetConfig,
)
from src.models.sample import Dataset, Sample
from src.segnet.unet import init_unet
from src.stylegen.anatomy import gen_content
from src.autodiff.rng import Rng


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow end-to-end trend tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def tiny_unet_config():
    return UNetConfig(base_channels=2, depth=1)


@pytest.fixture
def tiny_model(tiny_unet_config):
    return init_unet(tiny_unet_config, seed=7)


@pytest.fixture
def tiny_spec():
    return DatasetSpec(
        image_size=32,
        train_per_vendor=3,
        style_pool_size=4,
        test_per_vendor=2,
    )


@pytest.fixture
def tiny_config(tmp_path, tiny_spec):
    return ExperimentConfig(
        seed=3,
        dataset=tiny_spec,
        model=UNetConfig(base_channels=2, depth=1),
        pretrain=PretrainSchedule(epochs=1, batch_size=2),
        curriculum=CurriculumParams(n=2, epsilon=0.25, pool_size=4),
        finetune=FinetuneSchedule(epochs=1),
        evaluation=EvalSettings(use_tta=False, hardness_samples=2, hardness_seeds=[0]),
        output_dir=str(tmp_path / "run"),
    )


def labelled_sample(seed: int, size: int = 32, vendor: str = "A") -> Sample:
    """Sample whose image is its label map scaled into [0, 1]."""
    label, _ = gen_content(Rng(seed), size)
    image = (label / 3.0)[None].astype(np.float64)
    return Sample(image=image, label=label, vendor=vendor, seed=seed)


@pytest.fixture
def small_split():
    return Dataset(split="train", samples=[labelled_sample(seed) for seed in range(3)])


@pytest.fixture
def small_pool():
    samples = []
    for seed in range(10, 14):
        sample = labelled_sample(seed)
        samples.append(Sample(image=0.2 + 0.6 * sample.image, label=sample.label, vendor="B", seed=seed))
    return Dataset(split="style-pool", samples=samples)
