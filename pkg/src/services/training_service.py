"""
Baseline training service.

Trains the U-Net with Adam on the seen-vendor training split.
"""

import time
from typing import Tuple

import numpy as np
from tqdm import tqdm

from src.autodiff.rng import Rng
from src.config.settings import ExperimentConfig
from src.evaluation.harness import evaluate_records
from src.metrics.losses import loss_and_gradients
from src.models.sample import Dataset
from src.models.training import LossCurve
from src.segnet.optim import OptState, adam_step, init_adam
from src.segnet.unet import UNetModel, init_unet
from src.utils.errors import NonFiniteError
from src.utils.logger import get_logger

logger = get_logger(__name__)


class TrainingService:
    """Pretrain the segmentation network."""

    def __init__(self, config: ExperimentConfig, progress: bool = True):
        """
        Initialize training service.

        Args:
            config: Experiment configuration
            progress: Show progress bars
        """
        self.config = config
        self.progress = progress

    def batches(self, train: Dataset, epoch: int) -> list:
        """Shuffled index batches of one epoch."""
        order = Rng(self.config.component_seed("pretrain-order", epoch)).permutation(len(train))
        size = self.config.pretrain.batch_size
        return [order[start:start + size] for start in range(0, len(order), size)]

    def rotations(self, train: Dataset, epoch: int) -> np.ndarray:
        """Quarter turns per training sample for one epoch (all zero when augmentation is off)."""
        if not self.config.pretrain.rotation_augment:
            return np.zeros(len(train), dtype=np.int64)
        return Rng(self.config.component_seed("pretrain-rotation", epoch)).integers(0, 4, len(train))

    def pretrain(self, train: Dataset) -> Tuple[UNetModel, OptState, LossCurve]:
        """
        Train a freshly initialised network.

        Args:
            train: Training split

        Returns:
            (model, Adam state, per-epoch mean loss curve)

        Raises:
            ValueError: Empty training split
            NonFiniteError: Loss became NaN/inf
        """
        if len(train) == 0:
            raise ValueError("Training split is empty")
        schedule = self.config.pretrain
        model = init_unet(self.config.model, self.config.component_seed("init"))
        opt = init_adam(model, lr=schedule.lr)
        curve = LossCurve()
        started = time.perf_counter()

        logger.info(f"   🧠 U-Net with {model.num_parameters()} parameters, {len(train)} training samples")
        for epoch in range(schedule.epochs):
            losses = []
            turns = self.rotations(train, epoch)
            for batch in tqdm(self.batches(train, epoch), desc=f"pretrain epoch {epoch + 1}/{schedule.epochs}",
                              disable=not self.progress, leave=False):
                samples = [train[int(i)].rotated(turns[int(i)]) for i in batch]
                images = np.stack([s.image for s in samples])
                labels = np.stack([s.label for s in samples])
                result = loss_and_gradients(model, images, labels)
                if not np.isfinite(result.loss):
                    raise NonFiniteError("Non-finite loss during pretraining", epoch=epoch, loss=result.loss)
                model, opt = adam_step(model, result.param_grads, opt)
                losses.append(result.loss)

            curve.epochs.append(epoch + 1)
            curve.losses.append(float(np.mean(losses)))
            logger.info(f"   Epoch {epoch + 1}/{schedule.epochs}: loss {curve.losses[-1]:.4f}")

        curve.seconds = time.perf_counter() - started
        return model, opt, curve

    def mean_dice(self, model: UNetModel, data: Dataset) -> float:
        """Structure-averaged DSC over ``data`` (single pass)."""
        records = evaluate_records(model, data, use_tta=False, method="check")
        dsc = records[records["metric"] == "DSC"]
        per_image = dsc.groupby("image")["value"].mean()
        return float(per_image.mean())
