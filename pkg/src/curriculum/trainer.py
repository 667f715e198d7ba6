"""
Curriculum finetuning loops.

``lscl_finetune`` runs the local style curriculum: each content sample is
stylised against a random style-pool image, and a per-pixel weight Γ grows
stage by stage along the local sign of the input gradient, making the
training input progressively more stylised where the loss is most sensitive.
The other loops are the ablation and comparison baselines.

Randomness comes from named child streams of the caller's generator: the
visiting order (``"order"``), the style image (``"style"``), the quarter-turn
augmentation (``"rotation"``), the Mixup partner and weight (``"partner"``,
``"lambda"``). Each is keyed by epoch and position,
so one stream can be reproduced without the others.
"""

import time
from pathlib import Path
from typing import Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.autodiff.rng import Rng
from src.config.settings import CurriculumParams
from src.curriculum.operations import blend, lgs, mixup, scl_increment
from src.metrics.losses import LossResult, loss_and_gradients
from src.models.sample import Dataset, Sample
from src.models.training import CurriculumState, TrainLog
from src.segnet.optim import OptState, optimizer_step
from src.segnet.unet import UNetModel
from src.stylegen.transfer import moment_style_transfer
from src.utils.errors import NonFiniteError
from src.utils.logger import get_logger
from src.utils.pgm import image_to_pixels, write_pgm

logger = get_logger(__name__)

Increment = Literal["lgs", "scl"]


def sample_order(rng: Rng, epoch: int, count: int) -> np.ndarray:
    """Visiting order of the training samples in ``epoch``."""
    return rng.child("order", epoch).permutation(count)


def style_index(rng: Rng, epoch: int, position: int, pool_size: int) -> int:
    """Style-pool index drawn for the sample visited at ``position`` of ``epoch``."""
    return rng.child("style", epoch, position).integers(0, pool_size)


def rotation_turns(rng: Rng, epoch: int, position: int) -> int:
    """Quarter turns (0-3) applied to the sample visited at ``position`` of ``epoch``."""
    return rng.child("rotation", epoch, position).integers(0, 4)


def _loss_step(model: UNetModel, image: np.ndarray, sample: Sample, where: dict,
               soft_target: Optional[np.ndarray] = None) -> LossResult:
    try:
        if soft_target is not None:
            result = loss_and_gradients(model, image[None], soft_targets=soft_target[None])
        else:
            result = loss_and_gradients(model, image[None], sample.label[None])
    except NonFiniteError as e:
        raise NonFiniteError(f"Non-finite value during finetuning: {e}", **where) from e
    if not np.isfinite(result.loss):
        raise NonFiniteError("Non-finite loss during finetuning", loss=result.loss, **where)
    return result


def _dump_stage(dump_dir: Path, epoch: int, idx: int, stage: int, image: np.ndarray) -> None:
    write_pgm(image_to_pixels(image[0]), dump_dir / f"e{epoch:02d}_s{idx:04d}_z{stage}.pgm")


def lscl_finetune(
    model: UNetModel,
    train: Dataset,
    style_pool: Dataset,
    params: CurriculumParams,
    opt: Optional[OptState],
    epochs: int,
    rng: Rng,
    frozen: bool = False,
    increment: Increment = "lgs",
    gamma_init: float = 0.0,
    keep_snapshots: bool = False,
    dump_dir: Optional[Union[Path, str]] = None,
    dump_limit: int = 8,
    method: str = "lscl",
    rotate: bool = False,
    clip_norm: Optional[float] = None,
    progress: bool = False,
) -> Tuple[UNetModel, OptState, TrainLog]:
    """
    Finetune with the local style curriculum, one sample at a time.

    For each content sample x_c: z = S(x_c, x_s) with x_s drawn from the pool,
    Γ_0 = gamma_init; for stage i = 0..n: z_i = Γ_i·z + (1 − Γ_i)·x_c,
    Φ = loss(f(z_i), y), Γ_{i+1} = Γ_i + increment(∇_{z_i}Φ averaged over
    channels), then one optimiser step on ∇_θΦ.

    Args:
        model: Pretrained network
        train: Content samples
        style_pool: Style images (non-empty)
        params: Stages n, step ε, pooling size, Γ clamping
        opt: Optimiser state (may be None when frozen)
        epochs: Passes over ``train``
        rng: Source of order and style draws
        frozen: Skip parameter updates (hardness diagnostics)
        increment: 'lgs' (block-pooled) or 'scl' (per pixel)
        gamma_init: Initial value of Γ (1.0 trains directly on z)
        keep_snapshots: Store Γ_0..Γ_{n+1} per sample in the log
        dump_dir: Write z_i as PGM for the first ``dump_limit`` samples of epoch 0
        dump_limit: Number of samples to dump
        method: Name recorded in the log
        rotate: Rotate each content sample by a random multiple of 90°
        clip_norm: Global gradient-norm bound of every optimiser step (None: unclipped)
        progress: Show a progress bar

    Returns:
        (model, optimiser state, TrainLog)

    Raises:
        ValueError: Empty style pool or train split
        NonFiniteError: Loss became NaN/inf (carries epoch, sample and stage)
    """
    if len(style_pool) == 0:
        raise ValueError("Style pool is empty")
    if len(train) == 0:
        raise ValueError("Training split is empty")
    if not 0.0 <= gamma_init <= 1.0:
        raise ValueError(f"gamma_init must lie in [0,1], got {gamma_init}")

    if increment not in ("lgs", "scl"):
        raise ValueError(f"Unknown increment '{increment}' (use 'lgs' or 'scl')")
    if opt is None and not frozen:
        raise ValueError("An optimiser state is required unless frozen=True")

    dump_path = Path(dump_dir) if dump_dir is not None else None
    log = TrainLog(method=method, gamma_snapshots={} if keep_snapshots else None)
    model = model.copy()
    opt = opt.copy() if opt is not None else None
    started = time.perf_counter()

    for epoch in range(epochs):
        epoch_losses = []
        order = sample_order(rng, epoch, len(train))
        bar = tqdm(order, desc=f"{method} epoch {epoch + 1}/{epochs}", disable=not progress, leave=False)
        for position, idx in enumerate(bar):
            idx = int(idx)
            sample = train[idx]
            if rotate:
                sample = sample.rotated(rotation_turns(rng, epoch, position))
            x_s = style_pool[style_index(rng, epoch, position, len(style_pool))].image
            state = CurriculumState(
                gamma=np.full(sample.label.shape, gamma_init),
                z=moment_style_transfer(sample.image, x_s),
                x_c=sample.image,
            )
            snapshots = [state.gamma.copy()]

            for stage in range(params.n + 1):
                state.stage = stage
                z_i = blend(state.gamma, state.z, state.x_c)
                if dump_path is not None and epoch == 0 and position < dump_limit:
                    _dump_stage(dump_path, epoch, idx, stage, z_i)

                where = {"epoch": epoch, "sample": idx, "stage": stage}
                result = _loss_step(model, z_i, sample, where)

                grad_z = result.input_grad[0].mean(axis=0)
                if increment == "lgs":
                    step = lgs(grad_z, params.epsilon, params.pool_size)
                else:
                    step = scl_increment(grad_z, params.epsilon)
                next_gamma = state.gamma + step
                if params.clamp_gamma:
                    next_gamma = np.clip(next_gamma, 0.0, 1.0)

                # z_{i+1} − z_i = (Γ_{i+1} − Γ_i)(z − x_c)
                delta = (next_gamma - state.gamma) * (state.z - state.x_c)
                log.append(
                    epoch=epoch,
                    sample_idx=idx,
                    stage=stage,
                    loss=result.loss,
                    mean_abs_delta_z=float(np.abs(delta).mean()),
                    gamma_mean=float(state.gamma.mean()),
                )
                epoch_losses.append(result.loss)
                if not frozen:
                    model, opt = optimizer_step(model, result.param_grads, opt, clip_norm)
                state.gamma = next_gamma
                snapshots.append(state.gamma.copy())

            if keep_snapshots:
                log.gamma_snapshots[f"{epoch}:{idx}"] = snapshots

        logger.info(f"   {method} epoch {epoch + 1}/{epochs}: mean loss {np.mean(epoch_losses):.4f}")

    log.seconds = time.perf_counter() - started
    return model, opt, log


def random_style_finetune(model: UNetModel, train: Dataset, style_pool: Dataset, params: CurriculumParams,
                          opt: OptState, epochs: int, rng: Rng, **options) -> Tuple[UNetModel, OptState, TrainLog]:
    """Train directly on fully stylised samples: the curriculum with n = 0 and Γ ≡ 1."""
    single_stage = params.model_copy(update={"n": 0})
    return lscl_finetune(model, train, style_pool, single_stage, opt, epochs, rng,
                         gamma_init=1.0, method="random-style", **options)


def scl_finetune(model: UNetModel, train: Dataset, style_pool: Dataset, params: CurriculumParams,
                 opt: OptState, epochs: int, rng: Rng, **options) -> Tuple[UNetModel, OptState, TrainLog]:
    """The curriculum with per-pixel sign increments instead of LGS."""
    return lscl_finetune(model, train, style_pool, params, opt, epochs, rng,
                         increment="scl", method="scl", **options)


def mixup_finetune(model: UNetModel, train: Dataset, opt: OptState, epochs: int, rng: Rng,
                   alpha: float = 0.2, num_classes: int = 4, rotate: bool = False,
                   clip_norm: Optional[float] = None, progress: bool = False) -> Tuple[UNetModel, OptState, TrainLog]:
    """
    Finetune on Mixup pairs with soft-label loss.

    Args:
        model: Pretrained network
        train: Training samples
        opt: Optimiser state
        epochs: Passes over ``train``
        rng: Source of order, partner and weight draws
        alpha: Beta(α, α) parameter of the mixing weight
        num_classes: Number of label classes
        rotate: Rotate each pair by a random multiple of 90°
        clip_norm: Global gradient-norm bound of every optimiser step
        progress: Show a progress bar

    Returns:
        (model, optimiser state, TrainLog with one stage-0 row per sample)
    """
    if len(train) == 0:
        raise ValueError("Training split is empty")
    log = TrainLog(method="mixup")
    model, opt = model.copy(), opt.copy()
    started = time.perf_counter()

    for epoch in range(epochs):
        order = sample_order(rng, epoch, len(train))
        for position, idx in enumerate(tqdm(order, desc=f"mixup epoch {epoch + 1}/{epochs}",
                                            disable=not progress, leave=False)):
            idx = int(idx)
            sample = train[idx]
            partner = train[rng.child("partner", epoch, position).integers(0, len(train))]
            lam = rng.child("lambda", epoch, position).beta(alpha, alpha)
            if rotate:
                turns = rotation_turns(rng, epoch, position)
                sample, partner = sample.rotated(turns), partner.rotated(turns)
            image, soft = mixup(sample, partner, lam, num_classes)

            where = {"epoch": epoch, "sample": idx, "stage": 0}
            result = _loss_step(model, image, sample, where, soft_target=soft)
            log.append(
                epoch=epoch,
                sample_idx=idx,
                stage=0,
                loss=result.loss,
                mean_abs_delta_z=float(np.abs(image - sample.image).mean()),
                gamma_mean=0.0,
            )
            model, opt = optimizer_step(model, result.param_grads, opt, clip_norm)

    log.seconds = time.perf_counter() - started
    return model, opt, log


def curriculum_hardness(model: UNetModel, samples: Dataset, style_pool: Dataset, params: CurriculumParams,
                        rng: Rng, count: Optional[int] = None) -> pd.DataFrame:
    """
    Mean loss per curriculum stage with frozen parameters.

    Args:
        model: Network (not modified)
        samples: Content samples; the first ``count`` are used
        style_pool: Style images
        params: Curriculum parameters
        rng: Source of style draws
        count: Number of samples (all when None)

    Returns:
        Frame with columns stage, mean_loss, count
    """
    subset = samples.subset(count) if count is not None else samples
    _, _, log = lscl_finetune(model, subset, style_pool, params, None, 1, rng, frozen=True, method="hardness")
    frame = log.to_frame()
    grouped = frame.groupby("stage")["loss"]
    return pd.DataFrame({
        "stage": grouped.mean().index.astype(int),
        "mean_loss": grouped.mean().to_numpy(),
        "count": grouped.size().to_numpy(),
    })
