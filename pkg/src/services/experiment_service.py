"""
Experiment orchestrator service.

Runs the pipeline commands (generate data → pretrain → finetune → evaluate,
plus the ablation, hardness and multi-seed robustness diagnostics) against
one output directory.
Every command writes a manifest with the config fingerprint and the files it
produced.
"""

import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.autodiff.rng import Rng
from src.config.settings import ExperimentConfig
from src.curriculum.trainer import (
    curriculum_hardness,
    lscl_finetune,
    mixup_finetune,
    random_style_finetune,
    scl_finetune,
)
from src.evaluation.harness import EvalReport, compare_report, timed_records, write_report
from src.metrics.ranking import MetricTable
from src.models.sample import Dataset
from src.models.training import TrainLog
from src.segnet.checkpoint import load_checkpoint, save_checkpoint
from src.segnet.optim import init_sgd_momentum
from src.segnet.unet import UNetModel
from src.services.training_service import TrainingService
from src.stylegen.dataset import STYLE_POOL, TRAIN, load_dataset, make_dataset, vendor_split, write_dataset
from src.utils.file_utils import save_csv, save_json
from src.utils.logger import get_logger
from src.utils.paths import RunPaths

logger = get_logger(__name__)

BASELINE = "baseline"
FINETUNE_METHODS = ("lscl", "scl", "random-style", "mixup", "none")
ABLATION_METHODS = ("random-style", "scl", "lscl")
TTA_SUFFIX = "+tta"
UNSEEN_VENDORS = ("C", "D")
ROBUSTNESS_COLUMNS = ["seed", "method", "seen_dsc", "unseen_dsc", "ordering_holds"]
MIN_DSC_MARGIN = 0.02
# last-stage over first-stage curriculum loss
HARDNESS_GROWTH = 1.1


def parse_method(spec: str) -> Tuple[str, bool]:
    """'lscl+tta' → ('lscl', True); 'baseline' → ('baseline', False)."""
    if spec.endswith(TTA_SUFFIX):
        return spec[: -len(TTA_SUFFIX)], True
    return spec, False


class ExperimentService:
    """Orchestrate the experiment commands."""

    def __init__(self, config: ExperimentConfig, progress: bool = True,
                 dump_curriculum: bool = False, dump_predictions: bool = False):
        """
        Initialize experiment service.

        Args:
            config: Experiment configuration (output_dir selects the run directory)
            progress: Show progress bars
            dump_curriculum: Write curriculum samples z_i as PGM during finetuning
            dump_predictions: Write predicted label maps as PGM during evaluation
        """
        self.config = config
        self.paths = RunPaths(config.output_dir)
        self.progress = progress
        self.dump_curriculum = dump_curriculum
        self.dump_predictions = dump_predictions
        self.training = TrainingService(config, progress=progress)

        logger.info("🔬 Experiment Service Initialized")
        logger.info(f"  Output: {self.paths.root}")
        logger.info(f"  Seed: {config.seed}  Fingerprint: {config.fingerprint()[:12]}")

    # ---------------------------------------------------------------- helpers

    def _manifest(self, command: str, files: Sequence[Path], **extra) -> Path:
        payload = {
            "command": command,
            "fingerprint": self.config.fingerprint(),
            "seed": self.config.seed,
            "files": sorted(str(Path(f).relative_to(self.paths.root)) for f in files),
            **extra,
        }
        path = self.paths.manifest(command)
        save_json(payload, path)
        return path

    def load_split(self, split: str) -> Dataset:
        return load_dataset(self.paths.split_dir(split), split)

    def load_test(self) -> Dataset:
        """All test vendors concatenated in config order."""
        splits = [self.load_split(vendor_split(v)) for v in self.config.dataset.test_vendors]
        return Dataset.concat("test", splits)

    def load_model(self, name: str) -> UNetModel:
        path = self.paths.checkpoint(name)
        if not path.exists():
            hint = "pretrain" if name == BASELINE else f"finetune --method {name}"
            raise FileNotFoundError(f"❌ Checkpoint not found: {path}\n   Run `main.py {hint}` first")
        model, _ = load_checkpoint(path)
        return model

    def _write_train_log(self, log: TrainLog) -> Path:
        return save_csv(log.to_frame(), self.paths.train_log(log.method))

    # --------------------------------------------------------------- commands

    def cmd_gen_data(self) -> Dict[str, Dataset]:
        """
        Generate every split and write it under data/.

        Returns:
            Split tag → Dataset
        """
        logger.info("🚀 Generating synthetic benchmark")
        self.paths.ensure()
        logger.info("Step 1/2: Rendering samples...")
        datasets = make_dataset(self.config.dataset, self.config.seed, progress=self.progress)
        logger.info("\nStep 2/2: Writing splits...")
        files = []
        for split, data in datasets.items():
            split_dir = self.paths.split_dir(split)
            files.append(write_dataset(data, split_dir))
            logger.info(f"   ✅ {split}: {len(data)} samples ({', '.join(data.vendors)})")
        self._manifest("gen-data", files, splits={s: len(d) for s, d in datasets.items()})
        return datasets

    def cmd_pretrain(self) -> Tuple[UNetModel, float]:
        """
        Train the baseline on the seen-vendor training split.

        Returns:
            (baseline model, final train-split mean DSC)
        """
        logger.info("🚀 Pretraining baseline U-Net")
        self.paths.ensure()
        logger.info("Step 1/3: Loading training split...")
        train = self.load_split(TRAIN)

        logger.info("\nStep 2/3: Training with Adam...")
        model, opt, curve = self.training.pretrain(train)

        logger.info("\nStep 3/3: Saving checkpoint and loss curve...")
        files = [
            save_checkpoint(model, self.paths.checkpoint(BASELINE), opt),
            save_csv(curve.to_frame(), self.paths.logs_dir / "pretrain_loss.csv"),
        ]
        train_dsc = self.training.mean_dice(model, train)
        logger.info(f"   ✅ Train-split mean DSC: {train_dsc:.4f}")
        self._manifest("pretrain", files, train_dsc=round(train_dsc, 6), seconds=round(curve.seconds, 3))
        return model, train_dsc

    def finetune(self, method: str, baseline: UNetModel) -> Tuple[UNetModel, Optional[TrainLog]]:
        """Run one finetuning method from the baseline (no files written)."""
        if method not in FINETUNE_METHODS:
            raise ValueError(f"Unknown method '{method}'. Valid methods: {', '.join(FINETUNE_METHODS)}")
        if method == "none":
            return baseline.copy(), None

        schedule = self.config.finetune
        params = self.config.curriculum
        opt = init_sgd_momentum(baseline, lr=schedule.lr, momentum=schedule.momentum)
        # one stream for every method so they see the same order and styles
        rng = Rng(self.config.component_seed("finetune"))
        train = self.load_split(TRAIN)

        if method == "mixup":
            model, _, log = mixup_finetune(baseline, train, opt, schedule.epochs, rng,
                                           alpha=schedule.mixup_alpha,
                                           num_classes=self.config.model.num_classes,
                                           rotate=schedule.rotation_augment, clip_norm=schedule.clip_norm,
                                           progress=self.progress)
            return model, log

        pool = self.load_split(STYLE_POOL)
        options = {"rotate": schedule.rotation_augment, "clip_norm": schedule.clip_norm, "progress": self.progress}
        if self.dump_curriculum:
            options["dump_dir"] = self.paths.curriculum_dump_dir(method)
        runner = {"lscl": lscl_finetune, "scl": scl_finetune, "random-style": random_style_finetune}[method]
        model, _, log = runner(baseline, train, pool, params, opt, schedule.epochs, rng, **options)
        return model, log

    def cmd_finetune(self, method: str) -> UNetModel:
        """
        Finetune the baseline with ``method`` and save ``<method>.ckpt``.

        Args:
            method: One of FINETUNE_METHODS

        Returns:
            Finetuned model
        """
        if method not in FINETUNE_METHODS:
            raise ValueError(f"Unknown method '{method}'. Valid methods: {', '.join(FINETUNE_METHODS)}")
        logger.info(f"🚀 Finetuning baseline with '{method}'")
        self.paths.ensure()

        logger.info("Step 1/3: Loading baseline checkpoint...")
        baseline_path = self.paths.checkpoint(BASELINE)
        if not baseline_path.exists():
            raise FileNotFoundError(f"❌ Baseline checkpoint not found: {baseline_path}\n   Run `main.py pretrain` first")
        baseline, baseline_opt = load_checkpoint(baseline_path)

        logger.info("\nStep 2/3: Training...")
        model, log = self.finetune(method, baseline)

        logger.info("\nStep 3/3: Saving checkpoint and train log...")
        if method == "none":
            files = [save_checkpoint(model, self.paths.checkpoint(method), baseline_opt)]
        else:
            files = [save_checkpoint(model, self.paths.checkpoint(method)), self._write_train_log(log)]
            logger.info(f"   ✅ {len(log.entries)} curriculum steps in {log.seconds:.1f}s")
            logger.info(f"   📈 Mean loss per stage: {log.stage_means().round(4).to_dict()}")
        extra = {"seconds": round(log.seconds, 3)} if log is not None else {}
        self._manifest(f"finetune-{method}", files, method=method, **extra)
        return model

    def _score_methods(self, specs: Sequence[str], test: Dataset) -> Tuple[List[MetricTable], List[MetricTable], Dict[str, float]]:
        tables, phase_tables, timing = [], [], {}
        models: Dict[str, UNetModel] = {}
        for spec in specs:
            name, use_tta = parse_method(spec)
            if name not in models:
                models[name] = self.load_model(name)
            dump = self.paths.prediction_dump_dir(spec) if self.dump_predictions else None
            records, per_image = timed_records(models[name], test, use_tta, spec, dump, self.progress)
            tables.append(MetricTable.from_records(records, "vendor"))
            phase_tables.append(MetricTable.from_records(records, "phase"))
            timing[f"infer_seconds_per_image/{spec}"] = round(per_image, 6)
            logger.info(f"   ✅ {spec}: mean DSC {tables[-1].mean_over(spec, tables[-1].groups):.4f}")
        return tables, phase_tables, timing

    def available_methods(self, use_tta: bool) -> List[str]:
        """Baseline plus every finetuned checkpoint present, with TTA variants when requested."""
        found = [m for m in FINETUNE_METHODS if m != "none" and self.paths.checkpoint(m).exists()]
        specs = [BASELINE] + found
        if use_tta:
            specs += [m + TTA_SUFFIX for m in found]
        return specs

    def explicit_methods(self, methods: Sequence[str], use_tta: Optional[bool]) -> List[str]:
        """
        Method specs given on the command line, reconciled with an explicit TTA flag.

        Args:
            methods: Requested specs
            use_tta: True adds '+tta' variants of the finetuned methods; False rejects '+tta' specs

        Returns:
            Specs to evaluate, requested ones first

        Raises:
            ValueError: '+tta' specs requested together with use_tta=False
        """
        specs = list(methods)
        if use_tta is False:
            tta_specs = [s for s in specs if parse_method(s)[1]]
            if tta_specs:
                raise ValueError(f"--tta false conflicts with TTA method spec(s): {', '.join(tta_specs)}")
        elif use_tta:
            for spec in methods:
                name, with_tta = parse_method(spec)
                variant = name + TTA_SUFFIX
                if not with_tta and name != BASELINE and variant not in specs:
                    specs.append(variant)
        return specs

    def cmd_evaluate(self, methods: Optional[Sequence[str]] = None, use_tta: Optional[bool] = None,
                     notes: Optional[dict] = None, wall_clock: Optional[Dict[str, float]] = None) -> EvalReport:
        """
        Evaluate checkpoints on the test vendors and write the report.

        Args:
            methods: Method specs ('baseline', 'lscl', 'lscl+tta', ...); defaults to every checkpoint found
            use_tta: Add '+tta' variants (config default when None; with explicit methods
                only an explicit flag applies, see explicit_methods)
            notes: Extra entries for report.json
            wall_clock: Extra timing entries

        Returns:
            EvalReport
        """
        if methods:
            specs = self.explicit_methods(methods, use_tta)
        else:
            specs = self.available_methods(self.config.evaluation.use_tta if use_tta is None else use_tta)
        logger.info(f"🚀 Evaluating {len(specs)} method(s): {', '.join(specs)}")

        logger.info("Step 1/3: Loading test vendors...")
        test = self.load_test()

        logger.info("\nStep 2/3: Predicting and scoring...")
        tables, phase_tables, timing = self._score_methods(specs, test)

        logger.info("\nStep 3/3: Ranking and writing report...")
        report = compare_report(tables, self.config.fingerprint(), {**(wall_clock or {}), **timing}, phase_tables)
        report.notes.update(notes or {})
        files = write_report(report, self.paths.reports_dir)
        for row in report.scores.itertuples(index=False):
            logger.info(f"   {row.method:>16}: DSC {row.DSC_Score:.4f}  HD {row.HD_Score:.3f}  Min-max {row.MinMax_Score:.3f}")
        self._manifest("evaluate", files, methods=specs)
        return report

    def cmd_ablate(self) -> EvalReport:
        """
        Finetune every ablation method and evaluate them with the baseline and LSCL+TTA.

        Returns:
            Consolidated EvalReport (5 method rows)
        """
        started = time.perf_counter()
        logger.info("🚀 Running ablation")
        baseline = self.load_model(BASELINE)
        timing: Dict[str, float] = {}
        for k, method in enumerate(ABLATION_METHODS, start=1):
            logger.info(f"\nAblation {k}/{len(ABLATION_METHODS)}: {method}")
            model, log = self.finetune(method, baseline)
            save_checkpoint(model, self.paths.checkpoint(method))
            self._write_train_log(log)
            timing[f"train_seconds/{method}"] = round(log.seconds, 3)

        specs = [BASELINE, *ABLATION_METHODS, "lscl" + TTA_SUFFIX]
        report = self.cmd_evaluate(specs, wall_clock=timing)

        ordering = self.unseen_ordering(report)
        report.notes["unseen_vendor_dsc"] = ordering["dsc"]
        report.notes["ordering_holds"] = ordering["holds"]
        report.wall_clock["total_seconds"] = round(time.perf_counter() - started, 3)
        write_report(report, self.paths.reports_dir)

        verdict = "✅ holds" if ordering["holds"] else "⚠️  does not hold"
        logger.info(f"\n📊 Unseen-vendor ordering lscl+tta ≥ lscl ≥ scl ≥ random-style: {verdict}")
        for spec, value in ordering["dsc"].items():
            logger.info(f"   {spec:>16}: {value:.4f}")
        self._manifest("ablate", [self.paths.reports_dir / "report.json"], methods=specs,
                       ordering_holds=ordering["holds"])
        return report

    def unseen_ordering(self, report: EvalReport) -> dict:
        """Unseen-vendor mean DSC per method and whether lscl+tta ≥ lscl ≥ scl ≥ random-style."""
        vendors = [v for v in UNSEEN_VENDORS if v in report.table.groups]
        dsc = {m: round(report.table.mean_over(m, vendors), 6) for m in report.methods}
        chain = ["lscl" + TTA_SUFFIX, "lscl", "scl", "random-style"]
        present = [m for m in chain if m in dsc]
        holds = all(dsc[a] >= dsc[b] for a, b in zip(present, present[1:]))
        return {"dsc": dsc, "holds": holds}

    def cmd_hardness(self) -> pd.DataFrame:
        """
        Per-stage mean loss of curriculum samples under the frozen baseline, for several seeds.

        Returns:
            Frame with columns seed, stage, mean_loss, count
        """
        logger.info("🚀 Measuring curriculum hardness")
        self.paths.ensure()
        model = self.load_model(BASELINE)
        train, pool = self.load_split(TRAIN), self.load_split(STYLE_POOL)
        settings = self.config.evaluation

        frames = []
        for k, seed in enumerate(settings.hardness_seeds, start=1):
            logger.info(f"Step {k}/{len(settings.hardness_seeds)}: seed {seed}")
            rng = Rng(self.config.component_seed("hardness", seed))
            frame = curriculum_hardness(model, train, pool, self.config.curriculum, rng,
                                        count=settings.hardness_samples)
            logger.info(f"   Stage losses {[round(x, 4) for x in frame['mean_loss']]}")
            frames.append(frame.assign(seed=seed)[["seed", "stage", "mean_loss", "count"]])

        result = pd.concat(frames, ignore_index=True)
        verdict = hardness_verdict(result)
        path = save_csv(result, self.paths.reports_dir / "hardness.csv")
        summary = save_json(verdict, self.paths.reports_dir / "hardness_summary.json")

        logger.info(f"\n📊 Non-decreasing stage losses in {verdict['monotone_seeds']}/{verdict['seeds']} seeds "
                    f"(needs ⅔): {'✅' if verdict['monotone_holds'] else '⚠️ '}")
        logger.info(f"   Last/first stage loss ratios {verdict['growth']} "
                    f"(needs ≥ {HARDNESS_GROWTH} in every seed): {'✅' if verdict['growth_holds'] else '⚠️ '}")
        self._manifest("hardness", [path, summary], holds=verdict["holds"])
        return result

    def cmd_robustness(self, seeds: Optional[Sequence[int]] = None) -> pd.DataFrame:
        """
        Repeat gen-data → pretrain → ablate for several seeds and check the robustness trend.

        Each seed runs in ``seeds/seed_<s>`` with its own manifests; the per-seed
        seen / unseen DSC table and the verdicts land in this run's reports.

        Args:
            seeds: Seeds to run (config robustness_seeds when None)

        Returns:
            Frame with columns seed, method, seen_dsc, unseen_dsc, ordering_holds
        """
        seeds = list(seeds) if seeds else list(self.config.evaluation.robustness_seeds)
        logger.info(f"🚀 Robustness trend over seeds {seeds}")
        self.paths.ensure()
        started = time.perf_counter()

        rows = []
        for k, seed in enumerate(seeds, start=1):
            logger.info(f"\n{'=' * 60}\nSeed {k}/{len(seeds)}: {seed}\n{'=' * 60}")
            seed_config = self.config.with_overrides(seed=seed, output_dir=str(self.paths.seed_dir(seed)))
            runner = ExperimentService(seed_config, progress=self.progress)
            runner.cmd_gen_data()
            runner.cmd_pretrain()
            report = runner.cmd_ablate()
            rows.extend(runner.seed_rows(seed, report))

        frame = pd.DataFrame(rows, columns=ROBUSTNESS_COLUMNS)
        verdict = robustness_verdict(frame)
        verdict["total_seconds"] = round(time.perf_counter() - started, 3)
        files = [
            save_csv(frame, self.paths.reports_dir / "robustness.csv"),
            save_json(verdict, self.paths.reports_dir / "robustness.json"),
        ]

        logger.info(f"\n📊 Robustness over {len(seeds)} seed(s)")
        logger.info(f"   (a) baseline seen − unseen DSC {verdict['baseline_drop']:+.4f} "
                    f"(needs ≥ {MIN_DSC_MARGIN}): {'✅' if verdict['drop_holds'] else '⚠️ '}")
        logger.info(f"   (b) lscl − baseline unseen DSC {verdict['lscl_gain']:+.4f} "
                    f"(needs ≥ {MIN_DSC_MARGIN}): {'✅' if verdict['gain_holds'] else '⚠️ '}")
        logger.info(f"   (c) ordering lscl+tta ≥ lscl ≥ scl ≥ random-style in {verdict['ordering_seeds']}/{len(seeds)} "
                    f"seeds (needs ⅔): {'✅' if verdict['ordering_holds'] else '⚠️ '}")
        self._manifest("robustness", files, seeds=seeds, holds=verdict["holds"])
        return frame

    def seed_rows(self, seed: int, report: EvalReport) -> List[dict]:
        """Seen / unseen mean DSC per method of one seed's ablation report."""
        seen = [v for v in self.config.dataset.train_vendors if v in report.table.groups]
        ordering = self.unseen_ordering(report)
        return [
            {
                "seed": seed,
                "method": method,
                "seen_dsc": round(report.table.mean_over(method, seen), 6),
                "unseen_dsc": ordering["dsc"][method],
                "ordering_holds": ordering["holds"],
            }
            for method in report.methods
        ]


def _two_thirds(count: int, total: int) -> bool:
    return 3 * count >= 2 * total


def hardness_verdict(frame: pd.DataFrame) -> dict:
    """
    Check the hardness trend of a per-seed, per-stage loss frame.

    The stage losses must be non-decreasing in at least two thirds of the seeds,
    and the last stage must exceed the first by HARDNESS_GROWTH in every seed.

    Args:
        frame: Columns seed, stage, mean_loss

    Returns:
        Verdict dict (JSON-serialisable)
    """
    monotone, growth = 0, {}
    for seed, group in frame.sort_values(["seed", "stage"]).groupby("seed", sort=True):
        losses = group["mean_loss"].to_numpy()
        monotone += bool(np.all(np.diff(losses) >= 0.0))
        growth[str(int(seed))] = round(float(losses[-1] / losses[0]), 6)
    seeds = len(growth)
    monotone_holds = _two_thirds(monotone, seeds)
    growth_holds = all(ratio >= HARDNESS_GROWTH for ratio in growth.values())
    return {
        "seeds": seeds,
        "monotone_seeds": monotone,
        "monotone_holds": monotone_holds,
        "growth": growth,
        "growth_holds": growth_holds,
        "holds": monotone_holds and growth_holds,
    }


def robustness_verdict(frame: pd.DataFrame) -> dict:
    """
    Check the robustness trend on a per-seed table of seen / unseen DSC.

    Seed-averaged baseline must lose MIN_DSC_MARGIN DSC on the unseen vendors,
    seed-averaged LSCL must gain MIN_DSC_MARGIN over the baseline there, and the
    method ordering must hold in at least two thirds of the seeds.

    Args:
        frame: Columns seed, method, seen_dsc, unseen_dsc, ordering_holds

    Returns:
        Verdict dict (JSON-serialisable)

    Raises:
        ValueError: Baseline or LSCL rows are missing
    """
    means = frame.groupby("method")[["seen_dsc", "unseen_dsc"]].mean()
    missing = [m for m in (BASELINE, "lscl") if m not in means.index]
    if missing:
        raise ValueError(f"Robustness table lacks method(s): {missing}")
    per_seed = frame.groupby("seed")["ordering_holds"].first()
    drop = float(means.loc[BASELINE, "seen_dsc"] - means.loc[BASELINE, "unseen_dsc"])
    gain = float(means.loc["lscl", "unseen_dsc"] - means.loc[BASELINE, "unseen_dsc"])
    ordering = int(per_seed.sum())
    verdict = {
        "seeds": [int(s) for s in per_seed.index],
        "mean_unseen_dsc": {m: round(float(v), 6) for m, v in means["unseen_dsc"].items()},
        "mean_seen_dsc": {m: round(float(v), 6) for m, v in means["seen_dsc"].items()},
        "baseline_drop": round(drop, 6),
        "drop_holds": drop >= MIN_DSC_MARGIN,
        "lscl_gain": round(gain, 6),
        "gain_holds": gain >= MIN_DSC_MARGIN,
        "ordering_seeds": ordering,
        "ordering_holds": _two_thirds(ordering, len(per_seed)),
    }
    verdict["holds"] = verdict["drop_holds"] and verdict["gain_holds"] and verdict["ordering_holds"]
    return verdict
