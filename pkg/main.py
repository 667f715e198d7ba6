#!/usr/bin/env python3
"""
Command-line entry point for the local style curriculum experiments.

Usage:
    python main.py gen-data  [--config PATH] [--seed N] [--out DIR]
    python main.py pretrain  [--config PATH] [--seed N] [--out DIR]
    python main.py finetune  --method {lscl,scl,random-style,mixup,none} [--dump-curriculum]
    python main.py evaluate  [--methods baseline lscl lscl+tta] [--tta BOOL] [--dump-predictions]
    python main.py ablate    [--config PATH]
    python main.py hardness  [--config PATH]
    python main.py robustness [--seeds 0 1 2]
    python main.py init-config PATH

Exit codes: 0 success, 2 bad arguments or configuration, 3 missing inputs,
4 numeric failure (non-finite loss).
"""

import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv

from src.config.settings import ExperimentConfig, get_settings
from src.services.experiment_service import FINETUNE_METHODS, ExperimentService
from src.utils.errors import CheckpointFormatError, NonFiniteError
from src.utils.logger import get_logger, setup_logging
from src.utils.paths import RunPaths, get_log_file_path

# Load environment variables (logging knobs only)
load_dotenv()

logger = get_logger(__name__)

EXIT_OK, EXIT_BAD_ARGS, EXIT_MISSING, EXIT_NUMERIC = 0, 2, 3, 4


def str_to_bool(value: str) -> bool:
    """Parse --tta values such as true/false, 1/0, yes/no."""
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got '{value}'")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-command per pipeline step."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment config JSON (defaults are used when omitted)")
    common.add_argument("--seed", type=int, help="Override the global seed")
    common.add_argument("--out", help="Override the output directory")
    common.add_argument("--no-progress", action="store_true", help="Disable progress bars")

    parser = argparse.ArgumentParser(description="Local style curriculum learning for robust segmentation")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("gen-data", parents=[common], help="Generate the synthetic multi-vendor benchmark")
    commands.add_parser("pretrain", parents=[common], help="Train the baseline U-Net")

    finetune = commands.add_parser("finetune", parents=[common], help="Finetune the baseline")
    finetune.add_argument("--method", required=True, choices=FINETUNE_METHODS)
    finetune.add_argument("--dump-curriculum", action="store_true", help="Write curriculum samples as PGM")

    evaluate = commands.add_parser("evaluate", parents=[common], help="Evaluate checkpoints and rank them")
    evaluate.add_argument("--methods", nargs="+", help="Method specs, e.g. baseline lscl lscl+tta")
    evaluate.add_argument("--tta", type=str_to_bool, help="Add rotation-TTA variants (true/false)")
    evaluate.add_argument("--dump-predictions", action="store_true", help="Write predictions as PGM")

    commands.add_parser("ablate", parents=[common], help="Finetune and evaluate every ablation method")
    commands.add_parser("hardness", parents=[common], help="Per-stage loss of curriculum samples")
    robustness = commands.add_parser("robustness", parents=[common],
                                     help="Repeat gen-data, pretrain and ablate over several seeds")
    robustness.add_argument("--seeds", type=int, nargs="+", help="Seeds to run (config robustness_seeds by default)")

    init = commands.add_parser("init-config", help="Write the default config as JSON")
    init.add_argument("path", help="Destination JSON path")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults) with command-line overrides applied."""
    config = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    return config.with_overrides(seed=args.seed, output_dir=args.out, use_tta=getattr(args, "tta", None))


def dispatch(args: argparse.Namespace) -> None:
    """Run the selected command."""
    if args.command == "init-config":
        path = ExperimentConfig().to_json(args.path)
        logger.info(f"✅ Default configuration written to {path}")
        return

    config = load_config(args)
    settings = get_settings()
    if settings.log_file == "auto":
        setup_logging(settings.log_level, str(get_log_file_path(RunPaths(config.output_dir).logs_dir)))

    service = ExperimentService(
        config,
        progress=settings.progress and not args.no_progress,
        dump_curriculum=getattr(args, "dump_curriculum", False),
        dump_predictions=getattr(args, "dump_predictions", False),
    )
    if args.command == "gen-data":
        service.cmd_gen_data()
    elif args.command == "pretrain":
        service.cmd_pretrain()
    elif args.command == "finetune":
        service.cmd_finetune(args.method)
    elif args.command == "evaluate":
        service.cmd_evaluate(args.methods, args.tta)
    elif args.command == "ablate":
        service.cmd_ablate()
    elif args.command == "hardness":
        service.cmd_hardness()
    elif args.command == "robustness":
        service.cmd_robustness(args.seeds)


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and map failures to exit codes.

    Args:
        argv: Arguments without the program name (sys.argv when None)

    Returns:
        Process exit code
    """
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_file if settings.log_file != "auto" else None)

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_BAD_ARGS

    try:
        dispatch(args)
    except NonFiniteError as e:
        logger.error(f"❌ Numeric failure: {e}")
        return EXIT_NUMERIC
    except FileNotFoundError as e:
        logger.error(f"{e}")
        return EXIT_MISSING
    except CheckpointFormatError as e:
        logger.error(f"❌ Unreadable checkpoint: {e}")
        return EXIT_MISSING
    except ValueError as e:
        logger.error(f"❌ {e}")
        return EXIT_BAD_ARGS
    except Exception as e:
        logger.error(f"❌ Unexpected error: {e}", exc_info=True)
        raise
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
