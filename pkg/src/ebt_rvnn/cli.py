#!/usr/bin/env python3
"""
Command Line Interface for ebt-rvnn
"""

import argparse
import sys
from typing import List, Optional

from .app import EBTApp, EXIT_FAILED
from .core.search import MODES
from .config.settings import MODEL_VARIANTS
from .errors import ConfigError, EBTError
from .utils.logging import setup_logging
from . import __version__

EXIT_USAGE = 1


class UsageExitParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def create_parser() -> argparse.ArgumentParser:
    """Create command line argument parser"""
    parser = UsageExitParser(
        prog="ebt-rvnn",
        description="Beam tree recursive neural networks on ListOps: training, checks and memory benchmarks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  ebt-rvnn gen --out data                      # write train/val/test splits
  ebt-rvnn train --variant ebt-grc --data data # train and save a checkpoint
  ebt-rvnn eval --checkpoint checkpoints/ebt-grc.ckpt --data data
  ebt-rvnn bench --lengths 50,100,200          # peak retained scalars per variant
  ebt-rvnn gradcheck                           # finite-difference suite
  ebt-rvnn oracle --n 4 --k 6 --seed 1         # beam search vs every merge order
        """
    )

    parser.add_argument("--config", type=str, default=None,
                        help="Path to a key = value configuration file")
    parser.add_argument("--seed", type=int, default=None,
                        help="Seed for every random stream (overrides the config file)")
    parser.add_argument("--out", type=str, default=None,
                        help="Output path of the subcommand (directory or checkpoint file)")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        default=None, help="Set logging level (default: log_level from the config, else INFO)")
    parser.add_argument("--debug", action="store_true",
                        help="Enable debug mode with verbose console logging")
    parser.add_argument("--no-color", action="store_true", help="Disable colored output")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=UsageExitParser)
    sub.required = True

    sub.add_parser("gen", help="Generate ListOps dataset splits")

    train = sub.add_parser("train", help="Train a model variant")
    train.add_argument("--data", default="data", help="Dataset directory (default: data)")
    train.add_argument("--variant", choices=MODEL_VARIANTS, help="Model variant (overrides model.variant)")
    train.add_argument("--epochs", type=int, help="Epochs (overrides train.epochs)")

    evaluate = sub.add_parser("eval", help="Evaluate a checkpoint on every held-out split")
    evaluate.add_argument("--checkpoint", required=True, help="Checkpoint file")
    evaluate.add_argument("--data", default="data", help="Dataset directory (default: data)")

    bench = sub.add_parser("bench", help="Activation memory and time benchmark")
    bench.add_argument("--lengths", help="Comma-separated sequence lengths")
    bench.add_argument("--variants", help="Comma-separated bench variants")
    bench.add_argument("--repetitions", type=int, help="Repetitions per cell")

    sub.add_parser("gradcheck", help="Finite-difference gradient suite")

    oracle = sub.add_parser("oracle", help="Compare beam search with exhaustive enumeration")
    oracle.add_argument("--n", type=int, default=4, help="Sequence length (<= 6)")
    oracle.add_argument("--k", type=int, default=6, help="Beam size")
    oracle.add_argument("--mode", choices=MODES, default="disentangled", help="Scorer mode")

    return parser


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv`` and run one subcommand; returns the exit code"""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = create_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    setup_logging(level=args.log_level or "INFO", debug=args.debug, no_color=args.no_color)

    try:
        app = EBTApp(config_path=args.config, seed=args.seed, out=args.out,
                     debug_mode=args.debug, no_color=args.no_color)
        # the flag wins over the config file
        if args.log_level is None and app.config.log_level.upper() != "INFO":
            setup_logging(level=app.config.log_level, debug=args.debug, no_color=args.no_color)
        if args.command == "gen":
            return app.run_gen()
        if args.command == "train":
            return app.run_train(args.data, args.variant, args.epochs)
        if args.command == "eval":
            return app.run_eval(args.checkpoint, args.data)
        if args.command == "bench":
            return app.run_bench(args.lengths, args.variants, args.repetitions)
        if args.command == "gradcheck":
            return app.run_gradcheck()
        return app.run_oracle(args.n, args.k, args.mode)

    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (EBTError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        if args.debug:
            import traceback
            traceback.print_exc()
        return EXIT_FAILED
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return EXIT_FAILED


def main():
    """Main entry point for the CLI"""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
