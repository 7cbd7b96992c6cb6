"""Command-line entry point: ``els run|sweep|verify|analyze --config <path>``."""

import argparse
from typing import List, Optional

from config.settings import settings
from src.cli.commands import COMMANDS, EXIT_CONFIG, EXIT_DIVERGED
from src.cli.config import load_config
from src.utils.logging_config import get_logger
from src.utils.validators import DivergenceError, ValidationError

logger = get_logger(__name__)

DESCRIPTIONS = {
    "run": "Integrate the configured system and write snapshots and diagnostics",
    "sweep": "Run the product of the sweep lists concurrently",
    "verify": "Run the property checks against a fresh run",
    "analyze": "Detect energy concentration and fit harmonic profiles",
}


def _dispatch(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    return COMMANDS[args.command](config, out=args.out, seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="els",
        description="Axisymmetric Poiseuille flow of the hyperbolic Ericksen-Leslie system",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in DESCRIPTIONS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="Path to the JSON run configuration")
        sub.add_argument("--out", default=None, help="Output directory (overrides the config)")
        sub.add_argument(
            "--seed",
            type=int,
            default=settings.default_seed,
            help="Seed for noise fixtures",
        )
        sub.set_defaults(func=_dispatch)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except DivergenceError as e:
        logger.error(f"Diverged: {e}")
        return EXIT_DIVERGED
    except ValidationError as e:
        logger.error(f"{e.code}: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
