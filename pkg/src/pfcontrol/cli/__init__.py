import argparse
import sys
from collections.abc import Sequence

import structlog

from pfcontrol.config import load_run_config
from pfcontrol.errors import (
    BlowUpError,
    ConfigError,
    InvalidSpecError,
    UnknownScenarioError,
)
from pfcontrol.logs import configure_logging
from .commands import (
    EXIT_BLOW_UP,
    EXIT_CONFIG,
    cmd_gradcheck,
    cmd_list,
    cmd_run,
)

logger = structlog.get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfcontrol",
        description="Optimal boundary temperature control of solidification.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--scenario", help="preset name, see `list`")
    shared.add_argument("--config", help="flat `section.key = value` file")
    shared.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a configuration value (repeatable)",
    )
    shared.add_argument("--log-level", dest="log_level")

    run = commands.add_parser(
        "run", parents=[shared], help="optimize a scenario"
    )
    run.add_argument("--output", help="output directory")
    run.add_argument(
        "--snapshot-times",
        dest="snapshot_times",
        help="comma separated times to export full fields at",
    )

    gradcheck = commands.add_parser(
        "gradcheck",
        parents=[shared],
        help="compare the adjoint gradient with finite differences",
    )
    gradcheck.add_argument("--directions", type=int)
    gradcheck.add_argument("--h", type=float)
    gradcheck.add_argument("--seed", type=int)

    commands.add_parser("list", help="list the shipped scenarios")
    return parser


def _flag_overrides(args: argparse.Namespace) -> list[str]:
    # command line flags are sugar for overrides and win over --override
    flags = {
        "scenario": "scenario",
        "log_level": "log_level",
        "output": "output.directory",
        "snapshot_times": "output.snapshot_times",
        "directions": "gradcheck.directions",
        "h": "gradcheck.h",
        "seed": "gradcheck.seed",
    }
    return [
        f"{key}={getattr(args, name)}"
        for name, key in flags.items()
        if getattr(args, name, None) is not None
    ]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return cmd_list()

    try:
        config = load_run_config(
            args.config, [*args.override, *_flag_overrides(args)]
        )
        configure_logging(config.log_level)
        if args.command == "run":
            return cmd_run(config)
        return cmd_gradcheck(config)
    except (ConfigError, InvalidSpecError, UnknownScenarioError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        logger.error("solver_blew_up", solver=exc.solver, level=exc.level)
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_BLOW_UP


__all__ = ["build_parser", "main"]
