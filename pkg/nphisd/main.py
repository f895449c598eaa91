# nphisd/main.py

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__
from .commands import convergence, landscape, search, spectrum, verify
from .commands.common import EXIT_ERROR
from .config import settings
from .exceptions import ConfigError, NPHiSDError

logger = logging.getLogger("nphisd")

COMMANDS = {
    "search": (search.run, "upward search from the seed to an index-k saddle"),
    "landscape": (landscape.run, "solution landscape up to landscape.max_index"),
    "convergence": (convergence.run, "step-halving study of the semi-implicit scheme"),
    "verify": (verify.run, "finite-difference and invariance checks of a model"),
    "spectrum": (spectrum.run, "smallest Hessian eigenvalues at the seed"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nphisd",
        description="Nullspace-preserving high-index saddle dynamics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    # flags shared by every subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="parallel downward searches (default 1)")
    common.add_argument("--seed", type=int, default=None, help="random seed (overrides landscape.seed)")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, summary) in COMMANDS.items():
        p = sub.add_parser(name, help=summary, parents=[common])
        target = "MODEL|CONFIG" if name == "verify" else "CONFIG"
        p.add_argument("config", metavar=target)
    return parser


def configure_logging(level: Optional[str]) -> None:
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format=settings.LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    if args.jobs is not None and args.jobs < 1:
        logger.error("--jobs must be at least 1")
        return EXIT_ERROR
    if args.seed is not None and args.seed < 0:
        logger.error("--seed must be non-negative")
        return EXIT_ERROR

    handler, _ = COMMANDS[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        logger.error("%s", exc)
    except NPHiSDError as exc:
        logger.error("%s failed: %s", args.command, exc)
    except (ValueError, OSError) as exc:
        logger.error("%s: %s", args.command, exc)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
