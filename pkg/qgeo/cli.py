"""Command-line front-end: ``qgeo verify | bounds | spin-demo | evolve``.

Exit codes: 0 success, 1 input or configuration error, 2 verification failure.
"""
import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from qgeo.commands import EXIT_INPUT, EXIT_VERIFICATION, bounds, emit, evolve, spin_demo, verify
from qgeo.core.config import settings
from qgeo.core.errors import InputError, MalformedInput, QGeoError, VerificationError
from qgeo.core.logger import setup_logging
from qgeo.schemas import ErrorResponse

logger = logging.getLogger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; here they are input errors."""

    def error(self, message):
        raise MalformedInput(message)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog=settings.PROJECT_NAME, description="Geometry of isospectral density-operator orbits")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)
    parser.add_argument("--log-file", default=settings.LOG_FILE)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (verify, bounds, spin_demo, evolve):
        command.register(subparsers)
    return parser


def _fail(code: str, message: str, out: Optional[str], status: int) -> int:
    print(f"{code}: {message}" if not message.startswith(code) else message, file=sys.stderr)
    try:
        emit(ErrorResponse(message=message, error_code=code), out)
    except OSError as exc:
        logger.error(f"could not write error report to {out}: {exc}")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = None
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level, args.log_file)
        logger.info(f"{settings.PROJECT_NAME} {settings.VERSION}: {args.command}")
        return args.handler(args)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        return _fail("ConfigError", f"{where}: {first['msg']}", getattr(args, "out", None), EXIT_INPUT)
    except InputError as exc:
        return _fail(exc.code, str(exc), getattr(args, "out", None), EXIT_INPUT)
    except VerificationError as exc:
        return _fail(exc.code, str(exc), getattr(args, "out", None), EXIT_VERIFICATION)
    except QGeoError as exc:
        return _fail(exc.code, str(exc), getattr(args, "out", None), EXIT_INPUT)
