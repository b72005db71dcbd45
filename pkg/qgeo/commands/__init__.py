"""Subcommand handlers; each module registers one subparser whose handler returns an exit code."""
from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel

from qgeo.core.config import Tolerances, settings
from qgeo.core.errors import MalformedInput
from qgeo.utils.codec import write_model

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFICATION = 2


def resolve_tolerances(scale: Optional[float] = None) -> Tolerances:
    """Default tolerances scaled by the flag value, or by QGEO_TOL_SCALE when the flag is unset."""
    if scale is not None and not scale > 0:
        raise MalformedInput(f"tolerance scale must be positive, got {scale!r}")
    return settings.tolerances(scale)


def parse_numbers(text: str, subject: str) -> List[float]:
    """Comma separated reals; fractions such as ``1/2`` are accepted."""
    try:
        return [float(Fraction(token.strip())) for token in text.split(",") if token.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"cannot parse {text!r} as a list of numbers", subject=subject) from exc


def parse_number(text: str, subject: str) -> float:
    values = parse_numbers(text, subject)
    if len(values) != 1:
        raise MalformedInput(f"expected one number, got {text!r}", subject=subject)
    return values[0]


def parse_names(text: str) -> List[str]:
    return [token.strip() for token in text.split(",") if token.strip()]


def emit(model: BaseModel, out: Optional[str]) -> None:
    if out:
        write_model(out, model)
