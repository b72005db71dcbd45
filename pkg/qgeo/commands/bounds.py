import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from qgeo.commands import EXIT_OK, emit, parse_names, parse_numbers, resolve_tolerances
from qgeo.core.config import Tolerances, settings
from qgeo.core.errors import MalformedInput, NotHermitian
from qgeo.models.geometry import GeometryContext
from qgeo.models.state import Spectrum, make_density_state, make_spectrum, purify
from qgeo.models.uncertainty import decomposition
from qgeo.schemas import BoundReport, BoundsOutput, ObservableFile, SpectrumPayload, StateFile
from qgeo.utils.codec import decode_matrix, load_model, matrix_digest
from qgeo.utils.matrix import check_hermitian

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("bounds", help="bound reports for observable pairs at a state")
    parser.add_argument("--state", required=True, help="JSON state file (rho, declared spectrum, optional hbar)")
    parser.add_argument("--observables", required=True, help="JSON file mapping names to matrices")
    parser.add_argument("--pairs", required=True, help='comma separated pairs, e.g. "A:B,C:D"')
    add_spectrum_arguments(parser)
    parser.add_argument("--hbar", type=float, help="override the hbar of the state file")
    parser.add_argument("--tol-scale", type=float, default=settings.TOL_SCALE)
    parser.add_argument("--out", help="path of the JSON report")
    parser.set_defaults(handler=run)


def add_spectrum_arguments(parser) -> None:
    parser.add_argument("--spectrum-values", help="declared spectrum values; override the spectrum in the state file")
    parser.add_argument("--spectrum-mults", help="multiplicities for --spectrum-values")


def resolve_spectrum(
    declared: Optional[SpectrumPayload],
    values: Optional[str],
    mults: Optional[str],
) -> Spectrum:
    """The declared spectrum; flags win over the state file and one of them is required."""
    if values is not None:
        parsed = parse_numbers(values, "--spectrum-values")
        counts = [int(m) for m in parse_numbers(mults, "--spectrum-mults")] if mults else [1] * len(parsed)
        return make_spectrum(parsed, counts)
    if mults is not None:
        raise MalformedInput("--spectrum-mults needs --spectrum-values")
    if declared is not None:
        return make_spectrum(declared.values, declared.mults)
    raise MalformedInput("state file declares no spectrum; pass --spectrum-values and --spectrum-mults", subject="spectrum")


def load_observables(doc: ObservableFile, tol: Tolerances) -> Dict[str, np.ndarray]:
    observables = {}
    for name, payload in doc.observables.items():
        matrix = decode_matrix(payload, subject=name)
        try:
            observables[name] = check_hermitian(matrix, tol=tol.herm, subject=name)
        except NotHermitian as exc:
            raise NotHermitian("obs", subject=name) from exc
    return observables


def parse_pairs(text: str, known: Dict[str, np.ndarray]) -> List[Tuple[str, str]]:
    pairs = []
    for token in parse_names(text):
        names = token.split(":")
        if len(names) != 2 or not all(names):
            raise MalformedInput(f"pair {token!r} is not of the form A:B", subject="--pairs")
        for name in names:
            if name not in known:
                raise MalformedInput("unknown observable", subject=name)
        pairs.append((names[0], names[1]))
    if not pairs:
        raise MalformedInput("no pairs given", subject="--pairs")
    return pairs


def print_reports(reports: Dict[str, BoundReport]) -> None:
    print(f"{'pair':<12} {'dA*dB':>12} {'geo':>12} {'rs':>12} {'combined':>12}  winner")
    for label, report in reports.items():
        print(
            f"{label:<12} {report.product:>12.6g} {report.geo_bound:>12.6g} "
            f"{report.rs_bound:>12.6g} {report.combined_bound:>12.6g}  {report.winner.value}"
        )


def run(args) -> int:
    tol = resolve_tolerances(args.tol_scale)
    state_doc = load_model(args.state, StateFile)
    obs_doc = load_model(args.observables, ObservableFile)

    rho = decode_matrix(state_doc.rho, subject="rho")
    sigma = resolve_spectrum(state_doc.spectrum, args.spectrum_values, args.spectrum_mults)
    state = make_density_state(rho, sigma, tol)
    ctx = GeometryContext(sigma, args.hbar if args.hbar is not None else state_doc.hbar, tol)
    frame = purify(state, tol)
    observables = load_observables(obs_doc, tol)
    rho_digest = matrix_digest(state.rho)

    reports: Dict[str, BoundReport] = {}
    for a, b in parse_pairs(args.pairs, observables):
        inputs = {
            "rho_sha256": rho_digest,
            "A": a,
            "B": b,
            "A_sha256": matrix_digest(observables[a]),
            "B_sha256": matrix_digest(observables[b]),
        }
        reports[f"{a}:{b}"] = decomposition(observables[a], observables[b], frame, ctx, inputs=inputs)
        logger.info(f"bounds {a}:{b}: winner {reports[f'{a}:{b}'].winner.value}")

    print_reports(reports)
    emit(BoundsOutput(pairs=reports), args.out)
    return EXIT_OK
