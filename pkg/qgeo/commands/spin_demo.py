import logging

from qgeo.commands import EXIT_OK, EXIT_VERIFICATION, emit, parse_number, parse_numbers, resolve_tolerances
from qgeo.core.config import settings
from qgeo.models.spin import abcd_experiment, ensemble_context, make_ensemble_spec
from qgeo.schemas import DemoReport

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("spin-demo", help="four-observable experiment on a spin ensemble")
    parser.add_argument("--s", default="1", help="spin, e.g. 1 or 3/2")
    parser.add_argument("--p", default="0.7,0.3", help="descending weights")
    parser.add_argument("--m", default="1,0", help="magnetic quantum numbers paired with --p")
    parser.add_argument("--eps", default="0.25")
    parser.add_argument("--hbar", type=float, default=settings.HBAR)
    parser.add_argument("--tol-scale", type=float, default=settings.TOL_SCALE)
    parser.add_argument("--out", help="path of the JSON report")
    parser.set_defaults(handler=run)


def print_report(report: DemoReport) -> None:
    print(f"{'pair':<6} {'dA*dB':>12} {'geo':>12} {'rs':>12}  winner")
    for label, pair in report.pairs.items():
        print(f"{label:<6} {pair.product:>12.6g} {pair.geo_bound:>12.6g} {pair.rs_bound:>12.6g}  {pair.winner.value}")
    window = report.window
    print(f"window: {window.lower:g} < {window.middle:.6g} < {window.upper:.6g} {'holds' if window.holds else 'violated'}")
    print(f"dSx*dSy = {report.sista.lhs:.6g} >= {report.sista.rhs:.6g}: {report.sista.holds}")


def run(args) -> int:
    tol = resolve_tolerances(args.tol_scale)
    spec = make_ensemble_spec(
        parse_number(args.s, "--s"),
        parse_numbers(args.m, "--m"),
        parse_numbers(args.p, "--p"),
    )
    eps = parse_number(args.eps, "--eps")
    report = abcd_experiment(spec, eps, ensemble_context(spec, args.hbar, tol))
    print_report(report)
    emit(report, args.out)
    if not report.sista.holds or (report.window.holds and not report.predicted_winners):
        logger.error("spin demo contradicted the predicted bound ordering")
        return EXIT_VERIFICATION
    return EXIT_OK
