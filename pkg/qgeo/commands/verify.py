import logging

from qgeo.commands import EXIT_OK, EXIT_VERIFICATION, emit, resolve_tolerances
from qgeo.core.config import settings
from qgeo.schemas import RunConfig, VerifySummary
from qgeo.verification import run_campaign

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="run the randomized property suites")
    parser.add_argument("--seed", type=int, default=settings.SEED)
    parser.add_argument("--trials", type=int, default=settings.TRIALS)
    parser.add_argument("--dim-max", type=int, default=settings.DIM_MAX)
    parser.add_argument("--hbar", type=float, default=settings.HBAR)
    parser.add_argument("--tol-scale", type=float, default=settings.TOL_SCALE)
    parser.add_argument("--workers", type=int, default=1, help="threads for independent trials")
    parser.add_argument("--out", help="path of the JSON summary")
    parser.set_defaults(handler=run)


def print_summary(summary: VerifySummary) -> None:
    print(f"{'suite':<16} {'pass':>6} {'fail':>6} {'worst residual':>16}  gating")
    for name, result in summary.suites.items():
        print(f"{name:<16} {result.passed:>6} {result.failed:>6} {result.worst_residual:>16.3e}  {'yes' if result.gating else 'no'}")
    print("all passed" if summary.all_passed else "FAILED")


def run(args) -> int:
    cfg = RunConfig(
        seed=args.seed,
        trials=args.trials,
        dim_max=args.dim_max,
        hbar=args.hbar,
        tol_scale=args.tol_scale,
        workers=args.workers,
        out=args.out,
    )
    tol = resolve_tolerances(cfg.tol_scale)
    logger.info(f"verify: seed={cfg.seed} trials={cfg.trials} dim_max={cfg.dim_max} hbar={cfg.hbar:g} workers={cfg.workers}")
    summary = run_campaign(cfg, tol)
    print_summary(summary)
    emit(summary, cfg.out)
    logger.info(f"verify finished: {'all suites passed' if summary.all_passed else 'suite failures'}")
    return EXIT_OK if summary.all_passed else EXIT_VERIFICATION
