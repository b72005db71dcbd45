import logging

from qgeo.commands import EXIT_OK, EXIT_VERIFICATION, emit, parse_names, resolve_tolerances
from qgeo.commands.bounds import add_spectrum_arguments, load_observables, resolve_spectrum
from qgeo.core.config import settings
from qgeo.core.errors import MalformedInput
from qgeo.models.geometry import GeometryContext
from qgeo.models.state import make_density_state
from qgeo.models.uncertainty import evolve
from qgeo.schemas import EvolutionReport, MatrixPayload, ObservableFile, StateFile
from qgeo.utils.codec import decode_matrix, load_model

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("evolve", help="von Neumann trajectory with spectrum and flow checks")
    parser.add_argument("--state", required=True, help="JSON state file")
    parser.add_argument("--hamiltonian", required=True, help="JSON matrix file")
    add_spectrum_arguments(parser)
    parser.add_argument("--observables", help="JSON file with the probe observables")
    parser.add_argument("--probes", default="", help="comma separated observable names")
    parser.add_argument("--t", type=float, default=1.0)
    parser.add_argument("--steps", type=int, default=100)
    parser.add_argument("--hbar", type=float)
    parser.add_argument("--tol-scale", type=float, default=settings.TOL_SCALE)
    parser.add_argument("--out", help="path of the JSON report")
    parser.set_defaults(handler=run)


def run(args) -> int:
    tol = resolve_tolerances(args.tol_scale)
    state_doc = load_model(args.state, StateFile)
    rho = decode_matrix(state_doc.rho, subject="rho")
    sigma = resolve_spectrum(state_doc.spectrum, args.spectrum_values, args.spectrum_mults)
    state = make_density_state(rho, sigma, tol)
    hamiltonian = decode_matrix(load_model(args.hamiltonian, MatrixPayload), subject="H")

    names = parse_names(args.probes)
    probes = {}
    if names:
        if not args.observables:
            raise MalformedInput("--probes needs --observables")
        known = load_observables(load_model(args.observables, ObservableFile), tol)
        for name in names:
            if name not in known:
                raise MalformedInput("unknown observable", subject=name)
            probes[name] = known[name]

    ctx = GeometryContext(sigma, args.hbar if args.hbar is not None else state_doc.hbar, tol)
    trajectory = evolve(hamiltonian, state, args.t, args.steps, ctx, probes=probes)
    ok = trajectory.max_drift <= tol.drift and trajectory.max_residual <= tol.evolve_residual
    if not ok:
        logger.error(f"evolve: drift {trajectory.max_drift:.3e} or flow residual {trajectory.max_residual:.3e} out of tolerance")
    report = EvolutionReport(
        times=trajectory.times.tolist(),
        expectations={name: values.tolist() for name, values in trajectory.expectations.items()},
        residuals={name: values.tolist() for name, values in trajectory.residuals.items()},
        max_residual=trajectory.max_residual,
        max_drift=trajectory.max_drift,
        ok=ok,
    )
    print(f"steps {args.steps}, t = {args.t:g}: max drift {report.max_drift:.3e}, max flow residual {report.max_residual:.3e}")
    for name, values in report.expectations.items():
        print(f"<{name}>: {values[0]:.6g} -> {values[-1]:.6g}")
    emit(report, args.out)
    return EXIT_OK if ok else EXIT_VERIFICATION
