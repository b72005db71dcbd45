"""Randomized property campaigns behind ``qgeo verify``.

Each suite draws its trials from its own stream, and trial ``i`` of a suite
always sees the generator ``RngState(seed).spawn(suite).spawn(i)``.  Results
therefore do not depend on the number of worker threads.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from qgeo.core.config import Tolerances, settings
from qgeo.core.errors import QGeoError
from qgeo.models.geometry import (
    AmbientTangent,
    GeometryContext,
    ambient_forms,
    connection,
    fundamental_field,
    hamiltonian_lift,
    inertia_inner,
    metric_momentum_map,
    momentum_map,
    split,
    symmetry_algebra_gap,
    symplectic_rank,
    xi_field,
)
from qgeo.models.spin import (
    abcd_experiment,
    build_spin,
    closed_form_residual,
    ensemble_context,
    make_ensemble_spec,
    parallel_perpendicular_check,
    spin_invariant_residual,
)
from qgeo.models.state import (
    PurificationFrame,
    fiber_transition,
    frame_to_state,
    gauge_act,
    random_frame,
    random_gauge,
    random_gauge_element,
    random_spectrum,
    rank_one_partial_trace,
)
from qgeo.models.uncertainty import (
    bound_terms,
    classify,
    combined_bound,
    decomposition,
    evolve,
    identity_residuals,
    pair_identity_residuals,
)
from qgeo.schemas import Classification, RunConfig, SuiteResult, VerifySummary
from qgeo.utils.matrix import (
    RngState,
    SampleKind,
    dagger,
    fro,
    hermitian_eigensystem,
    sample_random,
    unitary_exponential,
)

logger = logging.getLogger(__name__)

# Field names of BoundReport that must be unchanged under a gauge transformation.
BOUND_SCALARS = (
    "expA", "expB", "dA", "dB", "rs_bound", "geo_bound", "combined_bound", "robertson_bound",
    "g_bracket", "w_bracket", "xiAperp_xiBperp", "xiAperp_sq", "xiBperp_sq", "difference_term",
)

DEMO_TARGETS = {
    ("closed_forms", "sxsy_omega"): 0.7,
    ("closed_forms", "sxsx_g"): 1.3,
    ("closed_forms", "xi_sz_perp_sq"): 0.42,
    ("closed_forms", "sz_exp"): 0.7,
    ("AB", "geo_bound"): 0.65,
    ("AB", "rs_bound"): 0.5975,
    ("AB", "product"): 0.7025,
    ("CD", "geo_bound"): 0.35,
    ("CD", "rs_bound"): math.hypot(0.21, 0.35),
    ("CD", "product"): 0.86,
    ("sista", "lhs"): 0.65,
    ("sista", "rhs"): 0.35,
}


@dataclass(frozen=True)
class Check:
    residual: float
    ok: bool


def within(residual: float, limit: float) -> Check:
    return Check(float(residual), bool(residual <= limit))


@dataclass(frozen=True)
class Trial:
    cfg: RunConfig
    tol: Tolerances
    rng: RngState
    index: int

    @property
    def hbar(self) -> float:
        return (self.cfg.hbar, settings.SECOND_HBAR)[self.index % 2]


@dataclass(frozen=True)
class Instance:
    frame: PurificationFrame
    ctx: GeometryContext
    a: np.ndarray
    b: np.ndarray


def random_instance(trial: Trial, max_rank: Optional[int] = None) -> Tuple[Instance, RngState]:
    gen, rng = trial.rng.generator()
    n = int(gen.integers(1, trial.cfg.dim_max + 1))
    sigma, rng = random_spectrum(n, rng, max_rank=max_rank)
    frame, rng = random_frame(sigma, n, rng)
    a, rng = sample_random(SampleKind.HERMITIAN, n, n, rng)
    b, rng = sample_random(SampleKind.HERMITIAN, n, n, rng)
    return Instance(frame, GeometryContext(sigma, trial.hbar, trial.tol), a, b), rng


def parallel_part(a: np.ndarray, frame: PurificationFrame) -> np.ndarray:
    """A - psi P^-1 D P^-1 psi^H with D the block diagonal of psi^H A psi; its lift is horizontal."""
    sigma = frame.sigma
    inv = 1.0 / sigma.p
    d = sigma.block_diagonal(dagger(frame.psi) @ a @ frame.psi)
    correction = (frame.psi * inv) @ d @ (dagger(frame.psi) * inv[:, np.newaxis])
    return a - 0.5 * (correction + dagger(correction))


# ---------------- Trials ----------------

def identities_trial(trial: Trial) -> List[Check]:
    """Expectation, variance, product, covariance and Cauchy-Schwarz relations; squared-bound identities."""
    inst, _ = random_instance(trial)
    ctx = inst.ctx
    terms = bound_terms(inst.a, inst.b, inst.frame, ctx)
    limit = ctx.tol.identity * terms.scale ** 2
    checks = [within(r, limit) for r in identity_residuals(terms).values()]
    root = math.sqrt(ctx.hbar / 2.0)
    for op, exp, delta, g_self, perp_self in (
        (inst.a, terms.exp_a, terms.d_a, terms.g_aa, terms.perp_aa),
        (inst.b, terms.exp_b, terms.d_b, terms.g_bb, terms.perp_bb),
    ):
        xi, _ = xi_field(op, inst.frame, ctx)
        along = root * inertia_inner(ctx.chi, xi, ctx)
        checks.append(within(abs(exp - along), ctx.tol.identity * max(1.0, abs(exp))))
        variance = 0.5 * ctx.hbar * (g_self + perp_self)
        checks.append(within(abs(delta ** 2 - variance), ctx.tol.identity * max(1.0, delta ** 2)))
    pair_limit = ctx.tol.identity * max(1.0, fro(inst.a) * fro(inst.b))
    pair = pair_identity_residuals(terms)
    checks.append(within(pair["symmetric_product"], pair_limit))
    checks.append(within(pair["covariance"], pair_limit))
    checks.append(within(pair["cauchy_schwarz"], ctx.tol.identity * max(1.0, terms.g_aa * terms.g_bb)))
    decomposition(inst.a, inst.b, inst.frame, ctx)
    return checks


def bounds_trial(trial: Trial) -> List[Check]:
    """Dominance of every bound, combined = max(geo, rs), and the variance floor."""
    inst, _ = random_instance(trial)
    ctx = inst.ctx
    report = decomposition(inst.a, inst.b, inst.frame, ctx)
    scale = max(1.0, report.product)
    slack = ctx.tol.bound * scale
    checks = [
        within(max(0.0, bound - report.product), slack)
        for bound in (report.geo_bound, report.rs_bound, report.combined_bound)
    ]
    checks.append(within(abs(combined_bound(inst.a, inst.b, inst.frame, ctx) - max(report.geo_bound, report.rs_bound)), slack))
    terms = bound_terms(inst.a, inst.a, inst.frame, ctx)
    floor = 0.5 * ctx.hbar * terms.g_ab
    checks.append(within(max(0.0, floor - terms.d_a ** 2), ctx.tol.bound * max(1.0, terms.d_a ** 2)))
    return checks


def collapse_trial(trial: Trial) -> List[Check]:
    """geo = rs on pure states and whenever one observable is parallel."""
    pure, rng = random_instance(trial, max_rank=1)
    report = decomposition(pure.a, pure.b, pure.frame, pure.ctx)
    checks = [within(abs(report.geo_bound - report.rs_bound), pure.ctx.tol.bound * max(1.0, report.product))]

    mixed, _ = random_instance(Trial(trial.cfg, trial.tol, rng, trial.index))
    a = parallel_part(mixed.a, mixed.frame)
    checks.append(Check(0.0, classify(a, mixed.frame, mixed.ctx) is Classification.PARALLEL))
    report = decomposition(a, mixed.b, mixed.frame, mixed.ctx)
    checks.append(within(abs(report.geo_bound - report.rs_bound), mixed.ctx.tol.bound * max(1.0, report.product)))
    return checks


def _representative_scalars(a, b, psi, p_mat, projectors, hbar) -> Dict[str, float]:
    """Bracket and xi-field scalars using a non-diagonal representative (psi, P) of the fiber."""
    k = p_mat.shape[0]
    p_inv = np.linalg.inv(p_mat)
    chi = np.eye(k, dtype=np.complex128) / (1j * math.sqrt(2.0 * hbar))

    def inner(xi, eta):
        return 2.0 * hbar * float(np.trace(dagger(xi) @ eta @ p_mat).real)

    def fields(op):
        lift = op @ psi / (1j * hbar)
        xi = sum(pi @ dagger(psi) @ lift @ pi for pi in projectors) @ p_inv
        xi = 0.5 * (xi - dagger(xi))
        return lift, lift - psi @ xi, xi, xi - inner(chi, xi) * chi

    lift_a, hor_a, xi_a, perp_a = fields(a)
    lift_b, hor_b, _, perp_b = fields(b)
    return {
        "expA": math.sqrt(hbar / 2.0) * inner(chi, xi_a),
        "g_bracket": 2.0 * hbar * float(np.vdot(hor_a, hor_b).real),
        "w_bracket": 2.0 * hbar * float(np.vdot(lift_a, lift_b).imag),
        "xiAperp_xiBperp": inner(perp_a, perp_b),
        "xiAperp_sq": inner(perp_a, perp_a),
        "xiBperp_sq": inner(perp_b, perp_b),
    }


def invariance_trial(trial: Trial) -> List[Check]:
    """Exported scalars under psi -> psi U (U gauge) and under (psi, P) -> (psi V^H, V P V^H)."""
    inst, rng = random_instance(trial)
    ctx = inst.ctx
    base = decomposition(inst.a, inst.b, inst.frame, ctx)
    limit = ctx.tol.bound * max(1.0, base.product)

    u, rng = random_gauge(ctx.sigma, rng)
    moved = decomposition(inst.a, inst.b, gauge_act(inst.frame, u, ctx.tol), ctx)
    gauge_gap = max(abs(getattr(base, name) - getattr(moved, name)) for name in BOUND_SCALARS)
    checks = [within(gauge_gap, limit), Check(0.0, base.winner is moved.winner)]

    v, _ = sample_random(SampleKind.HAAR_UNITARY, ctx.sigma.k, ctx.sigma.k, rng)
    scalars = _representative_scalars(
        inst.a,
        inst.b,
        inst.frame.psi @ dagger(v),
        v @ ctx.sigma.P @ dagger(v),
        [v @ pi @ dagger(v) for pi in ctx.sigma.projectors],
        ctx.hbar,
    )
    rep_gap = max(abs(getattr(base, name) - value) for name, value in scalars.items())
    checks.append(within(rep_gap, limit))
    return checks


def connection_trial(trial: Trial) -> List[Check]:
    """A(psi xi) = xi, A(horizontal) = 0 and <A(X), eta> = G(X, psi eta)."""
    inst, rng = random_instance(trial)
    ctx, frame = inst.ctx, inst.frame
    xi, rng = random_gauge_element(ctx.sigma, rng)
    eta, rng = random_gauge_element(ctx.sigma, rng)
    recovered = connection(frame, fundamental_field(xi, frame), ctx)
    checks = [within(fro(recovered.xi - xi.xi), ctx.tol.frame * max(1.0, fro(xi.xi)))]

    lift = hamiltonian_lift(inst.a, frame, ctx)
    hor, vert = split(frame, lift, ctx)
    checks.append(within(fro(connection(frame, hor, ctx).xi), ctx.tol.frame * max(1.0, fro(lift.X))))
    checks.append(within(fro(hor.X + vert.X - lift.X), ctx.tol.frame * max(1.0, fro(lift.X))))

    paired = inertia_inner(connection(frame, lift, ctx), eta, ctx)
    metric = metric_momentum_map(frame, lift, eta, ctx)
    checks.append(within(abs(paired - metric), ctx.tol.bound * max(1.0, abs(metric))))
    return checks


def momentum_map_trial(trial: Trial) -> List[Check]:
    """Equivariance J(psi U)(xi) = J(psi)(U xi U^H) and dJ_xi(X) = Omega(psi xi, X)."""
    inst, rng = random_instance(trial)
    ctx, frame = inst.ctx, inst.frame
    k = ctx.sigma.k
    u, rng = sample_random(SampleKind.HAAR_UNITARY, k, k, rng)
    h, rng = sample_random(SampleKind.HERMITIAN, k, k, rng)
    xi = 1j * h
    lhs = momentum_map(frame.psi @ u, xi, ctx)
    rhs = momentum_map(frame.psi, u @ xi @ dagger(u), ctx)
    checks = [within(abs(lhs - rhs), ctx.tol.bound * max(1.0, abs(lhs)))]

    gauge, rng = random_gauge_element(ctx.sigma, rng)
    x, _ = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    tangent = AmbientTangent(1j * x @ frame.psi, frame)
    step = ctx.tol.fd_step
    numeric = (
        momentum_map(frame.psi + step * tangent.X, gauge.xi, ctx)
        - momentum_map(frame.psi - step * tangent.X, gauge.xi, ctx)
    ) / (2.0 * step)
    _, omega = ambient_forms(fundamental_field(gauge, frame), tangent, ctx)
    checks.append(within(abs(numeric - omega), ctx.tol.fd * max(1.0, abs(omega))))
    return checks


def partial_trace_trial(trial: Trial) -> List[Check]:
    gen, rng = trial.rng.generator()
    n = int(gen.integers(1, min(6, trial.cfg.dim_max) + 1))
    sigma, rng = random_spectrum(n, rng, max_rank=4)
    frame, _ = random_frame(sigma, n, rng)
    return [within(fro(rank_one_partial_trace(frame) - frame_to_state(frame).rho), trial.tol.frame)]


def eigensystem_trial(trial: Trial) -> List[Check]:
    gen, rng = trial.rng.generator()
    n = int(gen.integers(1, trial.cfg.dim_max + 1))
    m, _ = sample_random(SampleKind.HERMITIAN, n, n, rng)
    values, vectors = hermitian_eigensystem(m, tol=trial.tol.herm)
    limit = trial.tol.eig * max(1.0, fro(m))
    return [
        within(fro((vectors * values) @ dagger(vectors) - m), limit),
        within(fro(dagger(vectors) @ vectors - np.eye(n)), limit),
        Check(0.0, bool(np.all(np.diff(values) <= 0.0))),
    ]


def random_ensemble(trial: Trial):
    gen, _ = trial.rng.generator()
    s = int(gen.integers(1, 8)) / 2.0
    dim = int(round(2 * s + 1))
    k = int(gen.integers(1, dim + 1))
    ms = np.arange(s, -s - 1, -1)
    m_list = gen.choice(ms, size=k, replace=False)
    raw = np.sort(gen.uniform(0.05, 1.0, size=k))[::-1]
    return make_ensemble_spec(s, m_list, raw / raw.sum())


def closed_forms_trial(trial: Trial) -> List[Check]:
    """Closed-form spin quantities against the generic pipeline; lift structure of S_x, S_y, S_z."""
    spec = random_ensemble(trial)
    ctx = ensemble_context(spec, trial.hbar, trial.tol)
    checks = [
        within(spin_invariant_residual(build_spin(spec.s, trial.hbar)), 1e-12),
        within(closed_form_residual(spec, ctx), trial.tol.closed_form),
    ]
    checks.extend(within(value, trial.tol.frame) for value in parallel_perpendicular_check(spec, ctx).values())
    return checks


def spin_demo_trial(trial: Trial) -> List[Check]:
    spec = make_ensemble_spec(1, (1, 0), (0.7, 0.3))
    ctx = ensemble_context(spec, 1.0, trial.tol)
    report = abcd_experiment(spec, 0.25, ctx)
    sections = {
        "closed_forms": report.machine_forms,
        "AB": report.pairs["AB"],
        "CD": report.pairs["CD"],
        "sista": report.sista,
    }
    checks = [
        within(abs(getattr(sections[section], name) - target), trial.tol.closed_form)
        for (section, name), target in DEMO_TARGETS.items()
    ]
    checks.append(Check(0.0, report.window.holds and report.predicted_winners and report.sista.holds))
    return checks


def evolution_trial(trial: Trial) -> List[Check]:
    inst, rng = random_instance(trial)
    h, _ = sample_random(SampleKind.HERMITIAN, inst.frame.n, inst.frame.n, rng)
    trajectory = evolve(h, frame_to_state(inst.frame), 1.0, 100, inst.ctx, probes={"B": inst.b})
    return [
        within(trajectory.max_drift, trial.tol.drift),
        within(trajectory.max_residual, trial.tol.evolve_residual),
    ]


def symplectic_rank_trial(trial: Trial) -> List[Check]:
    """Omega and G are nondegenerate on horizontal lifts and the gauge action is free."""
    inst, _ = random_instance(trial)
    ranks = symplectic_rank(inst.frame, inst.ctx)
    gap = symmetry_algebra_gap(inst.frame)
    return [
        Check(float(abs(ranks.omega_rank - ranks.orbit_dim) + abs(ranks.metric_rank - ranks.orbit_dim)), ranks.nondegenerate),
        Check(0.0, gap > 1e-12),
    ]


def xi_covariance_trial(trial: Trial) -> List[Check]:
    """xi_A(psi U) = U^H xi_A(psi) U for gauge unitaries U."""
    inst, rng = random_instance(trial)
    ctx = inst.ctx
    u, _ = random_gauge(ctx.sigma, rng)
    xi, _ = xi_field(inst.a, inst.frame, ctx)
    moved, _ = xi_field(inst.a, gauge_act(inst.frame, u, ctx.tol), ctx)
    return [within(fro(moved.xi - dagger(u) @ xi.xi @ u), ctx.tol.frame * max(1.0, fro(xi.xi)))]


def fiber_trial(trial: Trial) -> List[Check]:
    """Frames over one state are related by the unique gauge unitary fiber_transition recovers."""
    inst, rng = random_instance(trial)
    u, _ = random_gauge(inst.ctx.sigma, rng)
    moved = gauge_act(inst.frame, u, trial.tol)
    recovered = fiber_transition(inst.frame, moved, trial.tol)
    return [
        within(fro(recovered - u), trial.tol.frame),
        within(fro(frame_to_state(moved).rho - frame_to_state(inst.frame).rho), trial.tol.frame),
    ]


def exponential_trial(trial: Trial) -> List[Check]:
    """exp((s+t)X) = exp(sX) exp(tX), and exp(tX) is unitary."""
    gen, rng = trial.rng.generator()
    n = int(gen.integers(1, trial.cfg.dim_max + 1))
    s, t = (float(v) for v in gen.uniform(-2.0, 2.0, size=2))
    h, _ = sample_random(SampleKind.HERMITIAN, n, n, rng)
    x = 1j * h
    limit = trial.tol.eig * max(1.0, (abs(s) + abs(t)) * fro(x))
    u_s, u_t = unitary_exponential(x, s), unitary_exponential(x, t)
    return [
        within(fro(unitary_exponential(x, s + t) - u_s @ u_t), limit),
        within(fro(dagger(u_t) @ u_t - np.eye(n)), limit),
    ]


def sampler_trial(trial: Trial) -> List[Check]:
    """Equal random states give equal draws and equal successors; successors give fresh draws."""
    gen, _ = trial.rng.generator()
    n = int(gen.integers(2, trial.cfg.dim_max + 1))
    k = int(gen.integers(1, n + 1))
    checks = []
    for kind in SampleKind:
        first, after = sample_random(kind, n, k, trial.rng)
        again, after_again = sample_random(kind, n, k, trial.rng)
        fresh, _ = sample_random(kind, n, k, after)
        checks.append(Check(0.0, bool(np.array_equal(first, again)) and after == after_again))
        checks.append(Check(0.0, not np.array_equal(first, fresh)))
    return checks


# ---------------- Suites ----------------

@dataclass(frozen=True)
class Suite:
    name: str
    trial: Callable[[Trial], List[Check]]
    share: float = 1.0  # fraction of the configured trial count
    fixed: Optional[int] = None
    gating: bool = True

    def count(self, cfg: RunConfig) -> int:
        if self.fixed is not None:
            return self.fixed
        return max(1, int(round(cfg.trials * self.share)))


SUITES: Tuple[Suite, ...] = (
    Suite("eigensystem", eigensystem_trial),
    Suite("exponential", exponential_trial, share=0.2),
    Suite("sampler", sampler_trial, share=0.2),
    Suite("partial_trace", partial_trace_trial, share=0.2),
    Suite("identities", identities_trial),
    Suite("bounds", bounds_trial),
    Suite("collapse", collapse_trial),
    Suite("invariance", invariance_trial),
    Suite("xi_covariance", xi_covariance_trial, share=0.2),
    Suite("fiber", fiber_trial, share=0.2),
    Suite("connection", connection_trial),
    Suite("momentum_map", momentum_map_trial, share=0.2),
    Suite("closed_forms", closed_forms_trial, share=0.2),
    Suite("spin_demo", spin_demo_trial, fixed=1),
    Suite("evolution", evolution_trial, share=0.05),
    Suite("symplectic_rank", symplectic_rank_trial, share=0.05, gating=False),
)


def run_trial(suite: Suite, cfg: RunConfig, tol: Tolerances, stream: int, index: int) -> List[Check]:
    trial = Trial(cfg, tol, RngState(cfg.seed).spawn(stream).spawn(index), index)
    try:
        return suite.trial(trial)
    except QGeoError as exc:
        logger.warning(f"{suite.name} trial {index} raised {exc}")
        return [Check(float("inf"), False)]


def run_suite(suite: Suite, cfg: RunConfig, tol: Tolerances, stream: int, pool: Optional[ThreadPoolExecutor] = None) -> SuiteResult:
    indices = range(suite.count(cfg))
    if pool is None:
        outcomes = [run_trial(suite, cfg, tol, stream, i) for i in indices]
    else:
        outcomes = list(pool.map(lambda i: run_trial(suite, cfg, tol, stream, i), indices))
    result = SuiteResult(gating=suite.gating)
    for checks in outcomes:
        if all(check.ok for check in checks):
            result.passed += 1
        else:
            result.failed += 1
        finite = [c.residual for c in checks if math.isfinite(c.residual)]
        if finite:
            result.worst_residual = max(result.worst_residual, max(finite))
    level = logging.INFO if result.ok or not suite.gating else logging.ERROR
    logger.log(level, f"suite {suite.name}: {result.passed} passed, {result.failed} failed, worst residual {result.worst_residual:.3e}")
    return result


def run_campaign(cfg: RunConfig, tol: Tolerances, suites: Tuple[Suite, ...] = SUITES) -> VerifySummary:
    results: Dict[str, SuiteResult] = {}
    pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for stream, suite in enumerate(suites):
            results[suite.name] = run_suite(suite, cfg, tol, stream, pool)
    finally:
        if pool is not None:
            pool.shutdown()
    all_passed = all(r.ok for r in results.values() if r.gating)
    return VerifySummary(config=cfg, suites=results, all_passed=all_passed)
