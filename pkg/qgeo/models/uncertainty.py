"""Uncertainty statistics and the geometric / Robertson-Schrodinger bounds.

All bounds are computed at a frame psi over rho = psi psi^H.  The geometric
bound uses only the brackets of the two observables; the Robertson-Schrodinger
bound additionally sees the chi-orthogonal xi-fields, and the combined bound is
their maximum written in geometric terms.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from qgeo.core.errors import BadDims, IdentityViolation, SpectrumDrift
from qgeo.models.geometry import (
    GeometryContext,
    brackets,
    hamiltonian_lift,
    inertia_inner,
    poisson_bracket,
    split,
    xi_field,
)
from qgeo.models.state import DensityState, PurificationFrame, frame_to_state, purify, spectrum_deviation
from qgeo.schemas import BoundReport, Classification, Regime, Winner
from qgeo.utils.matrix import check_hermitian, dagger, fro, hermitian_part, unitary_propagator

logger = logging.getLogger(__name__)


def _expect(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.trace(op @ rho))


def moments(A, state: DensityState, name: Optional[str] = None) -> Tuple[float, float]:
    """(Tr(A rho), Delta A) with Delta A^2 = Tr((A - <A>)^2 rho), clamped at zero."""
    A = check_hermitian(A, subject=name)
    if A.shape != state.rho.shape:
        raise BadDims(f"observable shape {A.shape} does not match state {state.rho.shape}", subject=name)
    exp = _expect(A, state.rho).real
    centred = A - exp * np.eye(A.shape[0])
    return exp, math.sqrt(max(0.0, _expect(centred @ centred, state.rho).real))


def _products(A: np.ndarray, B: np.ndarray, rho: np.ndarray) -> Tuple[float, float]:
    """Expectations of (A,B) = (AB + BA)/2 and [A,B] = (AB - BA)/2i."""
    ab = A @ B
    ba = B @ A
    return _expect(0.5 * (ab + ba), rho).real, _expect((ab - ba) / 2j, rho).real


def rs_bound(A, B, state: DensityState) -> float:
    A = check_hermitian(A, subject="A")
    B = check_hermitian(B, subject="B")
    exp_a, _ = moments(A, state)
    exp_b, _ = moments(B, state)
    sym, anti = _products(A, B, state.rho)
    return math.hypot(sym - exp_a * exp_b, anti)


def robertson_bound(A, B, state: DensityState) -> float:
    """|Tr([A,B] rho)|, the commutator-only relation."""
    A = check_hermitian(A, subject="A")
    B = check_hermitian(B, subject="B")
    return abs(_products(A, B, state.rho)[1])


def geometric_bound(A, B, frame: PurificationFrame, ctx: GeometryContext) -> float:
    g, w = brackets(A, B, frame, ctx)
    return 0.5 * ctx.hbar * math.hypot(g, w)


@dataclass(frozen=True)
class BoundTerms:
    """Every scalar entering the bounds for one pair, computed once."""

    exp_a: float
    exp_b: float
    d_a: float
    d_b: float
    g_ab: float
    w_ab: float
    g_aa: float
    g_bb: float
    xi_ab: float
    perp_ab: float
    perp_aa: float
    perp_bb: float
    sym_ab: float
    anti_ab: float
    hbar: float

    @property
    def difference_term(self) -> float:
        return 2.0 * self.g_ab * self.perp_ab + self.perp_ab ** 2

    @property
    def geo(self) -> float:
        return 0.5 * self.hbar * math.hypot(self.g_ab, self.w_ab)

    @property
    def rs(self) -> float:
        return math.hypot(self.sym_ab - self.exp_a * self.exp_b, self.anti_ab)

    @property
    def combined(self) -> float:
        radicand = self.g_ab ** 2 + self.w_ab ** 2 + max(0.0, self.difference_term)
        return 0.5 * self.hbar * math.sqrt(radicand)

    @property
    def scale(self) -> float:
        return max(1.0, self.d_a * self.d_b)


def bound_terms(A, B, frame: PurificationFrame, ctx: GeometryContext) -> BoundTerms:
    A = check_hermitian(A, tol=ctx.tol.herm, subject="A")
    B = check_hermitian(B, tol=ctx.tol.herm, subject="B")
    state = frame_to_state(frame)
    exp_a, d_a = moments(A, state)
    exp_b, d_b = moments(B, state)
    g_ab, w_ab = brackets(A, B, frame, ctx)
    g_aa, _ = brackets(A, A, frame, ctx)
    g_bb, _ = brackets(B, B, frame, ctx)
    xi_a, perp_a = xi_field(A, frame, ctx)
    xi_b, perp_b = xi_field(B, frame, ctx)
    sym, anti = _products(A, B, state.rho)
    return BoundTerms(
        exp_a=exp_a,
        exp_b=exp_b,
        d_a=d_a,
        d_b=d_b,
        g_ab=g_ab,
        w_ab=w_ab,
        g_aa=g_aa,
        g_bb=g_bb,
        xi_ab=inertia_inner(xi_a, xi_b, ctx),
        perp_ab=inertia_inner(perp_a, perp_b, ctx),
        perp_aa=inertia_inner(perp_a, perp_a, ctx),
        perp_bb=inertia_inner(perp_b, perp_b, ctx),
        sym_ab=sym,
        anti_ab=anti,
        hbar=ctx.hbar,
    )


def combined_bound(A, B, frame: PurificationFrame, ctx: GeometryContext) -> float:
    """(hbar/2) sqrt({A,B}_g^2 + {A,B}_w^2 + max(0, difference term)) = max(geo, rs)."""
    terms = bound_terms(A, B, frame, ctx)
    gap = abs(terms.combined - max(terms.geo, terms.rs))
    if gap > ctx.tol.bound * terms.scale:
        raise IdentityViolation(f"combined bound differs from max(geo, rs) by {gap:.3e}")
    return terms.combined


def identity_residuals(terms: BoundTerms) -> Dict[str, float]:
    """Absolute residuals of the variance-product and covariance-commutator identities."""
    quarter = 0.25 * terms.hbar ** 2
    product = (terms.d_a * terms.d_b) ** 2
    product_geo = quarter * (
        terms.g_aa * terms.g_bb
        + terms.g_aa * terms.perp_bb
        + terms.g_bb * terms.perp_aa
        + terms.perp_aa * terms.perp_bb
    )
    rs_sq = terms.rs ** 2
    rs_geo = quarter * (terms.g_ab ** 2 + terms.w_ab ** 2 + terms.difference_term)
    return {"variance_product": abs(product - product_geo), "rs_square": abs(rs_sq - rs_geo)}


def pair_identity_residuals(terms: BoundTerms) -> Dict[str, float]:
    """Residuals of the product, covariance and Cauchy-Schwarz relations for one pair.

    Tr((A,B) rho) = (hbar/2)({A,B}_g + xiA . xiB) and
    Tr((A,B) rho) - <A><B> = (hbar/2)({A,B}_g + xiA_perp . xiB_perp) are
    identities; {A,A}_g {B,B}_g >= {A,B}_g^2 + {A,B}_w^2 is an inequality, so
    only its excess counts.
    """
    half = 0.5 * terms.hbar
    return {
        "symmetric_product": abs(terms.sym_ab - half * (terms.g_ab + terms.xi_ab)),
        "covariance": abs(terms.sym_ab - terms.exp_a * terms.exp_b - half * (terms.g_ab + terms.perp_ab)),
        "cauchy_schwarz": max(0.0, terms.g_ab ** 2 + terms.w_ab ** 2 - terms.g_aa * terms.g_bb),
    }


def _winner(geo: float, rs: float, tie: float) -> Winner:
    if geo > rs + tie:
        return Winner.GEOMETRIC
    if rs > geo + tie:
        return Winner.ROBERTSON_SCHRODINGER
    return Winner.TIE


def _regime(terms: BoundTerms, tol: float) -> Regime:
    difference = 0.25 * terms.hbar ** 2 * terms.difference_term
    if difference < -tol:
        return Regime.GEOMETRIC_INTERPOLATES
    if difference > tol:
        return Regime.ROBERTSON_SCHRODINGER_INTERPOLATES
    return Regime.EQUIVALENT


def decomposition(
    A,
    B,
    frame: PurificationFrame,
    ctx: GeometryContext,
    inputs: Optional[Mapping[str, str]] = None,
) -> BoundReport:
    """Assemble every term of both bounds and check the two product identities."""
    terms = bound_terms(A, B, frame, ctx)
    scale = terms.scale
    for label, residual in identity_residuals(terms).items():
        if residual > ctx.tol.identity * scale ** 2:
            raise IdentityViolation(f"{label} identity off by {residual:.3e}")
    geo, rs, combined = terms.geo, terms.rs, terms.combined
    report = BoundReport(
        expA=terms.exp_a,
        expB=terms.exp_b,
        dA=terms.d_a,
        dB=terms.d_b,
        rs_bound=rs,
        geo_bound=geo,
        combined_bound=combined,
        robertson_bound=abs(terms.anti_ab),
        g_bracket=terms.g_ab,
        w_bracket=terms.w_ab,
        xiAperp_xiBperp=terms.perp_ab,
        xiAperp_sq=terms.perp_aa,
        xiBperp_sq=terms.perp_bb,
        difference_term=terms.difference_term,
        regime=_regime(terms, ctx.tol.bound * scale),
        winner=_winner(geo, rs, ctx.tol.tie * scale),
        hbar=ctx.hbar,
        inputs=dict(inputs or {}),
        tolerances=ctx.tol.model_dump(),
    )
    logger.debug(f"decomposition: dAdB={report.product:.6g} geo={geo:.6g} rs={rs:.6g} winner={report.winner.value}")
    return report


def classify(A, frame: PurificationFrame, ctx: GeometryContext) -> Classification:
    """Parallel when the lift has no vertical part, perpendicular when it has no horizontal part.

    A lift at round-off level, below tol.classify * max(1, ||A|| ||psi|| / hbar),
    counts as zero and so as parallel.
    """
    A = check_hermitian(A, tol=ctx.tol.herm)
    lift = hamiltonian_lift(A, frame, ctx)
    size = fro(lift.X)
    if size <= ctx.tol.classify * max(1.0, fro(A) * fro(frame.psi) / ctx.hbar):
        return Classification.PARALLEL
    hor, vert = split(frame, lift, ctx)
    if fro(vert.X) <= ctx.tol.classify * size:
        return Classification.PARALLEL
    if fro(hor.X) <= ctx.tol.classify * size:
        return Classification.PERPENDICULAR
    return Classification.GENERIC


# ---------------- Von Neumann evolution ----------------

@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: List[DensityState]
    expectations: Dict[str, np.ndarray]
    flow: Dict[str, np.ndarray]  # {B,H}_omega along the trajectory
    residuals: Dict[str, np.ndarray]
    drift: np.ndarray

    @property
    def max_drift(self) -> float:
        return float(self.drift.max())

    @property
    def max_residual(self) -> float:
        return max((float(r.max()) for r in self.residuals.values()), default=0.0)


def evolve(
    H,
    state: DensityState,
    t: float,
    steps: int,
    ctx: GeometryContext,
    probes: Optional[Mapping[str, np.ndarray]] = None,
) -> Trajectory:
    """rho_j = U_j rho U_j^H with U_j = exp(-i H t_j / hbar), t_j = j t / steps.

    Every rho_j is certified against the spectrum.  For each probe B the central
    difference of Tr(B rho_t) is compared with {B,H}_omega at rho_t.
    """
    if steps < 1:
        raise BadDims(f"steps must be >= 1, got {steps}")
    H = check_hermitian(H, tol=ctx.tol.herm, subject="H")
    if H.shape != state.rho.shape:
        raise BadDims(f"Hamiltonian shape {H.shape} does not match state {state.rho.shape}", subject="H")
    probes = {name: check_hermitian(b, tol=ctx.tol.herm, subject=name) for name, b in (probes or {}).items()}
    frame0 = purify(state, ctx.tol)
    propagate = unitary_propagator(-1j * H / ctx.hbar, tol=ctx.tol.herm)
    h = ctx.tol.fd_step

    def evolved(time: float) -> Tuple[np.ndarray, np.ndarray]:
        u = propagate(time)
        return u, hermitian_part(u @ state.rho @ dagger(u))

    times = np.linspace(0.0, t, steps + 1)
    states: List[DensityState] = []
    drift = np.zeros(steps + 1)
    expectations = {name: np.zeros(steps + 1) for name in probes}
    flow = {name: np.zeros(steps + 1) for name in probes}
    residuals = {name: np.zeros(steps + 1) for name in probes}
    for j, time in enumerate(times):
        u, rho = evolved(time)
        drift[j] = spectrum_deviation(rho, state.sigma)
        if drift[j] > ctx.tol.drift:
            raise SpectrumDrift(f"spectrum drifted by {drift[j]:.3e} at t={time:.6g}")
        states.append(DensityState(rho, state.sigma))
        frame = PurificationFrame(u @ frame0.psi, state.sigma)
        if probes:
            rho_plus, rho_minus = evolved(time + h)[1], evolved(time - h)[1]
        for name, b in probes.items():
            expectations[name][j] = _expect(b, rho).real
            numeric = (_expect(b, rho_plus).real - _expect(b, rho_minus).real) / (2.0 * h)
            flow[name][j] = poisson_bracket(b, H, frame, ctx)
            residuals[name][j] = abs(numeric - flow[name][j]) / max(1.0, abs(flow[name][j]))
    trajectory = Trajectory(times, states, expectations, flow, residuals, drift)
    logger.info(
        f"evolve: {steps} steps to t={t:g}, max drift {trajectory.max_drift:.3e}, "
        f"max flow residual {trajectory.max_residual:.3e}"
    )
    return trajectory
