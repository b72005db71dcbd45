"""Spin-s operators, diagonal spin ensembles and the four-observable experiment.

Basis |s, m> is ordered m = s, s-1, ..., -s.  An ensemble puts weight p_j on
|s, m_j>; its frame psi = sum_j sqrt(p_j) |s, m_j><j| pairs the j-th ancilla
vector with the j-th (descending) weight.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from qgeo.core.config import DEFAULT_TOLERANCES, Tolerances
from qgeo.core.errors import BadEnsemble, BadEpsilon, BadSpin, IdentityViolation, WindowViolated
from qgeo.models.geometry import GeometryContext, brackets, hamiltonian_lift, inertia_inner, split, xi_field
from qgeo.models.state import DensityState, PurificationFrame, make_spectrum
from qgeo.models.uncertainty import decomposition, moments
from qgeo.schemas import (
    ClosedFormsReport,
    DemoReport,
    EnsemblePayload,
    SistaReport,
    Winner,
    WindowReport,
)
from qgeo.utils.matrix import dagger, fro

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpinSystem:
    s: float
    hbar: float
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    splus: np.ndarray
    sminus: np.ndarray

    @property
    def dim(self) -> int:
        return self.sz.shape[0]

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.s, -self.s - 1, -1)

    def index(self, m: float) -> int:
        return int(round(self.s - m))


def _check_spin(s: float) -> float:
    twice = 2.0 * float(s)
    if twice < 0 or abs(twice - round(twice)) > 1e-12:
        raise BadSpin(f"spin must be a non-negative integer or half-integer, got {s!r}")
    return round(twice) / 2.0


def spin_invariant_residual(spin: SpinSystem) -> float:
    """Worst of the commutation relations and the Casimir identity, relative to hbar^2 s(s+1)."""
    h = spin.hbar
    sx, sy, sz = spin.sx, spin.sy, spin.sz
    residuals = [
        fro(sx @ sy - sy @ sx - 1j * h * sz),
        fro(sy @ sz - sz @ sy - 1j * h * sx),
        fro(sz @ sx - sx @ sz - 1j * h * sy),
        fro(sx @ sx + sy @ sy + sz @ sz - h * h * spin.s * (spin.s + 1) * np.eye(spin.dim)),
    ]
    return max(residuals) / max(1.0, h * h * spin.s * (spin.s + 1))


def build_spin(s: float, hbar: float = 1.0) -> SpinSystem:
    s = _check_spin(s)
    m = np.arange(s, -s - 1, -1)
    # S+ |s,m> = hbar sqrt(s(s+1) - m(m+1)) |s,m+1>; |s,m+1> sits one row up
    ladder = np.sqrt(np.maximum(0.0, s * (s + 1) - m * (m + 1)))
    splus = hbar * np.diag(ladder[1:], 1).astype(np.complex128)
    sminus = dagger(splus)
    spin = SpinSystem(
        s=s,
        hbar=hbar,
        sx=0.5 * (splus + sminus),
        sy=(splus - sminus) / 2j,
        sz=hbar * np.diag(m).astype(np.complex128),
        splus=splus,
        sminus=sminus,
    )
    residual = spin_invariant_residual(spin)
    if residual > 1e-12:
        raise IdentityViolation(f"spin-{s} operators violate the angular momentum algebra by {residual:.3e}")
    return spin


@dataclass(frozen=True)
class EnsembleSpec:
    s: float
    m_list: Tuple[float, ...]
    p_list: Tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.p_list)

    def sums(self) -> Tuple[float, float]:
        """(sum p_j m_j, sum p_j m_j^2)."""
        p = np.asarray(self.p_list)
        m = np.asarray(self.m_list)
        return float(p @ m), float(p @ (m * m))


def make_ensemble_spec(s: float, m_list: Sequence[float], p_list: Sequence[float]) -> EnsembleSpec:
    s = _check_spin(s)
    m_list = tuple(float(m) for m in m_list)
    p_list = tuple(float(p) for p in p_list)
    if not m_list or len(m_list) != len(p_list):
        raise BadEnsemble(f"need matching non-empty m and p lists, got {len(m_list)} and {len(p_list)}")
    for m in m_list:
        if abs(m) > s or abs((s - m) - round(s - m)) > 1e-12:
            raise BadEnsemble(f"m={m:g} is not a magnetic quantum number of spin {s:g}")
    if len(set(m_list)) != len(m_list):
        raise BadEnsemble("magnetic quantum numbers must be distinct")
    # descending / positive / normalized checks reuse the spectrum validation
    make_spectrum(p_list, (1,) * len(p_list))
    return EnsembleSpec(s, m_list, p_list)


def build_ensemble(spec: EnsembleSpec, spin: SpinSystem | None = None) -> Tuple[DensityState, PurificationFrame]:
    spin = spin or build_spin(spec.s)
    sigma = make_spectrum(spec.p_list, (1,) * spec.k)
    psi = np.zeros((spin.dim, spec.k), dtype=np.complex128)
    rho = np.zeros((spin.dim, spin.dim), dtype=np.complex128)
    for j, (m, p) in enumerate(zip(spec.m_list, spec.p_list)):
        i = spin.index(m)
        psi[i, j] = math.sqrt(p)
        rho[i, i] = p
    return DensityState(rho, sigma), PurificationFrame(psi, sigma)


def closed_forms(spec: EnsembleSpec, hbar: float = 1.0) -> ClosedFormsReport:
    mean, square = spec.sums()
    return ClosedFormsReport(
        sxsy_omega=hbar * mean,
        sxsx_g=hbar * spec.s * (spec.s + 1) - hbar * square,
        xi_sz_perp_sq=2.0 * hbar * square - 2.0 * hbar * mean ** 2,
        sz_exp=hbar * mean,
    )


def machine_forms(spec: EnsembleSpec, ctx: GeometryContext) -> ClosedFormsReport:
    """The closed-form quantities evaluated through the generic geometry pipeline."""
    spin = build_spin(spec.s, ctx.hbar)
    state, frame = build_ensemble(spec, spin)
    _, perp = xi_field(spin.sz, frame, ctx)
    return ClosedFormsReport(
        sxsy_omega=brackets(spin.sx, spin.sy, frame, ctx)[1],
        sxsx_g=brackets(spin.sx, spin.sx, frame, ctx)[0],
        xi_sz_perp_sq=inertia_inner(perp, perp, ctx),
        sz_exp=moments(spin.sz, state)[0],
    )


def closed_form_residual(spec: EnsembleSpec, ctx: GeometryContext) -> float:
    closed = closed_forms(spec, ctx.hbar).model_dump()
    machine = machine_forms(spec, ctx).model_dump()
    return max(abs(closed[key] - machine[key]) for key in closed)


def parallel_perpendicular_check(spec: EnsembleSpec, ctx: GeometryContext) -> Dict[str, float]:
    """Vertical size of the S_x, S_y lifts and horizontal size of the S_z lift at the ensemble frame."""
    spin = build_spin(spec.s, ctx.hbar)
    _, frame = build_ensemble(spec, spin)
    out = {}
    for label, op in (("Sx", spin.sx), ("Sy", spin.sy)):
        _, vert = split(frame, hamiltonian_lift(op, frame, ctx), ctx)
        out[label] = fro(vert.X)
    hor, _ = split(frame, hamiltonian_lift(spin.sz, frame, ctx), ctx)
    out["Sz"] = fro(hor.X)
    return out


def window(spec: EnsembleSpec, eps: float, hbar: float = 1.0) -> WindowReport:
    """0 < 2 eps hbar (sum m^2 p - (sum m p)^2) < hbar s(s+1) - hbar sum m^2 p."""
    mean, square = spec.sums()
    middle = 2.0 * eps * hbar * (square - mean ** 2)
    upper = hbar * spec.s * (spec.s + 1) - hbar * square
    return WindowReport(lower=0.0, middle=middle, upper=upper, holds=0.0 < middle < upper)


def sista_check(spec: EnsembleSpec, ctx: GeometryContext) -> SistaReport:
    """Delta S_x Delta S_y >= (hbar^2 / 2) |sum p_j m_j|."""
    spin = build_spin(spec.s, ctx.hbar)
    state, _ = build_ensemble(spec, spin)
    _, dx = moments(spin.sx, state)
    _, dy = moments(spin.sy, state)
    mean, _ = spec.sums()
    lhs = dx * dy
    rhs = 0.5 * ctx.hbar ** 2 * abs(mean)
    return SistaReport(lhs=lhs, rhs=rhs, holds=lhs >= rhs - ctx.tol.bound * max(1.0, lhs))


def abcd_observables(spin: SpinSystem, eps: float) -> Dict[str, np.ndarray]:
    root = math.sqrt(eps)
    return {
        "A": spin.sx + root * spin.sz,
        "B": spin.sx - root * spin.sz,
        "C": spin.sx + spin.sz,
        "D": spin.sy + spin.sz,
    }


def abcd_experiment(spec: EnsembleSpec, eps: float, ctx: GeometryContext) -> DemoReport:
    """Bound reports for (A, B) and (C, D); geometric should win the first, RS the second."""
    if not eps > 0:
        raise BadEpsilon(f"eps must be positive, got {eps!r}")
    spin = build_spin(spec.s, ctx.hbar)
    _, frame = build_ensemble(spec, spin)
    obs = abcd_observables(spin, eps)
    pairs = {
        "AB": decomposition(obs["A"], obs["B"], frame, ctx),
        "CD": decomposition(obs["C"], obs["D"], frame, ctx),
    }
    win = window(spec, eps, ctx.hbar)
    predicted = (
        pairs["AB"].winner is Winner.GEOMETRIC
        and pairs["CD"].winner is Winner.ROBERTSON_SCHRODINGER
    )
    if not win.holds:
        violation = WindowViolated(f"eps={eps:g} gives {win.middle:.6g}, outside (0, {win.upper:.6g})")
        logger.warning(f"{violation}; winner prediction not asserted")
    elif not predicted:
        logger.error(
            f"predicted winners not observed: AB={pairs['AB'].winner.value}, CD={pairs['CD'].winner.value}"
        )
    return DemoReport(
        spec=EnsemblePayload(s=spec.s, m=list(spec.m_list), p=list(spec.p_list), eps=eps, hbar=ctx.hbar),
        closed_forms=closed_forms(spec, ctx.hbar),
        machine_forms=machine_forms(spec, ctx),
        pairs=pairs,
        sista=sista_check(spec, ctx),
        window=win,
        predicted_winners=predicted,
    )


def ensemble_context(spec: EnsembleSpec, hbar: float = 1.0, tol: Tolerances = DEFAULT_TOLERANCES) -> GeometryContext:
    return GeometryContext(make_spectrum(spec.p_list, (1,) * spec.k), hbar, tol)
