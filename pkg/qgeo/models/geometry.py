"""Metric and symplectic geometry of the purification bundle.

The ambient space of n x k matrices carries G(X, Y) = 2 hbar Re Tr(X^H Y) and
Omega(X, Y) = 2 hbar Im Tr(X^H Y).  Restricted to the frames over a fixed
spectrum they give a principal bundle whose mechanical connection
A_psi(X) = sum_j Pi_j psi^H X Pi_j P^-1 splits tangents into vertical (gauge)
and horizontal parts.  Observables act through their lifts A psi / (i hbar).

Only Ad-invariant contractions of the xi-fields are independent of the chosen
frame; xi_A itself transforms as U^H xi_A U under psi -> psi U.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np

from qgeo.core.config import DEFAULT_TOLERANCES, Tolerances
from qgeo.core.errors import (
    BadDims,
    BasepointMismatch,
    NonPositive,
    NotAntiHermitian,
    NotTangent,
    SpectrumMismatch,
)
from qgeo.models.state import GaugeElement, PurificationFrame, Spectrum
from qgeo.utils.matrix import as_matrix, check_anti_hermitian, check_hermitian, dagger, fro, hermitian_part

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeometryContext:
    sigma: Spectrum
    hbar: float = 1.0
    tol: Tolerances = field(default=DEFAULT_TOLERANCES)

    def __post_init__(self):
        if not self.hbar > 0:
            raise NonPositive(f"hbar must be positive, got {self.hbar!r}")

    @cached_property
    def chi(self) -> GaugeElement:
        """Unit vector 1 / (i sqrt(2 hbar)) of u(sigma)."""
        return GaugeElement(np.eye(self.sigma.k, dtype=np.complex128) / (1j * math.sqrt(2.0 * self.hbar)), self.sigma)


@dataclass(frozen=True)
class AmbientTangent:
    X: np.ndarray
    basepoint: PurificationFrame

    def __add__(self, other: "AmbientTangent") -> "AmbientTangent":
        _same_basepoint(self, other)
        return AmbientTangent(self.X + other.X, self.basepoint)

    def __sub__(self, other: "AmbientTangent") -> "AmbientTangent":
        _same_basepoint(self, other)
        return AmbientTangent(self.X - other.X, self.basepoint)


def _same_basepoint(x: AmbientTangent, y: AmbientTangent) -> None:
    a, b = x.basepoint, y.basepoint
    if a is not b and not (a.sigma == b.sigma and np.array_equal(a.psi, b.psi)):
        raise BasepointMismatch("tangent vectors live at different frames")


def tangency_residual(frame: PurificationFrame, X: np.ndarray) -> float:
    """||X^H psi + psi^H X|| relative to max(1, ||X|| ||psi||)."""
    psi = frame.psi
    return fro(dagger(X) @ psi + dagger(psi) @ X) / max(1.0, fro(X) * fro(psi))


def make_tangent(X, frame: PurificationFrame, ctx: GeometryContext) -> AmbientTangent:
    X = as_matrix(X, subject="X")
    if X.shape != frame.psi.shape:
        raise BadDims(f"tangent of shape {X.shape} at a frame of shape {frame.psi.shape}")
    residual = tangency_residual(frame, X)
    if residual > ctx.tol.tangent:
        raise NotTangent(f"X^H psi + psi^H X is {residual:.3e} (relative)")
    return AmbientTangent(X, frame)


def _forms(x: np.ndarray, y: np.ndarray, hbar: float) -> Tuple[float, float]:
    h = np.vdot(x, y)  # Tr(X^H Y)
    return 2.0 * hbar * float(h.real), 2.0 * hbar * float(h.imag)


def ambient_forms(X: AmbientTangent, Y: AmbientTangent, ctx: GeometryContext) -> Tuple[float, float]:
    """(G(X, Y), Omega(X, Y)) = (hbar Tr(X^H Y + Y^H X), -i hbar Tr(X^H Y - Y^H X))."""
    _same_basepoint(X, Y)
    return _forms(X.X, Y.X, ctx.hbar)


def fundamental_field(xi: GaugeElement, frame: PurificationFrame) -> AmbientTangent:
    """Generator psi xi of the gauge action; always vertical."""
    return AmbientTangent(frame.psi @ xi.xi, frame)


def _check_algebra(xi: GaugeElement, ctx: GeometryContext) -> None:
    if xi.sigma != ctx.sigma:
        raise SpectrumMismatch("gauge element belongs to a different spectrum")


def inertia_inner(xi: GaugeElement, eta: GaugeElement, ctx: GeometryContext) -> float:
    """xi . eta = hbar Tr((xi^H eta + eta^H xi) P), the locked inertia metric."""
    _check_algebra(xi, ctx)
    _check_algebra(eta, ctx)
    weighted = eta.xi * ctx.sigma.p[np.newaxis, :]  # eta P
    return 2.0 * ctx.hbar * float(np.vdot(xi.xi, weighted).real)


def momentum_map(psi, xi, ctx: GeometryContext) -> float:
    """J(psi)(xi) = i hbar Tr(psi^H psi xi), defined on every n x k matrix psi."""
    point = psi.psi if isinstance(psi, PurificationFrame) else as_matrix(psi, subject="psi")
    algebra = xi.xi if isinstance(xi, GaugeElement) else check_anti_hermitian(xi, tol=ctx.tol.gauge, subject="xi")
    if algebra.shape != (point.shape[1], point.shape[1]):
        raise NotAntiHermitian(f"xi must be {point.shape[1]}x{point.shape[1]}, got {algebra.shape}")
    value = 1j * ctx.hbar * np.trace(dagger(point) @ point @ algebra)
    return float(value.real)


def metric_momentum_map(frame: PurificationFrame, X: AmbientTangent, xi: GaugeElement, ctx: GeometryContext) -> float:
    """G(X, psi xi); the connection is the inertia metric inverted against it."""
    return ambient_forms(X, fundamental_field(xi, frame), ctx)[0]


def connection(frame: PurificationFrame, X: AmbientTangent, ctx: GeometryContext) -> GaugeElement:
    """A_psi(X) = sum_j Pi_j psi^H X Pi_j P^-1."""
    if X.basepoint is not frame:
        _same_basepoint(X, AmbientTangent(X.X, frame))
    sigma = frame.sigma
    xi = sigma.block_diagonal(dagger(frame.psi) @ X.X) / sigma.p[np.newaxis, :]
    skew = fro(xi + dagger(xi)) / max(1.0, fro(xi))
    if skew > ctx.tol.tangent:
        raise NotTangent(f"connection value is not anti-Hermitian ({skew:.3e})")
    return GaugeElement(0.5 * (xi - dagger(xi)), sigma)


def split(frame: PurificationFrame, X: AmbientTangent, ctx: GeometryContext) -> Tuple[AmbientTangent, AmbientTangent]:
    """(horizontal, vertical) parts of X; they sum to X exactly."""
    vert = fundamental_field(connection(frame, X, ctx), frame)
    hor = AmbientTangent(X.X - vert.X, frame)
    return hor, vert


def hamiltonian_lift(A, frame: PurificationFrame, ctx: GeometryContext, name: str | None = None) -> AmbientTangent:
    """X_A(psi) = A psi / (i hbar)."""
    A = check_hermitian(A, tol=ctx.tol.herm, subject=name)
    if A.shape[0] != frame.n:
        raise BadDims(f"observable is {A.shape[0]}-dimensional, frame lives in {frame.n}", subject=name)
    return make_tangent(A @ frame.psi / (1j * ctx.hbar), frame, ctx)


def xi_field(A, frame: PurificationFrame, ctx: GeometryContext) -> Tuple[GaugeElement, GaugeElement]:
    """(xi_A, xi_A_perp) in the gauge of ``frame``; xi_A_perp is orthogonal to chi."""
    xi = connection(frame, hamiltonian_lift(A, frame, ctx), ctx)
    chi = ctx.chi
    along = inertia_inner(chi, xi, ctx)
    return xi, GaugeElement(xi.xi - along * chi.xi, xi.sigma)


def brackets(A, B, frame: PurificationFrame, ctx: GeometryContext) -> Tuple[float, float]:
    """({A,B}_g, {A,B}_omega) at the state below ``frame``.

    The metric bracket pairs horizontal parts.  Vertical vectors are Omega-null
    on the level set, so the symplectic bracket uses the full lifts.
    """
    lift_a = hamiltonian_lift(A, frame, ctx)
    lift_b = hamiltonian_lift(B, frame, ctx)
    hor_a, _ = split(frame, lift_a, ctx)
    hor_b, _ = split(frame, lift_b, ctx)
    g, _ = ambient_forms(hor_a, hor_b, ctx)
    _, w = ambient_forms(lift_a, lift_b, ctx)
    return g, w


def poisson_bracket(A, B, frame: PurificationFrame, ctx: GeometryContext) -> float:
    """{A,B}_omega alone, without the horizontal projection."""
    _, w = ambient_forms(hamiltonian_lift(A, frame, ctx), hamiltonian_lift(B, frame, ctx), ctx)
    return w


def pushforward(frame: PurificationFrame, X: AmbientTangent, ctx: GeometryContext) -> np.ndarray:
    """d pi(X) = X psi^H + psi X^H as a traceless Hermitian matrix."""
    if X.basepoint is not frame:
        _same_basepoint(X, AmbientTangent(X.X, frame))
    return hermitian_part(2.0 * X.X @ dagger(frame.psi))


# ---------------- Diagnostics ----------------

@dataclass(frozen=True)
class RankDiagnostic:
    omega_rank: int
    metric_rank: int
    orbit_dim: int

    @property
    def nondegenerate(self) -> bool:
        return self.omega_rank == self.orbit_dim == self.metric_rank


def hermitian_basis(n: int):
    for i in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, i] = 1.0
        yield e
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = e[j, i] = 1.0 / math.sqrt(2.0)
            yield e
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = -1j / math.sqrt(2.0)
            e[j, i] = 1j / math.sqrt(2.0)
            yield e


def orbit_dimension(sigma: Spectrum, n: int) -> int:
    return n * n - sum(m * m for m in sigma.mults) - (n - sigma.k) ** 2


def symplectic_rank(frame: PurificationFrame, ctx: GeometryContext) -> RankDiagnostic:
    """Ranks of the Omega and G Gram matrices of horizontal lifts of a Hermitian basis."""
    hors = [split(frame, hamiltonian_lift(e, frame, ctx), ctx)[0].X for e in hermitian_basis(frame.n)]
    stacked = np.array([h.ravel() for h in hors])
    gram = stacked.conj() @ stacked.T  # Tr(X_a^H X_b)
    metric = 2.0 * ctx.hbar * gram.real
    omega = 2.0 * ctx.hbar * gram.imag
    cutoff = 1e-8 * max(1.0, float(np.max(np.abs(metric))))
    return RankDiagnostic(
        omega_rank=int(np.linalg.matrix_rank(omega, tol=cutoff)),
        metric_rank=int(np.linalg.matrix_rank(metric, tol=cutoff)),
        orbit_dim=orbit_dimension(frame.sigma, frame.n),
    )


def symmetry_algebra_gap(frame: PurificationFrame) -> float:
    """Smallest singular value of xi -> psi xi on u(sigma); positive iff the action is locally free."""
    columns = []
    for block in frame.sigma.blocks:
        for a in range(block.start, block.stop):
            for b in range(a, block.stop):
                gens = [1j * _unit(frame.k, a, b, symmetric=True)]
                if a != b:
                    gens.append(_unit(frame.k, a, b, symmetric=False))
                for gen in gens:
                    image = frame.psi @ gen
                    columns.append(np.concatenate((image.real.ravel(), image.imag.ravel())))
    return float(np.linalg.svd(np.array(columns).T, compute_uv=False).min())


def _unit(k: int, a: int, b: int, symmetric: bool) -> np.ndarray:
    e = np.zeros((k, k), dtype=np.complex128)
    e[a, b] = 1.0
    e[b, a] = 1.0 if symmetric else -1.0
    return e
