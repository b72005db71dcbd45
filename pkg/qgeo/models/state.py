"""Spectra, density operators, purification frames and the gauge group.

A rank-k density operator rho on an n-dimensional space is purified by an n x k
frame psi with psi^H psi = P = diag(p_1, ..., p_k) and psi psi^H = rho.  Frames
over the same state differ by a unitary on the k-dimensional ancilla commuting
with P (the gauge group); its Lie algebra consists of block-diagonal
anti-Hermitian matrices, one block per distinct eigenvalue.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np

from qgeo.core.config import DEFAULT_TOLERANCES, Tolerances
from qgeo.core.errors import (
    BadDims,
    NonPositive,
    NotDescending,
    NotGauge,
    NotNormalized,
    SpectrumMismatch,
)
from qgeo.utils.matrix import (
    RngState,
    SampleKind,
    as_matrix,
    check_anti_hermitian,
    check_hermitian,
    dagger,
    fro,
    hermitian_eigensystem,
    hermitian_part,
    sample_random,
)

logger = logging.getLogger(__name__)


# ---------------- Spectrum ----------------

@dataclass(frozen=True)
class Spectrum:
    values: Tuple[float, ...]
    mults: Tuple[int, ...]

    @property
    def k(self) -> int:
        return sum(self.mults)

    @property
    def levels(self) -> int:
        return len(self.values)

    @cached_property
    def p(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, length k."""
        return np.repeat(np.asarray(self.values, dtype=float), self.mults)

    @cached_property
    def P(self) -> np.ndarray:
        return np.diag(self.p).astype(np.complex128)

    @cached_property
    def blocks(self) -> List[slice]:
        edges = np.concatenate(([0], np.cumsum(self.mults)))
        return [slice(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:])]

    @cached_property
    def projectors(self) -> List[np.ndarray]:
        out = []
        for block in self.blocks:
            pi = np.zeros((self.k, self.k), dtype=np.complex128)
            pi[block, block] = np.eye(block.stop - block.start)
            out.append(pi)
        return out

    def padded(self, n: int) -> np.ndarray:
        if self.k > n:
            raise BadDims(f"rank {self.k} exceeds dimension {n}")
        return np.concatenate((self.p, np.zeros(n - self.k)))

    def block_diagonal(self, m: np.ndarray) -> np.ndarray:
        """sum_j Pi_j m Pi_j."""
        out = np.zeros_like(m, dtype=np.complex128)
        for block in self.blocks:
            out[block, block] = m[block, block]
        return out


def make_spectrum(values: Sequence[float], mults: Sequence[int], tol: float = 1e-12) -> Spectrum:
    values = tuple(float(v) for v in values)
    mults = tuple(int(m) for m in mults)
    if not values or len(values) != len(mults):
        raise BadDims(f"need matching non-empty values/mults, got {len(values)} and {len(mults)}")
    if any(m < 1 for m in mults):
        raise BadDims("multiplicities must be positive integers")
    if any(not v > 0 for v in values):
        raise NonPositive("spectrum values must be positive")
    if any(a <= b for a, b in zip(values, values[1:])):
        raise NotDescending("spectrum values must be strictly descending")
    total = sum(v * m for v, m in zip(values, mults))
    if abs(total - 1.0) > tol:
        raise NotNormalized(f"weighted sum is {total!r}, expected 1")
    return Spectrum(values, mults)


def random_spectrum(n: int, rng: RngState, max_rank: int | None = None) -> Tuple[Spectrum, RngState]:
    """Random rank, multiplicity pattern and descending normalized values."""
    gen, rng = rng.generator()
    k = int(gen.integers(1, min(n, max_rank or n) + 1))
    levels = int(gen.integers(1, k + 1))
    cuts = np.sort(gen.choice(np.arange(1, k), size=levels - 1, replace=False)) if levels > 1 else []
    mults = np.diff(np.concatenate(([0], cuts, [k]))).astype(int)
    raw = np.sort(gen.uniform(0.05, 1.0, size=levels))[::-1]
    values = raw / float(np.dot(raw, mults))
    return make_spectrum(values, mults), rng


# ---------------- Density states ----------------

@dataclass(frozen=True)
class DensityState:
    rho: np.ndarray
    sigma: Spectrum

    @property
    def n(self) -> int:
        return self.rho.shape[0]


def spectrum_deviation(rho: np.ndarray, sigma: Spectrum) -> float:
    """Largest absolute gap between the eigenvalues of rho and sigma padded with zeros."""
    values, _ = hermitian_eigensystem(rho, tol=np.inf)
    return float(np.max(np.abs(values - sigma.padded(rho.shape[0]))))


def make_density_state(rho, sigma: Spectrum, tol: Tolerances = DEFAULT_TOLERANCES) -> DensityState:
    rho = hermitian_part(check_hermitian(rho, tol=tol.herm, subject="rho"))
    n = rho.shape[0]
    if sigma.k > n:
        raise BadDims(f"rank {sigma.k} exceeds dimension {n}")
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > tol.trace:
        raise SpectrumMismatch(f"trace is {trace!r}, expected 1")
    values, _ = hermitian_eigensystem(rho, tol=tol.herm)
    if values[-1] < -tol.psd:
        raise SpectrumMismatch(f"rho is not positive (min eigenvalue {values[-1]:.3e})")
    gap = float(np.max(np.abs(values - sigma.padded(n))))
    if gap > tol.spec:
        raise SpectrumMismatch(f"eigenvalues deviate from the declared spectrum by {gap:.3e}")
    return DensityState(rho, sigma)


# ---------------- Purification frames ----------------

@dataclass(frozen=True)
class PurificationFrame:
    psi: np.ndarray
    sigma: Spectrum

    @property
    def n(self) -> int:
        return self.psi.shape[0]

    @property
    def k(self) -> int:
        return self.psi.shape[1]


def make_frame(psi, sigma: Spectrum, tol: Tolerances = DEFAULT_TOLERANCES) -> PurificationFrame:
    psi = as_matrix(psi, subject="psi")
    n, k = psi.shape
    if k != sigma.k or k > n:
        raise BadDims(f"frame of shape {psi.shape} does not fit rank {sigma.k}")
    residual = fro(dagger(psi) @ psi - sigma.P)
    if residual > tol.frame:
        raise SpectrumMismatch(f"psi^H psi differs from P by {residual:.3e}")
    return PurificationFrame(psi, sigma)


def purify(state: DensityState, tol: Tolerances = DEFAULT_TOLERANCES) -> PurificationFrame:
    """Deterministic frame psi = sum_j sqrt(p_j) |v_j><j| over rho.

    Each eigenvector is rephased so that its largest-modulus entry is real
    positive; inside a degenerate block the basis is the eigensolver's.
    """
    sigma = state.sigma
    values, vectors = hermitian_eigensystem(state.rho, tol=tol.herm)
    gap = float(np.max(np.abs(values - sigma.padded(state.n))))
    if gap > tol.spec:
        raise SpectrumMismatch(f"eigenvalues deviate from the declared spectrum by {gap:.3e}")
    v = vectors[:, : sigma.k].copy()
    for j in range(sigma.k):
        lead = v[int(np.argmax(np.abs(v[:, j]))), j]
        v[:, j] *= np.conj(lead) / abs(lead)
    return PurificationFrame(v * np.sqrt(sigma.p), sigma)


def frame_to_state(frame: PurificationFrame) -> DensityState:
    return DensityState(hermitian_part(frame.psi @ dagger(frame.psi)), frame.sigma)


def rank_one_partial_trace(frame: PurificationFrame) -> np.ndarray:
    """Trace the ancilla out of |psi>><<psi| on H (x) K*; equals psi psi^H."""
    n, k = frame.psi.shape
    vec = frame.psi.reshape(n * k)
    projector = np.outer(vec, vec.conj()).reshape(n, k, n, k)
    return np.einsum("iaja->ij", projector)


def random_frame(sigma: Spectrum, n: int, rng: RngState) -> Tuple[PurificationFrame, RngState]:
    if sigma.k > n:
        raise BadDims(f"rank {sigma.k} exceeds dimension {n}")
    v, rng = sample_random(SampleKind.ISOMETRY, n, sigma.k, rng)
    return PurificationFrame(v * np.sqrt(sigma.p), sigma), rng


# ---------------- Gauge group and algebra ----------------

@dataclass(frozen=True)
class GaugeElement:
    """Element of u(sigma): anti-Hermitian, block diagonal in the eigenvalue blocks."""

    xi: np.ndarray
    sigma: Spectrum


def make_gauge_element(xi, sigma: Spectrum, tol: Tolerances = DEFAULT_TOLERANCES) -> GaugeElement:
    xi = check_anti_hermitian(xi, tol=tol.gauge, subject="xi")
    if xi.shape != (sigma.k, sigma.k):
        raise BadDims(f"gauge element must be {sigma.k}x{sigma.k}, got {xi.shape}")
    if fro(xi @ sigma.P - sigma.P @ xi) > tol.gauge * max(1.0, fro(xi)):
        raise NotGauge("xi does not commute with P")
    return GaugeElement(xi, sigma)


def random_gauge(sigma: Spectrum, rng: RngState) -> Tuple[np.ndarray, RngState]:
    """Block-diagonal unitary with one Haar block per distinct eigenvalue."""
    u = np.zeros((sigma.k, sigma.k), dtype=np.complex128)
    for block in sigma.blocks:
        size = block.stop - block.start
        u[block, block], rng = sample_random(SampleKind.HAAR_UNITARY, size, size, rng)
    return u, rng


def random_gauge_element(sigma: Spectrum, rng: RngState) -> Tuple[GaugeElement, RngState]:
    xi = np.zeros((sigma.k, sigma.k), dtype=np.complex128)
    for block in sigma.blocks:
        size = block.stop - block.start
        h, rng = sample_random(SampleKind.HERMITIAN, size, size, rng)
        xi[block, block] = 1j * h
    return GaugeElement(xi, sigma), rng


def check_gauge_unitary(u, sigma: Spectrum, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    u = as_matrix(u, subject="U")
    if u.shape != (sigma.k, sigma.k):
        raise NotGauge(f"gauge unitary must be {sigma.k}x{sigma.k}, got {u.shape}")
    if fro(dagger(u) @ u - np.eye(sigma.k)) > tol.unitary:
        raise NotGauge("U is not unitary")
    if fro(u @ sigma.P - sigma.P @ u) > tol.unitary:
        raise NotGauge("U does not commute with P")
    return u


def gauge_act(frame: PurificationFrame, u, tol: Tolerances = DEFAULT_TOLERANCES) -> PurificationFrame:
    """Right action psi -> psi U of the gauge group."""
    u = check_gauge_unitary(u, frame.sigma, tol)
    return PurificationFrame(frame.psi @ u, frame.sigma)


def fiber_transition(
    psi: PurificationFrame,
    phi: PurificationFrame,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """The gauge unitary U = psi^H phi P^-1 with phi = psi U.

    Raises NotGauge when the frames do not lie over one state.
    """
    if psi.sigma != phi.sigma or psi.psi.shape != phi.psi.shape:
        raise BadDims("frames belong to different bundles")
    u = check_gauge_unitary((dagger(psi.psi) @ phi.psi) / psi.sigma.p[np.newaxis, :], psi.sigma, tol)
    residual = fro(psi.psi @ u - phi.psi)
    if residual > tol.frame:
        raise NotGauge(f"psi U misses phi by {residual:.3e}")
    return u
