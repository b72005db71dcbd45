"""Dense complex matrix kernel.

Hermitian eigensystems by cyclic complex Jacobi rotations, unitary exponentials
built on them, and seeded sampling of Hermitian, Haar-unitary and isometry
matrices. Matrices are plain ``numpy`` complex128 arrays and are never mutated
after they are returned.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Tuple

import numpy as np

from qgeo.core.config import DEFAULT_TOLERANCES
from qgeo.core.errors import BadDims, MalformedInput, NoConvergence, NotAntiHermitian, NotHermitian

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
MAX_SWEEPS = 100


def as_matrix(value, subject: str | None = None) -> np.ndarray:
    """Return ``value`` as a finite 2-D complex128 array (a copy)."""
    try:
        arr = np.array(value, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"not a numeric matrix: {exc}", subject=subject) from exc
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise BadDims(f"expected a non-empty 2-D matrix, got shape {arr.shape}", subject=subject)
    if not np.all(np.isfinite(arr)):
        raise MalformedInput("matrix has NaN or Inf entries", subject=subject)
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def fro(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def check_hermitian(m, tol: float = DEFAULT_TOLERANCES.herm, subject: str | None = None) -> np.ndarray:
    arr = as_matrix(m, subject=subject)
    if arr.shape[0] != arr.shape[1]:
        raise NotHermitian(f"matrix is not square: {arr.shape}", subject=subject)
    if fro(arr - dagger(arr)) > tol * fro(arr):
        raise NotHermitian("matrix differs from its adjoint", subject=subject)
    return arr


def check_anti_hermitian(m, tol: float = DEFAULT_TOLERANCES.herm, subject: str | None = None) -> np.ndarray:
    arr = as_matrix(m, subject=subject)
    if arr.shape[0] != arr.shape[1]:
        raise NotAntiHermitian(f"matrix is not square: {arr.shape}", subject=subject)
    if fro(arr + dagger(arr)) > tol * fro(arr):
        raise NotAntiHermitian("matrix is not anti-Hermitian", subject=subject)
    return arr


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


# ---------------- Eigensystems ----------------

def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] with one complex Jacobi rotation, in place."""
    apq = a[p, q]
    mag = abs(apq)
    if mag == 0.0:
        return
    app = a[p, p].real
    aqq = a[q, q].real
    phase = apq / mag
    tau = (aqq - app) / (2.0 * mag)
    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    # Phase to a real symmetric 2x2 block, then the real rotation.
    g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
    cols = [p, q]
    a[:, cols] = a[:, cols] @ g
    a[cols, :] = dagger(g) @ a[cols, :]
    v[:, cols] = v[:, cols] @ g
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = app - t * mag
    a[q, q] = aqq + t * mag


def hermitian_eigensystem(
    m,
    tol: float = DEFAULT_TOLERANCES.herm,
    max_sweeps: int = MAX_SWEEPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and unitary eigenvectors (columns) of a Hermitian matrix.

    Ties keep the order of the original diagonal index, so the output is a
    deterministic function of the input.
    """
    a = hermitian_part(check_hermitian(m, tol=tol))
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = fro(a)
    converged = n == 1 or scale == 0.0
    sweep = 0
    while not converged:
        off = fro(a - np.diag(np.diag(a)))
        if off <= 10.0 * _EPS * scale:
            converged = True
            break
        if sweep == max_sweeps:
            raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
        sweep += 1
    logger.debug(f"Jacobi converged after {sweep} sweeps for n={n}")

    values = np.real(np.diag(a)).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], v[:, order]


# ---------------- Unitary exponentials ----------------

def unitary_propagator(x, tol: float = DEFAULT_TOLERANCES.herm) -> Callable[[float], np.ndarray]:
    """Return ``t -> exp(t X)`` for anti-Hermitian X from one eigendecomposition of iX."""
    x = check_anti_hermitian(x, tol=tol)
    values, vectors = hermitian_eigensystem(hermitian_part(1j * x), tol=tol)
    vectors_h = dagger(vectors)

    def propagate(t: float) -> np.ndarray:
        # exp(tX) = exp(-i t H) with H = iX
        return (vectors * np.exp(-1j * t * values)) @ vectors_h

    return propagate


def unitary_exponential(x, t: float, tol: float = DEFAULT_TOLERANCES.herm) -> np.ndarray:
    return unitary_propagator(x, tol=tol)(t)


# ---------------- Random sampling ----------------

@dataclass(frozen=True)
class RngState:
    """Explicit, immutable random state: every draw returns the successor state."""

    seed: int
    counter: int = 0
    stream: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def generator(self) -> Tuple[np.random.Generator, "RngState"]:
        seq = np.random.SeedSequence([self.seed, *self.stream, self.counter])
        successor = RngState(self.seed, self.counter + 1, self.stream)
        return np.random.default_rng(seq), successor

    def spawn(self, index: int) -> "RngState":
        """Independent stream for trial ``index``; depends only on (seed, stream, index)."""
        return RngState(self.seed, 0, (*self.stream, index))


class SampleKind(str, Enum):
    HERMITIAN = "hermitian"
    HAAR_UNITARY = "haar_unitary"
    ISOMETRY = "isometry"


def _ginibre(gen: np.random.Generator, n: int) -> np.ndarray:
    return (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / math.sqrt(2.0)


def _haar(gen: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(gen, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def sample_random(kind: SampleKind | str, n: int, k: int, rng: RngState) -> Tuple[np.ndarray, RngState]:
    """Draw one matrix of the given kind; ``k`` is only used for isometries (n x k)."""
    kind = SampleKind(kind)
    if n < 1:
        raise BadDims(f"n must be >= 1, got {n}")
    if kind is SampleKind.ISOMETRY and not 1 <= k <= n:
        raise BadDims(f"isometry needs 1 <= k <= n, got n={n}, k={k}")
    gen, rng = rng.generator()
    if kind is SampleKind.HERMITIAN:
        z = _ginibre(gen, n)
        return 0.5 * (z + dagger(z)), rng
    u = _haar(gen, n)
    if kind is SampleKind.HAAR_UNITARY:
        return u, rng
    return np.ascontiguousarray(u[:, :k]), rng
