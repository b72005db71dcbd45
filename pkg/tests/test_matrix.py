import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgeo.core.errors import BadDims, MalformedInput, NoConvergence, NotAntiHermitian, NotHermitian
from qgeo.utils.matrix import (
    RngState,
    SampleKind,
    as_matrix,
    check_hermitian,
    dagger,
    hermitian_eigensystem,
    sample_random,
    unitary_exponential,
    unitary_propagator,
)

SEEDS = st.integers(min_value=0, max_value=2 ** 32)


def test_eigensystem_identity():
    values, vectors = hermitian_eigensystem(np.eye(3))
    np.testing.assert_allclose(values, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(dagger(vectors) @ vectors, np.eye(3), atol=1e-12)


def test_eigensystem_reorders_diagonal():
    values, vectors = hermitian_eigensystem(np.diag([0.3, 0.7]))
    np.testing.assert_allclose(values, [0.7, 0.3])
    np.testing.assert_allclose(np.abs(vectors), [[0.0, 1.0], [1.0, 0.0]])


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS, n=st.integers(min_value=1, max_value=6))
def test_eigensystem_reconstructs(seed, n):
    m, _ = sample_random(SampleKind.HERMITIAN, n, n, RngState(seed))
    values, vectors = hermitian_eigensystem(m)
    limit = 1e-10 * max(1.0, np.linalg.norm(m))
    assert np.linalg.norm((vectors * values) @ dagger(vectors) - m) <= limit
    assert np.linalg.norm(dagger(vectors) @ vectors - np.eye(n)) <= limit
    assert np.all(np.diff(values) <= 0.0)
    np.testing.assert_allclose(values, np.linalg.eigvalsh(m)[::-1], atol=limit)


def test_eigensystem_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eigensystem([[0.0, 1.0], [0.0, 0.0]])


def test_eigensystem_sweep_cap():
    with pytest.raises(NoConvergence):
        hermitian_eigensystem([[1.0, 0.5], [0.5, 2.0]], max_sweeps=0)


def test_zero_matrix_is_hermitian():
    assert check_hermitian(np.zeros((2, 2))).shape == (2, 2)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(MalformedInput):
        as_matrix([[1.0, float("nan")]])
    with pytest.raises(BadDims):
        as_matrix([1.0, 2.0])


def test_exponential_of_zero():
    np.testing.assert_allclose(unitary_exponential(np.zeros((2, 2)), 1.0), np.eye(2))


def test_exponential_scalar_phase():
    np.testing.assert_allclose(unitary_exponential([[1j]], math.pi), [[-1.0]], atol=1e-12)


def test_exponential_rotation():
    u = unitary_exponential([[0.0, 1.0], [-1.0, 0.0]], math.pi / 2)
    np.testing.assert_allclose(u, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-12)
    np.testing.assert_allclose(dagger(u) @ u, np.eye(2), atol=1e-12)


def test_exponential_rejects_hermitian():
    with pytest.raises(NotAntiHermitian):
        unitary_exponential([[1.0, 0.0], [0.0, 2.0]], 1.0)


@settings(max_examples=20, deadline=None)
@given(seed=SEEDS, t=st.floats(min_value=-3.0, max_value=3.0))
def test_propagator_is_a_group(seed, t):
    h, _ = sample_random(SampleKind.HERMITIAN, 4, 4, RngState(seed))
    propagate = unitary_propagator(-1j * h)
    u = propagate(t)
    np.testing.assert_allclose(dagger(u) @ u, np.eye(4), atol=1e-10)
    np.testing.assert_allclose(propagate(t) @ propagate(0.5), propagate(t + 0.5), atol=1e-10)


def test_rng_is_reproducible():
    a, next_a = sample_random(SampleKind.HERMITIAN, 3, 3, RngState(42))
    b, next_b = sample_random(SampleKind.HERMITIAN, 3, 3, RngState(42))
    np.testing.assert_array_equal(a, b)
    assert next_a == next_b
    c, _ = sample_random(SampleKind.HERMITIAN, 3, 3, next_a)
    assert not np.allclose(a, c)


def test_spawned_streams_depend_only_on_index():
    root = RngState(7)
    first, _ = sample_random(SampleKind.HERMITIAN, 2, 2, root.spawn(3))
    _, advanced = root.generator()
    second, _ = sample_random(SampleKind.HERMITIAN, 2, 2, advanced.spawn(3))
    other, _ = sample_random(SampleKind.HERMITIAN, 2, 2, root.spawn(4))
    np.testing.assert_array_equal(first, second)
    assert not np.allclose(first, other)


def test_rng_rejects_out_of_range_seed():
    with pytest.raises(ValueError):
        RngState(-1)


@settings(max_examples=20, deadline=None)
@given(seed=SEEDS, n=st.integers(min_value=1, max_value=6), data=st.data())
def test_samples_have_their_structure(seed, n, data):
    k = data.draw(st.integers(min_value=1, max_value=n))
    rng = RngState(seed)
    h, rng = sample_random(SampleKind.HERMITIAN, n, n, rng)
    u, rng = sample_random(SampleKind.HAAR_UNITARY, n, n, rng)
    v, _ = sample_random("isometry", n, k, rng)
    np.testing.assert_allclose(h, dagger(h))
    np.testing.assert_allclose(dagger(u) @ u, np.eye(n), atol=1e-12)
    assert v.shape == (n, k)
    np.testing.assert_allclose(dagger(v) @ v, np.eye(k), atol=1e-12)


def test_isometry_needs_k_at_most_n():
    with pytest.raises(BadDims):
        sample_random(SampleKind.ISOMETRY, 2, 3, RngState(0))
