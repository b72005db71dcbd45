import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgeo.core.errors import BadDims, NonPositive, NotDescending, NotGauge, NotNormalized, SpectrumMismatch
from qgeo.models.state import (
    frame_to_state,
    gauge_act,
    fiber_transition,
    make_density_state,
    make_frame,
    make_gauge_element,
    make_spectrum,
    purify,
    random_frame,
    random_gauge,
    random_spectrum,
    rank_one_partial_trace,
)
from qgeo.utils.matrix import RngState, dagger

SEEDS = st.integers(min_value=0, max_value=2 ** 32)


def test_spectrum_structure():
    sigma = make_spectrum((0.4, 0.1), (2, 2))
    assert sigma.k == 4
    assert sigma.levels == 2
    np.testing.assert_allclose(sigma.p, [0.4, 0.4, 0.1, 0.1])
    assert [(b.start, b.stop) for b in sigma.blocks] == [(0, 2), (2, 4)]
    np.testing.assert_allclose(sum(sigma.projectors), np.eye(4))
    np.testing.assert_allclose(sigma.padded(5), [0.4, 0.4, 0.1, 0.1, 0.0])


@pytest.mark.parametrize(
    "values, mults, error",
    [
        ((0.5, 0.6), (1, 1), NotDescending),
        ((0.5, 0.5), (1, 1), NotDescending),
        ((1.2, -0.2), (1, 1), NonPositive),
        ((0.6, 0.3), (1, 1), NotNormalized),
        ((0.5,), (1, 1), BadDims),
        ((1.0,), (0,), BadDims),
    ],
)
def test_spectrum_validation(values, mults, error):
    with pytest.raises(error):
        make_spectrum(values, mults)


def test_density_state_against_spectrum():
    sigma = make_spectrum((0.7, 0.3), (1, 1))
    state = make_density_state(np.diag([0.7, 0.3, 0.0]), sigma)
    assert state.n == 3
    with pytest.raises(SpectrumMismatch):
        make_density_state(np.diag([0.6, 0.4, 0.0]), sigma)
    with pytest.raises(BadDims):
        make_density_state(np.diag([1.0]), sigma)


def test_density_state_rejects_non_positive():
    sigma = make_spectrum((1.0,), (1,))
    with pytest.raises(SpectrumMismatch):
        make_density_state(np.diag([1.2, -0.2]), sigma)


def test_purify_recovers_state():
    sigma = make_spectrum((0.5, 0.25), (1, 2))
    u, _ = random_gauge(make_spectrum((0.25,), (4,)), RngState(3))
    rho = u @ np.diag([0.5, 0.25, 0.25, 0.0]) @ dagger(u)
    state = make_density_state(rho, sigma)
    frame = purify(state)
    np.testing.assert_allclose(dagger(frame.psi) @ frame.psi, sigma.P, atol=1e-12)
    np.testing.assert_allclose(frame_to_state(frame).rho, state.rho, atol=1e-12)


def test_purify_is_deterministic():
    state = make_density_state(np.diag([0.7, 0.3, 0.0]), make_spectrum((0.7, 0.3), (1, 1)))
    np.testing.assert_array_equal(purify(state).psi, purify(state).psi)
    np.testing.assert_allclose(purify(state).psi, [[np.sqrt(0.7), 0.0], [0.0, np.sqrt(0.3)], [0.0, 0.0]])


def test_make_frame_checks_gram():
    sigma = make_spectrum((0.7, 0.3), (1, 1))
    make_frame(np.diag([np.sqrt(0.7), np.sqrt(0.3)]), sigma)
    with pytest.raises(SpectrumMismatch):
        make_frame(np.eye(2), sigma)
    with pytest.raises(BadDims):
        make_frame(np.ones((2, 1)), sigma)


def test_fiber_transition_rejects_frames_over_different_states():
    sigma = make_spectrum((0.7, 0.3), (1, 1))
    frame = make_frame(np.diag([np.sqrt(0.7), np.sqrt(0.3), 0.0])[:, :2], sigma)
    rotated = make_frame(np.array([[0.0, 0.0], [np.sqrt(0.7), 0.0], [0.0, np.sqrt(0.3)]]), sigma)
    with pytest.raises(NotGauge):
        fiber_transition(frame, rotated)


@settings(max_examples=30, deadline=None)
@given(seed=SEEDS, n=st.integers(min_value=1, max_value=6))
def test_partial_trace_matches_reduction(seed, n):
    sigma, rng = random_spectrum(n, RngState(seed), max_rank=4)
    frame, _ = random_frame(sigma, n, rng)
    np.testing.assert_allclose(rank_one_partial_trace(frame), frame_to_state(frame).rho, atol=1e-10)
    assert abs(float(np.trace(frame_to_state(frame).rho).real) - 1.0) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=SEEDS, n=st.integers(min_value=1, max_value=8))
def test_random_spectrum_is_valid(seed, n):
    sigma, _ = random_spectrum(n, RngState(seed))
    assert 1 <= sigma.k <= n
    assert abs(float(np.dot(sigma.values, sigma.mults)) - 1.0) < 1e-12
    assert all(a > b for a, b in zip(sigma.values, sigma.values[1:]))


@settings(max_examples=20, deadline=None)
@given(seed=SEEDS, n=st.integers(min_value=2, max_value=6))
def test_gauge_action_preserves_state(seed, n):
    sigma, rng = random_spectrum(n, RngState(seed))
    frame, rng = random_frame(sigma, n, rng)
    u, _ = random_gauge(sigma, rng)
    moved = gauge_act(frame, u)
    np.testing.assert_allclose(frame_to_state(moved).rho, frame_to_state(frame).rho, atol=1e-12)
    np.testing.assert_allclose(fiber_transition(frame, moved), u, atol=1e-10)


def test_gauge_must_commute_with_p():
    sigma = make_spectrum((0.7, 0.3), (1, 1))
    frame = make_frame(np.diag([np.sqrt(0.7), np.sqrt(0.3)]), sigma)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(NotGauge):
        gauge_act(frame, swap)
    with pytest.raises(NotGauge):
        make_gauge_element([[0.0, 1.0], [-1.0, 0.0]], sigma)
    assert make_gauge_element(np.diag([1j, -2j]), sigma).xi.shape == (2, 2)
