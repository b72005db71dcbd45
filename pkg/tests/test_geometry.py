import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgeo.core.errors import BasepointMismatch, NonPositive, NotTangent, SpectrumMismatch
from qgeo.models.geometry import (
    AmbientTangent,
    GeometryContext,
    ambient_forms,
    brackets,
    connection,
    fundamental_field,
    hamiltonian_lift,
    inertia_inner,
    make_tangent,
    metric_momentum_map,
    momentum_map,
    orbit_dimension,
    pushforward,
    split,
    symmetry_algebra_gap,
    symplectic_rank,
    xi_field,
)
from qgeo.models.state import (
    GaugeElement,
    frame_to_state,
    gauge_act,
    make_spectrum,
    random_frame,
    random_gauge,
    random_gauge_element,
    random_spectrum,
)
from qgeo.utils.matrix import RngState, SampleKind, dagger, sample_random

SEEDS = st.integers(min_value=0, max_value=2 ** 32)
HBARS = st.sampled_from([1.0, 0.32])


def random_setup(seed, hbar, n_max=6):
    gen, rng = RngState(seed).generator()
    n = int(gen.integers(1, n_max + 1))
    sigma, rng = random_spectrum(n, rng)
    frame, rng = random_frame(sigma, n, rng)
    return frame, GeometryContext(sigma, hbar), rng


def test_context_requires_positive_hbar():
    with pytest.raises(NonPositive):
        GeometryContext(make_spectrum((1.0,), (1,)), hbar=0.0)


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS, hbar=HBARS)
def test_forms_symmetry(seed, hbar):
    frame, ctx, rng = random_setup(seed, hbar)
    a, rng = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    b, _ = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    x = hamiltonian_lift(a, frame, ctx)
    y = hamiltonian_lift(b, frame, ctx)
    g_xy, w_xy = ambient_forms(x, y, ctx)
    g_yx, w_yx = ambient_forms(y, x, ctx)
    assert g_xy == pytest.approx(g_yx, abs=1e-12)
    assert w_xy == pytest.approx(-w_yx, abs=1e-12)
    assert ambient_forms(x, x, ctx)[0] >= 0.0
    assert ambient_forms(x, x, ctx)[1] == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS, hbar=HBARS)
def test_connection_contract(seed, hbar):
    frame, ctx, rng = random_setup(seed, hbar)
    xi, rng = random_gauge_element(ctx.sigma, rng)
    np.testing.assert_allclose(connection(frame, fundamental_field(xi, frame), ctx).xi, xi.xi, atol=1e-10)

    a, _ = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    lift = hamiltonian_lift(a, frame, ctx)
    hor, vert = split(frame, lift, ctx)
    np.testing.assert_allclose(hor.X + vert.X, lift.X, atol=1e-12)
    np.testing.assert_allclose(connection(frame, hor, ctx).xi, 0.0, atol=1e-10)
    assert ambient_forms(hor, vert, ctx)[0] == pytest.approx(0.0, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS, hbar=HBARS)
def test_connection_inverts_inertia(seed, hbar):
    frame, ctx, rng = random_setup(seed, hbar)
    eta, rng = random_gauge_element(ctx.sigma, rng)
    a, _ = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    lift = hamiltonian_lift(a, frame, ctx)
    expected = metric_momentum_map(frame, lift, eta, ctx)
    assert inertia_inner(connection(frame, lift, ctx), eta, ctx) == pytest.approx(expected, abs=1e-9)


def test_tangency_is_enforced(ensemble, ensemble_ctx):
    _, frame = ensemble
    with pytest.raises(NotTangent):
        make_tangent(np.ones(frame.psi.shape), frame, ensemble_ctx)


def test_tangents_at_different_frames(ensemble, ensemble_ctx):
    _, frame = ensemble
    other = type(frame)(frame.psi * 1j, frame.sigma)
    x = AmbientTangent(np.zeros_like(frame.psi), frame)
    y = AmbientTangent(np.zeros_like(frame.psi), other)
    with pytest.raises(BasepointMismatch):
        ambient_forms(x, y, ensemble_ctx)


def test_inertia_rejects_foreign_spectrum(ensemble_ctx):
    foreign = GaugeElement(1j * np.eye(1), make_spectrum((1.0,), (1,)))
    with pytest.raises(SpectrumMismatch):
        inertia_inner(foreign, foreign, ensemble_ctx)


def test_momentum_map_on_chi(ensemble, ensemble_ctx):
    _, frame = ensemble
    assert momentum_map(frame, ensemble_ctx.chi, ensemble_ctx) == pytest.approx(1.0 / math.sqrt(2.0))
    assert inertia_inner(ensemble_ctx.chi, ensemble_ctx.chi, ensemble_ctx) == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(seed=SEEDS, hbar=HBARS)
def test_momentum_map_equivariance(seed, hbar):
    frame, ctx, rng = random_setup(seed, hbar)
    k = ctx.sigma.k
    u, rng = sample_random(SampleKind.HAAR_UNITARY, k, k, rng)
    h, _ = sample_random(SampleKind.HERMITIAN, k, k, rng)
    lhs = momentum_map(frame.psi @ u, 1j * h, ctx)
    rhs = momentum_map(frame.psi, u @ (1j * h) @ dagger(u), ctx)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_spin_brackets(spin_one, ensemble, ensemble_ctx):
    _, frame = ensemble
    assert brackets(spin_one.sx, spin_one.sy, frame, ensemble_ctx)[1] == pytest.approx(0.7, abs=1e-10)
    assert brackets(spin_one.sx, spin_one.sx, frame, ensemble_ctx)[0] == pytest.approx(1.3, abs=1e-10)
    _, perp = xi_field(spin_one.sz, frame, ensemble_ctx)
    assert inertia_inner(perp, perp, ensemble_ctx) == pytest.approx(0.42, abs=1e-10)


def test_pushforward_is_traceless_hermitian(spin_one, ensemble, ensemble_ctx):
    _, frame = ensemble
    tangent = pushforward(frame, hamiltonian_lift(spin_one.sx, frame, ensemble_ctx), ensemble_ctx)
    np.testing.assert_allclose(tangent, dagger(tangent))
    assert abs(np.trace(tangent)) < 1e-12
    # vertical directions do not move the state
    vertical = pushforward(frame, hamiltonian_lift(spin_one.sz, frame, ensemble_ctx), ensemble_ctx)
    np.testing.assert_allclose(vertical, 0.0, atol=1e-12)


def test_symplectic_rank_at_ensemble(ensemble, ensemble_ctx):
    _, frame = ensemble
    ranks = symplectic_rank(frame, ensemble_ctx)
    assert ranks.orbit_dim == orbit_dimension(frame.sigma, 3) == 6
    assert ranks.nondegenerate
    assert symmetry_algebra_gap(frame) > 0.0


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS, hbar=HBARS)
def test_xi_is_gauge_covariant(seed, hbar):
    frame, ctx, rng = random_setup(seed, hbar)
    u, rng = random_gauge(ctx.sigma, rng)
    a, _ = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    xi, perp = xi_field(a, frame, ctx)
    moved_xi, moved_perp = xi_field(a, gauge_act(frame, u), ctx)
    np.testing.assert_allclose(moved_xi.xi, dagger(u) @ xi.xi @ u, atol=1e-9)
    np.testing.assert_allclose(moved_perp.xi, dagger(u) @ perp.xi @ u, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS, hbar=HBARS)
def test_pushforward_of_lift_is_commutator(seed, hbar):
    frame, ctx, rng = random_setup(seed, hbar)
    a, _ = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    rho = frame_to_state(frame).rho
    tangent = pushforward(frame, hamiltonian_lift(a, frame, ctx), ctx)
    np.testing.assert_allclose(tangent, (a @ rho - rho @ a) / (1j * hbar), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS, hbar=HBARS)
def test_forms_against_complex_rotation(seed, hbar):
    frame, ctx, rng = random_setup(seed, hbar)
    a, _ = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    x = hamiltonian_lift(a, frame, ctx)
    g, w = ambient_forms(x, AmbientTangent(1j * x.X, frame), ctx)
    norm_sq = np.linalg.norm(x.X) ** 2
    assert g == pytest.approx(0.0, abs=1e-10 * max(1.0, norm_sq))
    assert w == pytest.approx(2.0 * hbar * norm_sq, rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS, hbar=HBARS)
def test_split_is_idempotent(seed, hbar):
    frame, ctx, rng = random_setup(seed, hbar)
    a, _ = sample_random(SampleKind.HERMITIAN, frame.n, frame.n, rng)
    hor, vert = split(frame, hamiltonian_lift(a, frame, ctx), ctx)
    hor_again, vert_of_hor = split(frame, hor, ctx)
    np.testing.assert_allclose(hor_again.X, hor.X, atol=1e-10)
    np.testing.assert_allclose(vert_of_hor.X, 0.0, atol=1e-10)
    hor_of_vert, vert_again = split(frame, vert, ctx)
    np.testing.assert_allclose(hor_of_vert.X, 0.0, atol=1e-10)
    np.testing.assert_allclose(vert_again.X, vert.X, atol=1e-10)
