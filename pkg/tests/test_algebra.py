import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from sidlab.algebra import (
    Observable,
    PointMass,
    StateFunctional,
    check_state,
    identity,
    normalize,
    pair,
    split,
)
from sidlab.errors import DegenerateStateError, InvalidArgumentError
from sidlab.spectral import index_grid, make_grid

from conftest import random_observable, random_state


def test_pairing_hand_computed():
    gw = make_grid((0.0, 1.0), 2)            # weights 0.5, 0.5
    go = index_grid(1)
    rho = StateFunctional(gw, go, np.array([[[1.0]], [[3.0]]]),
                          np.array([[[[0.0]], [[2j]]], [[[-2j]], [[0.0]]]]))
    A = Observable(gw, go, np.array([[[2.0]], [[5.0]]]),
                   np.array([[[[1.0]], [[1.0]]], [[[1.0]], [[1.0]]]]))
    # singular: 0.5*1*2 + 0.5*3*5 ; regular: 0.25*(2j - 2j)
    assert pair(rho, A) == pytest.approx(8.5)


def test_identity_kernel_and_normalized_trace(rng, small_grids):
    gw, go = small_grids
    I = identity(gw, go)
    assert I.is_identity
    assert_allclose(np.einsum("woo->wo", I.singular), np.broadcast_to(1 / go.weights, (gw.size, go.size)))
    rho = random_state(rng, gw, go)
    assert_allclose(pair(rho, I), 1.0, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(a=st.complex_numbers(max_magnitude=5), b=st.complex_numbers(max_magnitude=5),
       seed=st.integers(0, 2**16))
def test_pairing_bilinear_without_conjugation(a, b, seed):
    rng = np.random.default_rng(seed)
    gw, go = make_grid((0, 1), 5), make_grid((0, 1), 3, "gauss", "o")
    r1, r2 = random_state(rng, gw, go), random_state(rng, gw, go)
    A, B = random_observable(rng, gw, go), random_observable(rng, gw, go)
    lhs = pair(a * r1 + b * r2, A)
    assert lhs == pytest.approx(a * pair(r1, A) + b * pair(r2, A), rel=1e-10, abs=1e-10)
    lhs = pair(r1, a * A + b * B)
    assert lhs == pytest.approx(a * pair(r1, A) + b * pair(r1, B), rel=1e-10, abs=1e-10)


def test_self_adjoint_pairing_is_real(rng, small_grids):
    gw, go = small_grids
    rho, A = random_state(rng, gw, go), random_observable(rng, gw, go)
    assert A.is_self_adjoint()
    assert abs(pair(rho, A).imag) < 1e-12


def test_split_recombines(rng, small_grids):
    A = random_observable(rng, *small_grids)
    S, R = split(A)
    assert not np.any(S.regular) and not np.any(R.singular)
    assert_allclose((S + R).singular, A.singular)
    assert_allclose((S + R).regular, A.regular)


def test_point_mass_samples_and_interpolates():
    gw, go = make_grid((0, 1), 5), index_grid(1)
    A = Observable.diagonal(gw, go, (2 * gw.nodes + 1)[:, None])
    on_node = StateFunctional(gw, go, masses=[PointMass(0.25, 0, 0, 1.0)])
    between = StateFunctional(gw, go, masses=[PointMass(0.3, 0, 0, 2.0)])
    assert pair(on_node, A) == pytest.approx(1.5)
    assert pair(between, A) == pytest.approx(2.0 * 1.6)
    # identity contracts the delta against the mass itself
    assert pair(between, identity(gw, go)) == pytest.approx(2.0)
    with pytest.raises(InvalidArgumentError):
        pair(StateFunctional(gw, go, masses=[PointMass(1.5, 0, 0)]), A)


def test_check_state_diagnostics(rng, small_grids):
    gw, go = small_grids
    d = check_state(random_state(rng, gw, go))
    assert d.positive and d.hermitian and d.normalization_residual < 1e-13
    bad = StateFunctional(gw, go, -np.ones((gw.size, go.size, go.size)))
    d = check_state(bad)
    assert d.min_eigenvalue < 0 and not d.positive
    herm = np.zeros((gw.size, go.size, go.size), dtype=complex)
    herm[:, 0, 1] = 1j
    assert not check_state(StateFunctional(gw, go, herm)).hermitian


def test_normalize_and_degenerate(small_grids):
    gw, go = small_grids
    rho = StateFunctional(gw, go, np.full((gw.size, go.size, go.size), 3.0))
    assert_allclose(pair(normalize(rho), identity(gw, go)), 1.0)
    with pytest.raises(DegenerateStateError):
        normalize(StateFunctional(gw, go))


def test_shape_and_grid_errors(small_grids):
    gw, go = small_grids
    with pytest.raises(InvalidArgumentError):
        Observable(gw, go, np.zeros((2, 2, 2)), np.zeros((gw.size, gw.size, go.size, go.size)))
    with pytest.raises(InvalidArgumentError):
        StateFunctional(gw, go, regular=np.zeros((1, 1, 1, 1)))
    with pytest.raises(InvalidArgumentError):
        pair(StateFunctional(gw, go), identity(make_grid((0, 2), 8), go))
    with pytest.raises(InvalidArgumentError):
        StateFunctional(gw, go, np.zeros((gw.size, go.size, go.size)), masses=[PointMass(0, 0, 0)])
