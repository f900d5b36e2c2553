import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from sidlab.algebra import StateFunctional, pair
from sidlab.diagonal import (
    find_pointer_basis,
    identity_pointer_map,
    off_diagonal_mass,
    reconstruct_state,
    transform_observable,
    transform_state,
)
from sidlab.errors import InvalidArgumentError, InvalidStateError
from sidlab.evolution import decohered_state
from sidlab.spectral import index_grid, make_grid

from conftest import psd_singular, random_observable, random_state


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16), no=st.integers(1, 6),
       rule=st.sampled_from(["gauss", "trapezoid", "index"]))
def test_random_psd_kernels_diagonalize(seed, no, rule):
    rng = np.random.default_rng(seed)
    gw = make_grid((0, 1), 4)
    go = index_grid(no) if rule == "index" or no < 2 else make_grid((-1, 1), no, rule, "o")
    rho = StateFunctional(gw, go, psd_singular(rng, gw.size, go.size, go.weights))
    U, diag = find_pointer_basis(rho)
    assert U.unitarity_residual() < 1e-10
    assert off_diagonal_mass(transform_state(rho, U)) < 1e-10
    back = reconstruct_state(U, diag)
    assert np.max(np.abs(back.singular - rho.singular)) < 1e-10 * max(1, np.max(np.abs(rho.singular)))
    assert np.all(np.diff(diag.values, axis=1) <= 1e-12)


def test_hand_computed_eigenvalues():
    gw, go = make_grid((0, 1), 2), index_grid(2)
    block = np.array([[2.0, 1.0], [1.0, 2.0]])
    rho = StateFunctional(gw, go, np.stack([block, 2 * block]))
    _, diag = find_pointer_basis(rho)
    assert_allclose(diag.values, [[3, 1], [6, 2]], atol=1e-14)
    assert diag.total() == pytest.approx(0.5 * 4 + 0.5 * 8)


def test_pairing_invariant_under_pointer_map(rng, small_grids):
    gw, go = small_grids
    rho = decohered_state(random_state(rng, gw, go))
    A = random_observable(rng, gw, go)
    U, _ = find_pointer_basis(rho)
    lhs = pair(transform_state(rho, U), transform_observable(A, U))
    assert lhs == pytest.approx(pair(rho, A), abs=1e-12)
    # regular parts carry through the map as well
    full = random_state(rng, gw, go)
    lhs = pair(transform_state(full, U), transform_observable(A, U))
    assert lhs == pytest.approx(pair(full, A), abs=1e-12)


def test_identity_map_is_trivial(rng, small_grids):
    gw, go = small_grids
    U = identity_pointer_map(gw, go)
    assert U.unitarity_residual() < 1e-14
    rho = random_state(rng, gw, go)
    assert_allclose(transform_state(rho, U).singular, rho.singular * go.weights[None, :, None] ** 0.5
                    * go.weights[None, None, :] ** 0.5, atol=1e-12)


def test_degenerate_eigenvalues_are_deterministic():
    gw, go = make_grid((0, 1), 2), index_grid(3)
    rho = StateFunctional(gw, go, np.broadcast_to(np.eye(3), (2, 3, 3)))
    U1, d1 = find_pointer_basis(rho)
    U2, d2 = find_pointer_basis(rho)
    assert_allclose(U1.kernel, U2.kernel)
    assert_allclose(d1.values, 1.0)


def test_rejections(rng, small_grids):
    gw, go = small_grids
    with pytest.raises(InvalidArgumentError):
        find_pointer_basis(random_state(rng, gw, go))
    neg = StateFunctional(gw, go, -psd_singular(rng, gw.size, go.size, go.weights))
    with pytest.raises(InvalidStateError):
        find_pointer_basis(neg)
    other = make_grid((0, 3), 5)
    U, _ = find_pointer_basis(decohered_state(random_state(rng, gw, go)))
    with pytest.raises(InvalidArgumentError):
        transform_state(random_state(rng, other, go), U)
