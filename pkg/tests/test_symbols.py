import numpy as np
import pytest
from numpy.testing import assert_allclose

from sidlab.algebra import Observable, StateFunctional, normalize, pair
from sidlab.climit import free_translation, oscillator, two_mode
from sidlab.climit.appendix import diagonal_state_on
from sidlab.errors import InvalidArgumentError, UnsupportedModelError
from sidlab.phase_space import make_chart, sample_poly
from sidlab.phase_space.chart import PhaseSpaceFunction, symplectic_matrices
from sidlab.phase_space.poly import PolySymbol
from sidlab.phase_space.symbols import (
    _realization,
    density_kernel,
    observable_kernel,
    observable_symbol,
    state_symbol,
    symbol_pairing,
)


def test_symplectic_matrices_are_inverse():
    for d in (1, 2, 3):
        low, up = symplectic_matrices(d)
        assert_allclose(low @ up, np.eye(2 * d))
        assert_allclose(low, -low.T)


def test_chart_integration_and_poly_sampling():
    chart = make_chart(2, (-1, 1), (-2, 2), 8)
    assert chart.shape == (8,) * 4 and chart.dof == 2
    assert chart.integrate(np.ones(chart.shape)) == pytest.approx(2 * 2 * 4 * 4)
    f = sample_poly(PolySymbol.q(1, 2) * PolySymbol.p(0, 2), chart)
    _, q2, p1, _ = chart.mesh()
    assert_allclose(f.values, q2 * p1)
    with pytest.raises(InvalidArgumentError):
        sample_poly(PolySymbol.q(), chart)
    with pytest.raises(InvalidArgumentError):
        chart.integrate(np.ones(3))


def test_pairing_conventions_must_match():
    chart = make_chart(1, (-1, 1), (-1, 1), 4)
    a = PhaseSpaceFunction(chart, np.ones((4, 4)), 1.0, pairing_factor=0.5)
    b = PhaseSpaceFunction(chart, np.ones((4, 4)), 1.0)
    with pytest.raises(InvalidArgumentError):
        a.pair(b)
    with pytest.raises(InvalidArgumentError):
        PhaseSpaceFunction(chart, np.ones((3, 4)), 1.0)
    with pytest.raises(InvalidArgumentError):
        PhaseSpaceFunction(chart, np.ones((4, 4)), 1.0, meta="exact")


@pytest.mark.parametrize("factory,hbar", [(oscillator, 1.0), (oscillator, 0.25),
                                          (free_translation, 0.5)])
def test_symbol_pairing_reproduces_quantum_pairing(factory, hbar):
    model = factory()
    real = _realization(model, hbar)
    assert real.gram_residual() < 1e-10
    gw, go = real.grid_w, real.grid_o
    rho = diagonal_state_on(gw, go, lambda w: np.exp(-((w - gw.nodes[gw.size // 2]) ** 2)))
    # a non-diagonal coherent superposition across two levels as well
    k = np.zeros((gw.size, 1, 1), dtype=complex)
    k[1] = k[2] = 1.0
    mixed = normalize(StateFunctional(gw, go, k))
    for state in (rho, mixed):
        A = Observable.diagonal(gw, go, (gw.nodes**2 - 0.3 * gw.nodes)[:, None])
        Ws, Wa = state_symbol(state, model, hbar), observable_symbol(A, model, hbar)
        assert symbol_pairing(Ws, Wa) == pytest.approx(pair(state, A), abs=1e-10)
        assert Ws.integral() == pytest.approx(1.0, abs=1e-10)
        assert Ws.real_residual() < 1e-12


def test_kernels_are_hermitian_and_traced():
    model = oscillator()
    real = _realization(model, 0.5)
    gw, go = real.grid_w, real.grid_o
    rho = diagonal_state_on(gw, go, lambda w: 1.0 / (1 + w))
    K = density_kernel(rho, real)
    assert K.hermiticity_residual() < 1e-12
    assert K.trace() == pytest.approx(1.0, abs=1e-12)
    A = Observable.diagonal(gw, go, gw.nodes[:, None])
    assert observable_kernel(A, real).hermiticity_residual() < 1e-12


def test_unsupported_and_mismatched():
    with pytest.raises(UnsupportedModelError):
        state_symbol(None, two_mode(), 1.0)
    model = oscillator()
    real = _realization(model, 1.0)
    other = _realization(model, 0.5)
    rho = diagonal_state_on(other.grid_w, other.grid_o, lambda w: np.ones_like(w))
    with pytest.raises(InvalidArgumentError):
        density_kernel(rho, real)
