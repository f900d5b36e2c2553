import numpy as np
import pytest
from numpy.testing import assert_allclose

from sidlab.algebra import Observable, StateFunctional, pair
from sidlab.errors import InvalidArgumentError
from sidlab.evolution import (
    EvolutionParams,
    decoherence_time,
    decohered_state,
    evolve_observable,
    evolve_state,
    mean_value,
    mean_value_parts,
    pre_revival_times,
    revival_time,
)
from sidlab.spectral import index_grid, make_grid

from conftest import random_observable, random_state


def gaussian_coherence(n=64, center=5.0, width=0.7, s=0.5, a_r=1.0):
    """Energy profile g^2 of std ``width`` and regular kernel of spectral width ``s``."""
    gw, go = make_grid((0.0, 10.0), n), index_grid(1)
    g = np.exp(-0.25 * ((gw.nodes - center) / width) ** 2)
    gaps = gw.nodes[:, None] - gw.nodes[None, :]
    sing = (g**2)[:, None, None]
    reg = (np.outer(g, g) * np.exp(-0.5 * (gaps / s) ** 2))[:, :, None, None]
    rho = StateFunctional(gw, go, sing, reg)
    A = Observable(gw, go, np.ones((n, 1, 1)), np.full((n, n, 1, 1), a_r))
    return rho, A


def test_gaussian_decay_matches_closed_form():
    width, s, hbar = 0.7, 0.5, 1.0
    rho, A = gaussian_coherence(width=width, s=s)
    times = pre_revival_times(rho.grid_w, hbar)
    _, fl = mean_value_parts(rho, A, times, hbar)
    s_eff2 = 1.0 / (1.0 / s**2 + 1.0 / (4.0 * width**2))
    oracle = np.abs(fl[0]) * np.exp(-s_eff2 * times**2 / (2 * hbar**2))
    assert np.max(np.abs(np.abs(fl) - oracle)) < 1e-10 * np.abs(fl[0])


def test_two_level_phase_is_exact():
    gw, go = make_grid((1.0, 3.0), 2), index_grid(1)
    reg = np.zeros((2, 2, 1, 1), dtype=complex)
    reg[0, 1] = reg[1, 0] = 1.0
    rho = StateFunctional(gw, go, np.ones((2, 1, 1)), reg)
    A = Observable(gw, go, np.zeros((2, 1, 1)), np.ones((2, 2, 1, 1)))
    t = np.array([0.0, 0.7, 2.0])
    _, fl = mean_value_parts(rho, A, t, 0.5)
    w = 1.0 * 1.0  # trapezoid weights on two nodes of spacing 2
    assert_allclose(fl, w * 2 * np.cos(2.0 * t / 0.5), atol=1e-14)


def test_duality_and_singular_invariance(rng, small_grids):
    gw, go = small_grids
    rho, A = random_state(rng, gw, go), random_observable(rng, gw, go)
    for t in (0.0, 0.3, 7.1, 40.0):
        lhs = pair(evolve_state(rho, t, 0.7), A)
        assert lhs == pytest.approx(pair(rho, evolve_observable(A, t, 0.7)), abs=1e-13)
        assert lhs == pytest.approx(mean_value(rho, A, t, 0.7), abs=1e-13)
        assert_allclose(evolve_state(rho, t, 0.7).singular, rho.singular)


def test_revival_restores_fluctuating_term(rng, small_grids):
    gw, go = small_grids
    rho, A = random_state(rng, gw, go), random_observable(rng, gw, go)
    T = revival_time(gw, 0.3)
    assert T == pytest.approx(2 * np.pi * 0.3 / gw.spacing)
    _, fl = mean_value_parts(rho, A, [0.0, T], 0.3)
    assert fl[1] == pytest.approx(fl[0], abs=1e-10)


def test_decohered_state_is_long_time_limit():
    rho, A = gaussian_coherence()
    star = decohered_state(rho)
    assert not star.has_regular
    t_end = pre_revival_times(rho.grid_w, 1.0)[-1]
    assert abs(mean_value(rho, A, t_end, 1.0) - pair(star, A)) < 1e-10


def test_decoherence_time_cases():
    rho, A = gaussian_coherence()
    params = EvolutionParams(1.0, tuple(pre_revival_times(rho.grid_w, 1.0)))
    rep = decoherence_time(rho, A, params, 1e-3)
    s_eff = (1 / 0.25 + 1 / (4 * 0.49)) ** -0.5
    exact = np.sqrt(2 * np.log(1e3)) / s_eff
    step = params.times[1]
    assert exact <= rep.t_D <= exact + step
    assert rep.heuristic_time == pytest.approx(exact, rel=0.05)
    assert rep.E_char > 0 and rep.revival_time > params.times[-1]

    no_coherence = decohered_state(rho)
    assert decoherence_time(no_coherence, A, params).t_D == 0.0

    short = EvolutionParams(1.0, (0.0, 0.1, 0.2))
    assert decoherence_time(rho, A, short).t_D is None


def test_params_validation():
    with pytest.raises(InvalidArgumentError):
        EvolutionParams(0.0)
    with pytest.raises(InvalidArgumentError):
        EvolutionParams(1.0, (1.0, 0.5))
    with pytest.raises(InvalidArgumentError):
        EvolutionParams(1.0, (-1.0,))
    rho, A = gaussian_coherence(n=8)
    with pytest.raises(InvalidArgumentError):
        decoherence_time(rho, A, EvolutionParams(1.0), epsilon=2.0)
