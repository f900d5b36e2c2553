import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from sidlab.errors import InvalidArgumentError, PreconditionError, ResolutionError
from sidlab.phase_space import make_chart, sample_poly
from sidlab.phase_space.chart import PhaseSpaceFunction
from sidlab.phase_space.poly import (
    PolySymbol,
    moyal_series,
    poisson_bracket,
    poly_moyal,
    poly_star,
    star_series,
)
from sidlab.phase_space.star import (
    commuting_product_check,
    fit_order,
    halving_sequence,
    hbar_dependence,
    moyal_bracket,
    require_hbar_independent,
    star_product,
)

HB = sp.Symbol("hbar", positive=True)
q, p = PolySymbol.q(), PolySymbol.p()

coef = st.integers(-3, 3)


@st.composite
def polys(draw, max_deg=3, dof=1):
    terms = {}
    for _ in range(draw(st.integers(1, 4))):
        exps = tuple(draw(st.integers(0, max_deg)) for _ in range(2 * dof))
        if sum(exps) <= max_deg:
            terms[exps] = draw(coef)
    return PolySymbol(terms, dof)


def test_canonical_commutator_is_exact():
    assert poly_star(q, p, HB) - poly_star(p, q, HB) == PolySymbol.constant(sp.I * HB)
    assert star_series(q, p) == [q * p, PolySymbol.constant(sp.I / 2)]
    for h in (1.0, 0.3):
        diff = star_product(q, p, h) - star_product(p, q, h) - PolySymbol.constant(1j * h)
        assert diff.is_zero()


@settings(max_examples=30, deadline=None)
@given(f=polys(max_deg=2), g=polys(max_deg=4))
def test_moyal_equals_poisson_up_to_degree_two(f, g):
    assert poly_moyal(f, g, HB) == poisson_bracket(f, g)
    assert poly_moyal(g, f, HB) == poisson_bracket(g, f)


def test_degree_three_moyal_correction_term_by_term():
    # hand expansion: {q^3, p^3}_M = 9 q^2 p^2 - (3/2) hbar^2
    series = moyal_series(q**3, p**3)
    assert series[0] == PolySymbol({(2, 2): 9})
    assert series[1].is_zero()
    assert series[2] == PolySymbol.constant(sp.Rational(-3, 2))
    assert poly_moyal(q**3, p**3, HB) == PolySymbol({(2, 2): 9, (0, 0): -sp.Rational(3, 2) * HB**2})
    # q^3 with q p^2: the third-order term needs d^3/dp^3 of q p^2, which is zero
    assert poly_moyal(q**3, q * p**2, HB) == poisson_bracket(q**3, q * p**2)
    # q^3 p with p^3: Pi^3 = d_q^3(q^3 p) d_p^3(p^3) = 36 p, and
    # (2/i)(i/2)^3/3! * 36 p = -(3/2) p
    mb = moyal_series(q**3 * p, p**3)
    assert mb[0] == PolySymbol({(2, 3): 9})
    assert mb[1].is_zero()
    assert mb[2] == PolySymbol({(0, 1): sp.Rational(-3, 2)})


@settings(max_examples=15, deadline=None)
@given(f=polys(max_deg=2), g=polys(max_deg=2), h=polys(max_deg=2))
def test_star_product_associative(f, g, h):
    assert poly_star(poly_star(f, g, HB), h, HB) == poly_star(f, poly_star(g, h, HB), HB)


def test_two_dof_commutators():
    q1, q2 = PolySymbol.q(0, 2), PolySymbol.q(1, 2)
    p1, p2 = PolySymbol.p(0, 2), PolySymbol.p(1, 2)
    assert poly_star(q1, p1, HB) - poly_star(p1, q1, HB) == PolySymbol.constant(sp.I * HB, 2)
    assert (poly_star(q1, p2, HB) - poly_star(p2, q1, HB)).is_zero()
    assert poisson_bracket(q2, p2) == PolySymbol.constant(1, 2)


def _trig_chart(n=32):
    return make_chart(1, (-np.pi, np.pi), (-np.pi, np.pi), n)


def test_grid_star_matches_closed_form_series():
    chart = _trig_chart()
    Q, P = chart.mesh()
    f = PhaseSpaceFunction(chart, np.cos(Q), 1.0)
    g = PhaseSpaceFunction(chart, np.sin(P), 1.0)
    h, R = 0.4, 6
    # f depends on q only and g on p only: P^r(f, g) = (i/2)^r / r! f^(r)(q) g^(r)(p)
    exact = sum(h**r * (0.5j) ** r / math.factorial(r) * np.cos(Q + r * np.pi / 2)
                * np.sin(P + r * np.pi / 2) for r in range(R + 1))
    assert_allclose(star_product(f, g, h, R).values, exact, atol=1e-12)
    mb = moyal_bracket(f, g, h, 5).values
    exact_mb = sum(h ** (r - 1) * 2 / 1j * (0.5j) ** r / math.factorial(r)
                   * np.cos(Q + r * np.pi / 2) * np.sin(P + r * np.pi / 2) for r in (1, 3, 5))
    assert_allclose(mb, exact_mb, atol=1e-12)


def test_grid_star_rejects_unresolved_input():
    chart = _trig_chart()
    f = sample_poly(q, chart)   # sawtooth on a periodic chart
    with pytest.raises(ResolutionError):
        star_product(f, f, 0.5)
    with pytest.raises(InvalidArgumentError):
        star_product(q, f, 0.5)
    with pytest.raises(InvalidArgumentError):
        star_product(q, p, 0.5, order=-1)


def test_commuting_product_scaling_exponent_two():
    H = PolySymbol({(2, 0): sp.Rational(1, 2), (0, 2): sp.Rational(1, 2)})
    chart = make_chart(1, (-2, 2), (-2, 2), 32)
    rep = commuting_product_check(H, H * H, chart, halving_sequence())
    assert rep.passed and abs(rep.exponent - 2.0) < 1e-8
    # second order by hand: -(1/8) (G_qq + G_pp) with G = H^2, which is -H
    assert rep.leading_coefficient == -H


def test_commuting_product_exact_and_precondition():
    chart = make_chart(1, (-2, 2), (-2, 2), 16)
    rep = commuting_product_check(p, p * p, chart)
    assert rep.exact_zero and rep.passed
    with pytest.raises(PreconditionError):
        commuting_product_check(q, p, chart)
    with pytest.raises(InvalidArgumentError):
        commuting_product_check(p, p, chart, [1.0])


def test_fit_order_and_halving():
    hs = halving_sequence(1.0, 5)
    assert hs == (1.0, 0.5, 0.25, 0.125, 0.0625)
    assert fit_order(hs, [3 * h**2 for h in hs]) == pytest.approx(2.0)


def test_hbar_dependence_detection():
    chart = make_chart(1, (-1, 1), (-1, 1), 8)
    assert hbar_dependence(lambda h: q * q, chart).relative_change == 0.0
    require_hbar_independent(lambda h: q * q, chart)
    rep = hbar_dependence(lambda h: q * (1.0 / h), chart)
    assert rep.divergent and rep.growth_exponent == pytest.approx(-1.0)
    with pytest.raises(PreconditionError):
        require_hbar_independent(lambda h: q * (1.0 / h), chart)
    with pytest.raises(PreconditionError):
        require_hbar_independent(lambda h: q + h, chart)
