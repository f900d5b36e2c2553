"""Exact sparse polynomial symbols and their star-product series.

Coefficients are sympy numbers, so identities such as ``q*p - p*q = i hbar``
hold exactly rather than to rounding. The bidifferential operator is

    Pi(f, g) = sum_k (d_qk f)(d_pk g) - (d_pk f)(d_qk g)

and the star product is ``f * g = sum_r hbar^r (i/2)^r / r! Pi^r(f, g)``.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np
import sympy as sp

from ..errors import InvalidArgumentError

Monomial = tuple  # (q exponents..., p exponents...), length 2 * dof


def _num(c):
    return sp.nsimplify(c) if isinstance(c, float) and float(c).is_integer() else sp.sympify(c)


class PolySymbol:
    """Polynomial ``sum c_m q^a p^b`` on a ``2 * dof`` dimensional phase space."""

    __slots__ = ("dof", "terms")

    def __init__(self, terms=None, dof: int = 1):
        self.dof = int(dof)
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != 2 * self.dof or any(e < 0 for e in mono):
                raise InvalidArgumentError(f"bad monomial {mono} for dof={self.dof}")
            c = _num(c)
            if c != 0:
                clean[mono] = clean.get(mono, sp.Integer(0)) + c
        self.terms = {m: c for m, c in clean.items() if c != 0}

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, c, dof: int = 1) -> "PolySymbol":
        return cls({(0,) * (2 * dof): c}, dof)

    @classmethod
    def q(cls, i: int = 0, dof: int = 1) -> "PolySymbol":
        mono = [0] * (2 * dof)
        mono[i] = 1
        return cls({tuple(mono): 1}, dof)

    @classmethod
    def p(cls, i: int = 0, dof: int = 1) -> "PolySymbol":
        mono = [0] * (2 * dof)
        mono[dof + i] = 1
        return cls({tuple(mono): 1}, dof)

    @classmethod
    def from_sympy(cls, expr, qs, ps) -> "PolySymbol":
        poly = sp.Poly(sp.expand(expr), *qs, *ps)
        return cls(dict(poly.terms()), len(qs))

    # algebra --------------------------------------------------------------
    def _coerce(self, other) -> "PolySymbol":
        if isinstance(other, PolySymbol):
            if other.dof != self.dof:
                raise InvalidArgumentError("symbols have different numbers of degrees of freedom")
            return other
        return PolySymbol.constant(other, self.dof)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return PolySymbol(terms, self.dof)

    __radd__ = __add__

    def __neg__(self):
        return PolySymbol({m: -c for m, c in self.terms.items()}, self.dof)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                terms[m] = terms.get(m, 0) + c1 * c2
        return PolySymbol(terms, self.dof)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = PolySymbol.constant(1, self.dof)
        for _ in range(int(n)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, PolySymbol):
            other = PolySymbol.constant(other, self.dof)
        return self.dof == other.dof and (self - other).is_zero()

    def __hash__(self):
        return hash((self.dof, frozenset(self.terms.items())))

    def __repr__(self):
        return f"PolySymbol({self.to_sympy()})"

    def is_zero(self) -> bool:
        return not self.terms or all(sp.simplify(c) == 0 for c in self.terms.values())

    def simplify(self) -> "PolySymbol":
        return PolySymbol({m: sp.expand(sp.simplify(c)) for m, c in self.terms.items()}, self.dof)

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def diff(self, axis: int, order: int = 1) -> "PolySymbol":
        """Derivative along phase-space axis ``axis`` (q's first, then p's)."""
        terms = {}
        for m, c in self.terms.items():
            e = m[axis]
            if e < order:
                continue
            nm = list(m)
            nm[axis] = e - order
            terms[tuple(nm)] = c * sp.ff(e, order)
        return PolySymbol(terms, self.dof)

    def diff_multi(self, alpha) -> "PolySymbol":
        out = self
        for axis, k in enumerate(alpha):
            if k:
                out = out.diff(axis, k)
        return out

    def subs_hbar(self, hbar_symbol, value) -> "PolySymbol":
        return PolySymbol({m: sp.sympify(c).subs(hbar_symbol, value) for m, c in self.terms.items()},
                          self.dof)

    def coefficients(self) -> dict:
        return {m: complex(sp.N(c)) for m, c in self.terms.items()}

    def evaluate(self, *coords) -> np.ndarray:
        """Evaluate on arrays ``q_1..q_d, p_1..p_d`` (broadcasting)."""
        if len(coords) != 2 * self.dof:
            raise InvalidArgumentError(f"need {2 * self.dof} coordinate arrays")
        coords = [np.asarray(c, dtype=float) for c in coords]
        shape = np.broadcast(*coords).shape
        out = np.zeros(shape, dtype=complex)
        for m, c in self.coefficients().items():
            term = np.full(shape, c, dtype=complex)
            for x, e in zip(coords, m):
                if e:
                    term = term * x**e
            out += term
        return out

    def is_real(self) -> bool:
        return all(sp.im(c) == 0 for c in self.terms.values())

    def to_sympy(self, qs=None, ps=None):
        if qs is None:
            qs = sp.symbols(f"q1:{self.dof + 1}") if self.dof > 1 else (sp.Symbol("q"),)
        if ps is None:
            ps = sp.symbols(f"p1:{self.dof + 1}") if self.dof > 1 else (sp.Symbol("p"),)
        xs = list(qs) + list(ps)
        return sp.Add(*[c * sp.Mul(*[x**e for x, e in zip(xs, m)]) for m, c in self.terms.items()])


@lru_cache(maxsize=None)
def bidifferential_power(dof: int, r: int) -> tuple:
    """Expansion of ``Pi^r`` as ``((alpha, beta), integer coefficient)`` pairs."""
    terms = {((0,) * (2 * dof), (0,) * (2 * dof)): 1}
    for _ in range(r):
        nxt: dict = {}
        for (a, b), c in terms.items():
            for k in range(dof):
                for fa, gb, sign in ((k, dof + k, 1), (dof + k, k, -1)):
                    na = list(a)
                    nb = list(b)
                    na[fa] += 1
                    nb[gb] += 1
                    key = (tuple(na), tuple(nb))
                    nxt[key] = nxt.get(key, 0) + sign * c
        terms = {k: v for k, v in nxt.items() if v}
    return tuple(terms.items())


def bidifferential(f: PolySymbol, g: PolySymbol, r: int) -> PolySymbol:
    """``Pi^r(f, g)`` without the ``(i/2)^r / r!`` prefactor."""
    out = PolySymbol({}, f.dof)
    for (alpha, beta), c in bidifferential_power(f.dof, r):
        df = f.diff_multi(alpha)
        if not df.terms:
            continue
        dg = g.diff_multi(beta)
        if not dg.terms:
            continue
        out = out + c * (df * dg)
    return out


def star_series(f: PolySymbol, g: PolySymbol, order: int | None = None) -> list[PolySymbol]:
    """Coefficients ``P^r(f, g)`` of ``hbar^r`` in ``f * g`` for ``r = 0..order``.

    With ``order=None`` the series runs until it terminates.
    """
    if order is not None and order < 0:
        raise InvalidArgumentError("star-product order must be non-negative")
    top = min(f.degree, g.degree)
    R = top if order is None else order
    series = []
    for r in range(R + 1):
        if r > top:
            series.append(PolySymbol({}, f.dof))
            continue
        pref = (sp.I / 2) ** r / sp.Integer(factorial(r))
        series.append(pref * bidifferential(f, g, r))
    return series


def _sum_series(series, hbar) -> PolySymbol:
    h = sp.sympify(hbar)
    out = PolySymbol({}, series[0].dof)
    for r, term in enumerate(series):
        if term.terms:
            out = out + (h**r) * term
    return out


def poly_star(f: PolySymbol, g: PolySymbol, hbar, order: int | None = None) -> PolySymbol:
    return _sum_series(star_series(f, g, order), hbar)


def poisson_bracket(f: PolySymbol, g: PolySymbol) -> PolySymbol:
    return bidifferential(f, g, 1)


def moyal_series(f: PolySymbol, g: PolySymbol, order: int | None = None) -> list[PolySymbol]:
    """Coefficients of ``hbar^k`` in the Moyal bracket, ``k = 0..order``.

    Only odd ``r`` survive the antisymmetrization, giving
    ``hbar^(r-1) * 2 P^r(f, g) / i``.
    """
    if order is not None and order < 0:
        raise InvalidArgumentError("Moyal order must be non-negative")
    top = min(f.degree, g.degree)
    K = max(top - 1, 0) if order is None else order
    star = star_series(f, g, min(K + 1, top))
    out = []
    for k in range(K + 1):
        r = k + 1
        if r % 2 == 1 and r < len(star):
            out.append((2 / sp.I) * star[r])
        else:
            out.append(PolySymbol({}, f.dof))
    return out


def poly_moyal(f: PolySymbol, g: PolySymbol, hbar, order: int | None = None) -> PolySymbol:
    return _sum_series(moyal_series(f, g, order), hbar)
