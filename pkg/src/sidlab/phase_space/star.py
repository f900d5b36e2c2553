"""Star products and Moyal brackets for exact and grid-sampled symbols.

Polynomial inputs go through the exact series in :mod:`.poly`. Grid inputs use
Fourier spectral derivatives along each axis, truncated at order ``R``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from ..errors import InvalidArgumentError, PreconditionError, ResolutionError
from .chart import PhaseSpaceChart, PhaseSpaceFunction, sample_poly
from .poly import PolySymbol, bidifferential_power, poly_moyal, poly_star, star_series

DEFAULT_ORDER = 6
MAX_ORDER = 12
SPECTRAL_TAIL_TOL = 1e-8


# grid backend ----------------------------------------------------------------

def _wavenumbers(chart: PhaseSpaceChart) -> list[np.ndarray]:
    ks = []
    for g in chart.axes:
        ks.append(2.0 * np.pi * np.fft.fftfreq(g.size, d=g.spacing))
    return ks


def spectral_tail_fraction(values: np.ndarray, chart: PhaseSpaceChart) -> float:
    """Share of spectral energy in the upper half of each axis' frequency band."""
    F = np.abs(np.fft.fftn(values)) ** 2
    total = F.sum()
    if total == 0:
        return 0.0
    mask = np.zeros(F.shape, dtype=bool)
    for axis, g in enumerate(chart.axes):
        k = np.abs(np.fft.fftfreq(g.size))
        sl = [None] * F.ndim
        sl[axis] = slice(None)
        mask |= (k > 0.25)[tuple(sl)]
    return float(F[mask].sum() / total)


class _Derivatives:
    """Cache of spectral derivatives ``D^alpha f`` for one grid function."""

    def __init__(self, f: PhaseSpaceFunction):
        self.chart = f.chart
        self.hat = np.fft.fftn(f.values)
        self.k = _wavenumbers(f.chart)
        self.cache: dict = {}

    def __call__(self, alpha) -> np.ndarray:
        alpha = tuple(alpha)
        if alpha not in self.cache:
            mult = np.ones(self.hat.shape, dtype=complex)
            for axis, (order, k) in enumerate(zip(alpha, self.k)):
                if order:
                    sl = [None] * self.hat.ndim
                    sl[axis] = slice(None)
                    mult = mult * ((1j * k) ** order)[tuple(sl)]
            self.cache[alpha] = np.fft.ifftn(self.hat * mult)
        return self.cache[alpha]


def _check_resolution(f: PhaseSpaceFunction, order: int):
    if order > MAX_ORDER:
        raise ResolutionError(f"order {order} exceeds the supported maximum {MAX_ORDER}")
    if order == 0:
        return
    tail = spectral_tail_fraction(f.values, f.chart)
    if tail > SPECTRAL_TAIL_TOL:
        raise ResolutionError(
            f"symbol under-resolved for spectral differentiation (tail energy fraction {tail:.3g})")


def grid_star_series(f: PhaseSpaceFunction, g: PhaseSpaceFunction, order: int) -> list[np.ndarray]:
    """Arrays ``P^r(f, g)`` for ``r = 0..order`` by spectral differentiation."""
    if f.chart.shape != g.chart.shape:
        raise InvalidArgumentError("symbols live on different charts")
    _check_resolution(f, order)
    _check_resolution(g, order)
    Df, Dg = _Derivatives(f), _Derivatives(g)
    out = []
    for r in range(order + 1):
        acc = np.zeros(f.chart.shape, dtype=complex)
        for (alpha, beta), c in bidifferential_power(f.chart.dof, r):
            acc += c * Df(alpha) * Dg(beta)
        out.append(((0.5j) ** r / factorial(r)) * acc)
    return out


# public API ------------------------------------------------------------------

def _order(order, default):
    if order is None:
        return default
    order = int(order)
    if order < 0:
        raise InvalidArgumentError("order R must be non-negative")
    return order


def star_product(f, g, hbar, order: int | None = None):
    """``sum_{r<=R} hbar^r P^r(f, g)``; exact for polynomials when ``R`` is omitted."""
    if isinstance(f, PolySymbol) and isinstance(g, PolySymbol):
        return poly_star(f, g, hbar, _order(order, None) if order is not None else None)
    if isinstance(f, PhaseSpaceFunction) and isinstance(g, PhaseSpaceFunction):
        R = _order(order, DEFAULT_ORDER)
        series = grid_star_series(f, g, R)
        vals = sum(float(hbar) ** r * s for r, s in enumerate(series))
        return PhaseSpaceFunction(f.chart, vals, float(hbar), "grid-sampled")
    raise InvalidArgumentError("star_product needs two PolySymbols or two PhaseSpaceFunctions")


def moyal_bracket(f, g, hbar, order: int | None = None):
    """``(f * g - g * f) / (i hbar)`` truncated at ``hbar^R``."""
    if isinstance(f, PolySymbol) and isinstance(g, PolySymbol):
        return poly_moyal(f, g, hbar, _order(order, None) if order is not None else None)
    if isinstance(f, PhaseSpaceFunction) and isinstance(g, PhaseSpaceFunction):
        R = _order(order, DEFAULT_ORDER)
        series = grid_star_series(f, g, R + 1)
        h = float(hbar)
        vals = np.zeros(f.chart.shape, dtype=complex)
        for r in range(1, R + 2, 2):
            vals += (2.0 / 1j) * h ** (r - 1) * series[r]
        return PhaseSpaceFunction(f.chart, vals, h, "grid-sampled")
    raise InvalidArgumentError("moyal_bracket needs two PolySymbols or two PhaseSpaceFunctions")


def poisson_on_grid(f: PhaseSpaceFunction, g: PhaseSpaceFunction) -> PhaseSpaceFunction:
    return PhaseSpaceFunction(f.chart, grid_star_series(f, g, 1)[1] / 0.5j, f.hbar)


def l2_norm(values, chart: PhaseSpaceChart) -> float:
    return float(np.sqrt(np.real(chart.integrate(np.abs(values) ** 2))))


def fit_order(hbars, deviations) -> float:
    """Slope of ``log deviation`` against ``log hbar``."""
    h = np.log(np.asarray(hbars, dtype=float))
    d = np.log(np.asarray(deviations, dtype=float))
    return float(np.polyfit(h, d, 1)[0])


def halving_sequence(start: float = 1.0, steps: int = 5) -> tuple[float, ...]:
    return tuple(start * 0.5**k for k in range(steps))


@dataclass
class ScalingReport:
    hbars: list
    deviations: list
    exponent: float | None
    passed: bool
    exact_zero: bool
    commutator_norm: float
    leading_coefficient: object = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "hbars": list(self.hbars),
            "deviations": list(self.deviations),
            "exponent": self.exponent,
            "passed": self.passed,
            "exact_zero": self.exact_zero,
            "commutator_norm": self.commutator_norm,
        }


def commuting_product_check(f, g, chart: PhaseSpaceChart, hbar_sequence=None,
                            target: float = 2.0, tol: float = 0.2,
                            commute_tol: float = 1e-10) -> ScalingReport:
    """Measure ``||f * g - f g||`` along an hbar sweep and fit its order.

    Commutation of the quantized operators is tested through the Moyal
    bracket, which is the exact symbol of their commutator.
    """
    hbars = tuple(hbar_sequence) if hbar_sequence is not None else halving_sequence()
    if len(hbars) < 2:
        raise InvalidArgumentError("need at least two hbar values")
    poly = isinstance(f, PolySymbol)

    def as_grid(x, h):
        return sample_poly(x, chart, h) if isinstance(x, PolySymbol) else x

    h0 = max(hbars)
    mb = moyal_bracket(f, g, h0)
    mb_vals = as_grid(mb, h0).values
    scale = l2_norm(as_grid(f, h0).values, chart) * l2_norm(as_grid(g, h0).values, chart)
    comm = l2_norm(mb_vals, chart) * h0
    if comm > commute_tol * max(scale, 1.0):
        raise PreconditionError(f"inputs do not commute (commutator norm {comm:.3g})")

    devs = []
    for h in hbars:
        if poly:
            diff = star_product(f, g, h) - f * g
            vals = sample_poly(diff, chart, h).values
        else:
            vals = star_product(f, g, h).values - f.values * g.values
        devs.append(l2_norm(vals, chart))

    leading = star_series(f, g, 2)[2] if poly else None
    if all(d == 0.0 for d in devs):
        return ScalingReport(list(hbars), devs, None, True, True, comm, leading,
                             ["deviation vanishes identically"])
    if any(d == 0.0 for d in devs):
        return ScalingReport(list(hbars), devs, None, False, False, comm, leading,
                             ["deviation vanishes at some but not all hbar"])
    exponent = fit_order(hbars, devs)
    return ScalingReport(list(hbars), devs, exponent, abs(exponent - target) <= tol,
                         False, comm, leading)


@dataclass
class HbarDependence:
    hbars: tuple
    relative_change: float
    growth_exponent: float | None
    divergent: bool


def hbar_dependence(symbol_at, chart: PhaseSpaceChart, hbars=(1.0, 0.5),
                    tol: float = 1e-10) -> HbarDependence:
    """Compare a symbol sampled at two hbar values.

    ``symbol_at(hbar)`` returns a PolySymbol, a PhaseSpaceFunction or an
    array. Growth as ``hbar`` shrinks flags an inverse-hbar factor.
    """
    h1, h2 = hbars
    vals = []
    for h in hbars:
        s = symbol_at(h)
        if isinstance(s, PolySymbol):
            s = sample_poly(s, chart, h)
        vals.append(s.values if isinstance(s, PhaseSpaceFunction) else np.asarray(s))
    n1, n2 = l2_norm(vals[0], chart), l2_norm(vals[1], chart)
    denom = max(n1, n2, 1e-300)
    rel = l2_norm(vals[0] - vals[1], chart) / denom
    growth = None
    if n1 > 0 and n2 > 0 and rel > tol:
        growth = float(np.log(n2 / n1) / np.log(h2 / h1))
    return HbarDependence((h1, h2), rel, growth, growth is not None and growth < -0.5)


def require_hbar_independent(symbol_at, chart, hbars=(1.0, 0.5), tol: float = 1e-10):
    rep = hbar_dependence(symbol_at, chart, hbars, tol)
    if rep.divergent:
        raise PreconditionError(
            f"symbol grows like hbar^{rep.growth_exponent:.2f} as hbar decreases")
    if rep.relative_change > tol:
        raise PreconditionError(f"symbol depends on hbar (relative change {rep.relative_change:.3g})")
    return rep
