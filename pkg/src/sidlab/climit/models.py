"""Reference integrable models with classical symbols and quantum kets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from ..errors import InvalidArgumentError
from ..phase_space.chart import PhaseSpaceChart, make_chart
from ..phase_space.poly import PolySymbol, poisson_bracket
from ..phase_space.star import halving_sequence
from ..phase_space.symbols import KetRealization
from ..phase_space.wigner import position_grid
from ..spectral import SpectralGrid, index_grid, make_grid


@dataclass(frozen=True, eq=False)
class ModelSpec:
    name: str
    chart: PhaseSpaceChart
    H_symbol: PolySymbol
    P_symbols: tuple
    ket_realization: Callable[[float], KetRealization] | None
    hbar_sequence: tuple
    omega_grid: SpectralGrid
    p_grid: SpectralGrid
    params: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.P_symbols)

    def H_values(self, chart: PhaseSpaceChart | None = None) -> np.ndarray:
        chart = chart or self.chart
        return self.H_symbol.evaluate(*chart.mesh()).real

    def P_values(self, chart: PhaseSpaceChart | None = None) -> list[np.ndarray]:
        chart = chart or self.chart
        mesh = chart.mesh()
        return [P.evaluate(*mesh).real for P in self.P_symbols]

    def check(self, tol: float = 1e-8) -> dict:
        """Symbol consistency: real, hbar-free, and in involution with H."""
        h = sp.Symbol("hbar")
        syms = (self.H_symbol,) + tuple(self.P_symbols)
        hbar_free = all(not any(sp.sympify(c).has(h) for c in s.terms.values()) for s in syms)
        real = all(s.is_real() for s in syms)
        mesh = self.chart.mesh()
        pb = 0.0
        for P in self.P_symbols:
            pb = max(pb, float(np.max(np.abs(poisson_bracket(self.H_symbol, P).evaluate(*mesh)))))
        return {"hbar_independent": hbar_free, "real": real,
                "poisson_residual": pb, "ok": hbar_free and real and pb <= tol}


def _levels_grid(nodes: np.ndarray, spacing: float) -> SpectralGrid:
    return SpectralGrid((float(nodes[0]), float(nodes[-1] + spacing)), nodes,
                        np.full(nodes.size, spacing), "omega", "periodic")


def free_translation(box: float = 8.0, n_x: int = 64, n: int = 64,
                     p_range: float = 1.5, hbar_sequence=None) -> ModelSpec:
    """``H = p`` on a periodic box of length ``box``; plane-wave kets."""
    if n_x % 4:
        raise InvalidArgumentError("n_x must be a multiple of 4")
    H = PolySymbol.p()
    chart = PhaseSpaceChart(
        (make_grid((-box / 2, box / 2), n, "periodic", "q1"),),
        (make_grid((-p_range, p_range), n, "periodic", "p1"),),
        "H = p, angle-free translation chart",
    )
    x_grid = position_grid(box / 2, n_x)

    def realize(hbar: float) -> KetRealization:
        j = np.arange(-(n_x // 4) + 1, n_x // 4)
        k = 2.0 * np.pi * j / box
        kets = np.exp(1j * np.outer(k, x_grid.nodes)) / np.sqrt(box)
        grid_w = _levels_grid(hbar * k, 2.0 * np.pi * hbar / box)
        return KetRealization(x_grid, grid_w, index_grid(1, "o"), kets[:, None, :], hbar, True)

    return ModelSpec("free_translation", chart, H, (), realize,
                     tuple(hbar_sequence or halving_sequence()),
                     make_grid((-1.0, 1.0), 41, "trapezoid"), index_grid(1),
                     {"box": box, "n_x": n_x, "n": n, "p_range": p_range})


def hermite_functions(x: np.ndarray, n_max: int, hbar: float) -> np.ndarray:
    """Oscillator eigenfunctions ``psi_0..psi_{n_max}`` by the stable recurrence."""
    y = x / np.sqrt(hbar)
    out = np.empty((n_max + 1, x.size))
    out[0] = (np.pi * hbar) ** -0.25 * np.exp(-0.5 * y**2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * y * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * y * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def oscillator_box(hbar: float, n_x: int) -> float:
    """Half-width making the position and Wigner momentum ranges equal."""
    return float(np.sqrt(np.pi * hbar * n_x / 4.0))


def oscillator(e_max: float | None = None, n_x: int = 64, n: int = 64, extent: float = 3.5,
               hbar_sequence=None, fill: float = 0.4) -> ModelSpec:
    """``H = (q^2 + p^2) / 2``; kets are Hermite functions up to energy ``e_max``.

    Without ``e_max`` the cutoff follows the position box: levels are kept
    while their classical radius stays below ``sqrt(fill)`` of the box
    half-width, which keeps about ``fill * pi * n_x / 8`` levels at any hbar.
    """
    q, p = PolySymbol.q(), PolySymbol.p()
    H = sp.Rational(1, 2) * (q * q + p * p)
    chart = make_chart(1, (-extent, extent), (-extent, extent), n,
                       note="action-angle form: H is the action times the unit frequency")

    def realize(hbar: float) -> KetRealization:
        x_grid = position_grid(oscillator_box(hbar, n_x), n_x)
        top = e_max if e_max is not None else 0.5 * fill * oscillator_box(hbar, n_x) ** 2
        n_max = int(np.floor(top / hbar - 0.5))
        if n_max < 0:
            raise InvalidArgumentError(f"no level below e_max={top} at hbar={hbar}")
        psi = hermite_functions(x_grid.nodes, n_max, hbar)
        psi /= np.sqrt(np.sum(psi**2, axis=1, keepdims=True) * x_grid.spacing)
        energies = hbar * (np.arange(n_max + 1) + 0.5)
        grid_w = _levels_grid(energies, hbar)
        return KetRealization(x_grid, grid_w, index_grid(1, "o"), psi[:, None, :], hbar, False)

    return ModelSpec("oscillator", chart, H, (), realize,
                     tuple(hbar_sequence or halving_sequence()),
                     make_grid((2.0, 3.0), 33, "trapezoid"), index_grid(1),
                     {"e_max": e_max, "fill": fill, "n_x": n_x, "n": n, "extent": extent,
                      "sigmas": (0.33, 0.31, 0.29)})


def two_mode(n: int = 24, extent: float = 3.0, hbar_sequence=None) -> ModelSpec:
    """Two uncoupled unit oscillators with ``P = (q2^2 + p2^2) / 2``."""
    q1, q2 = PolySymbol.q(0, 2), PolySymbol.q(1, 2)
    p1, p2 = PolySymbol.p(0, 2), PolySymbol.p(1, 2)
    half = sp.Rational(1, 2)
    P = half * (q2 * q2 + p2 * p2)
    H = half * (q1 * q1 + p1 * p1) + P
    chart = make_chart(2, (-extent, extent), (-extent, extent), n,
                       note="two actions (H - P, P) with two angles")
    return ModelSpec("two_mode", chart, H, (P,), None,
                     tuple(hbar_sequence or halving_sequence()),
                     make_grid((1.5, 2.5), 11, "trapezoid"),
                     make_grid((0.5, 1.0), 6, "trapezoid", label="p"),
                     {"n": n, "extent": extent})


MODELS = {"free_translation": free_translation, "oscillator": oscillator, "two_mode": two_mode}


def build_model(name: str, **params) -> ModelSpec:
    try:
        factory = MODELS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return factory(**params)
