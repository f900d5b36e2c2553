"""Phase-space charts and grid-sampled phase-space functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError
from ..spectral import SpectralGrid, make_grid

SYMBOL_CLASSES = ("polynomial-exact", "grid-sampled")


def symplectic_matrices(dof: int) -> tuple[np.ndarray, np.ndarray]:
    """``omega_ab`` and its inverse ``omega^ab`` in (q..., p...) ordering."""
    eye = np.eye(dof, dtype=np.int64)
    zero = np.zeros((dof, dof), dtype=np.int64)
    lower = np.block([[zero, eye], [-eye, zero]])
    upper = np.block([[zero, -eye], [eye, zero]])
    return lower, upper


@dataclass(frozen=True, eq=False)
class PhaseSpaceChart:
    """Product grid over ``(q_1..q_d, p_1..p_d)`` with its symplectic data."""

    q_grids: tuple[SpectralGrid, ...]
    p_grids: tuple[SpectralGrid, ...]
    canonical_chart_note: str | None = None
    symplectic_form: np.ndarray = field(init=False, repr=False)
    inverse_form: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q, p = tuple(self.q_grids), tuple(self.p_grids)
        if not q or len(q) != len(p):
            raise InvalidArgumentError("need one q grid and one p grid per degree of freedom")
        object.__setattr__(self, "q_grids", q)
        object.__setattr__(self, "p_grids", p)
        lower, upper = symplectic_matrices(len(q))
        object.__setattr__(self, "symplectic_form", lower)
        object.__setattr__(self, "inverse_form", upper)

    @property
    def dof(self) -> int:
        return len(self.q_grids)

    @property
    def axes(self) -> tuple[SpectralGrid, ...]:
        return self.q_grids + self.p_grids

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(g.size for g in self.axes)

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*[g.nodes for g in self.axes], indexing="ij")

    def cell_weights(self) -> np.ndarray:
        w = np.ones(())
        for g in self.axes:
            w = np.multiply.outer(w, g.weights)
        return w

    def integrate(self, values) -> complex:
        values = np.asarray(values)
        if values.shape != self.shape:
            raise InvalidArgumentError(f"values have shape {values.shape}, chart is {self.shape}")
        return np.sum(values * self.cell_weights())

    def spacings(self) -> tuple[float, ...]:
        return tuple(g.spacing for g in self.axes)

    def to_dict(self) -> dict:
        return {
            "dof": self.dof,
            "axes": [g.to_dict() for g in self.axes],
            "note": self.canonical_chart_note,
        }


def make_chart(dof: int, q_support, p_support, n: int, rule: str = "periodic",
               note: str | None = None) -> PhaseSpaceChart:
    """Uniform chart with the same support and node count on every q (resp. p) axis."""
    if dof < 1:
        raise InvalidArgumentError("dof must be at least 1")
    qg = tuple(make_grid(q_support, n, rule, label=f"q{i + 1}") for i in range(dof))
    pg = tuple(make_grid(p_support, n, rule, label=f"p{i + 1}") for i in range(dof))
    return PhaseSpaceChart(qg, pg, note)


@dataclass(frozen=True, eq=False)
class PhaseSpaceFunction:
    """Values of a symbol on a chart.

    ``state`` marks Wigner functions of states, which carry the extra
    ``1 / (2 pi hbar)^dof`` normalization so that they integrate to the trace.
    ``pairing_factor`` corrects the product pairing of symbols built from
    periodic kernels, where the midpoint sum visits each even-parity index
    pair twice.
    """

    chart: PhaseSpaceChart
    values: np.ndarray
    hbar: float
    meta: str = "grid-sampled"
    state: bool = False
    pairing_factor: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.chart.shape:
            raise InvalidArgumentError(
                f"values have shape {values.shape}, chart is {self.chart.shape}")
        if not self.hbar > 0:
            raise InvalidArgumentError("hbar must be positive")
        if self.meta not in SYMBOL_CLASSES:
            raise InvalidArgumentError(f"unknown symbol class {self.meta!r}")
        object.__setattr__(self, "values", values)

    def integral(self) -> complex:
        return self.chart.integrate(self.values)

    def pair(self, other: "PhaseSpaceFunction") -> complex:
        """Phase-space pairing ``int f g dphi`` (no conjugation)."""
        if other.chart.shape != self.chart.shape:
            raise InvalidArgumentError("functions live on different charts")
        if self.pairing_factor != other.pairing_factor:
            raise InvalidArgumentError("functions carry different pairing conventions")
        return self.pairing_factor * self.chart.integrate(self.values * other.values)

    def real_residual(self) -> float:
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return float(np.max(np.abs(self.values.imag)) / scale)

    def with_values(self, values) -> "PhaseSpaceFunction":
        return PhaseSpaceFunction(self.chart, values, self.hbar, self.meta, self.state,
                                 self.pairing_factor)


def sample_poly(poly, chart: PhaseSpaceChart, hbar: float = 1.0) -> PhaseSpaceFunction:
    """Evaluate a :class:`~sidlab.phase_space.poly.PolySymbol` on the chart."""
    if poly.dof != chart.dof:
        raise InvalidArgumentError("symbol and chart have different dof")
    return PhaseSpaceFunction(chart, poly.evaluate(*chart.mesh()), hbar, "polynomial-exact")
