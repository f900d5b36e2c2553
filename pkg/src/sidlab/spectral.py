"""Discretized continuous spectra and the quadrature rules built on them.

Every integral over a spectral variable (energy, extra CSCO labels, pointer
labels, phase-space axes) is a weighted sum over the nodes of a
:class:`SpectralGrid`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

RULES = ("trapezoid", "gauss", "periodic", "index")


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Nodes and non-negative weights on a closed interval.

    ``rule`` is one of

    * ``trapezoid``: composite trapezoid, endpoints included (default);
    * ``gauss``: Gauss-Legendre nodes mapped to the interval;
    * ``periodic``: rectangle rule on ``[a, b)``, right endpoint excluded;
    * ``index``: unit weights on the integers ``0..n-1`` (eigen-index axes).
    """

    support: tuple[float, float]
    nodes: np.ndarray
    weights: np.ndarray
    label: str = "omega"
    rule: str = "trapezoid"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "support", (float(self.support[0]), float(self.support[1])))

    def __len__(self):
        return self.nodes.size

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def spacing(self) -> float:
        """Smallest gap between neighbouring nodes."""
        if self.size < 2:
            return float(self.support[1] - self.support[0]) or 1.0
        return float(np.min(np.diff(self.nodes)))

    @property
    def length(self) -> float:
        return self.support[1] - self.support[0]

    def same_as(self, other: "SpectralGrid") -> bool:
        return (
            self.size == other.size
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "rule": self.rule,
            "support": list(self.support),
            "n": self.size,
        }


def make_grid(support, n: int, rule: str = "trapezoid", label: str = "omega") -> SpectralGrid:
    """Build a :class:`SpectralGrid` with ``n`` nodes on ``support``."""
    a, b = (float(s) for s in support)
    if rule not in RULES:
        raise InvalidArgumentError(f"unknown quadrature rule {rule!r}")
    n = int(n)
    if rule == "index":
        if n < 1:
            raise InvalidArgumentError("index grid needs at least one node")
        nodes = np.arange(n, dtype=float)
        return SpectralGrid((0.0, float(n - 1)), nodes, np.ones(n), label, rule)
    if n < 2:
        raise InvalidArgumentError(f"need n >= 2 nodes, got {n}")
    if not np.isfinite(a) or not np.isfinite(b) or not b > a:
        raise InvalidArgumentError(f"degenerate support [{a}, {b}]")

    if rule == "trapezoid":
        nodes = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        weights = np.full(n, h)
        weights[0] = weights[-1] = 0.5 * h
    elif rule == "periodic":
        h = (b - a) / n
        nodes = a + h * np.arange(n)
        weights = np.full(n, h)
    else:
        x, w = np.polynomial.legendre.leggauss(n)
        nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
        weights = 0.5 * (b - a) * w
    return SpectralGrid((a, b), nodes, weights, label, rule)


def index_grid(n: int, label: str = "p") -> SpectralGrid:
    return make_grid((0, max(n - 1, 1)), n, rule="index", label=label)


def quad_integrate(values, grid: SpectralGrid) -> complex:
    """Weighted sum ``sum_i values_i * weights_i``."""
    values = np.asarray(values)
    if values.shape != grid.nodes.shape:
        raise InvalidArgumentError(
            f"values have shape {values.shape}, grid has {grid.nodes.shape}"
        )
    return np.sum(values * grid.weights)


def truncation_mass(density, grid: SpectralGrid, tail_fraction: float = 0.05) -> float:
    """Fraction of ``|density|`` mass sitting in the outermost nodes.

    Used as a diagnostic for the cut-off of a half-infinite energy axis: the
    reported number is the share of the total integral carried by the last
    ``tail_fraction`` of the grid.
    """
    mag = np.abs(np.asarray(density, dtype=complex)) * grid.weights
    total = mag.sum()
    if total == 0:
        return 0.0
    k = max(1, int(np.ceil(tail_fraction * grid.size)))
    return float(mag[-k:].sum() / total)
