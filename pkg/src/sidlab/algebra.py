"""Observables with singular + regular kernels, states as dual functionals.

Array layout used everywhere:

* singular kernels: ``(n_omega, n_o, n_o)`` indexed ``[w, o, o']``;
* regular kernels: ``(n_omega, n_omega, n_o, n_o)`` indexed ``[w, w', o, o']``.

The pairing ``(rho|A)`` is the two-term weighted sum over the grids with no
complex conjugation, so it is bilinear in ``rho`` and ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DegenerateStateError, InvalidArgumentError
from .spectral import SpectralGrid

HERMITIAN_TOL = 1e-12


def _weights3(grid_w: SpectralGrid, grid_o: SpectralGrid) -> np.ndarray:
    wo = grid_o.weights
    return grid_w.weights[:, None, None] * wo[None, :, None] * wo[None, None, :]


def _weights4(grid_w: SpectralGrid, grid_o: SpectralGrid) -> np.ndarray:
    ww = grid_w.weights
    wo = grid_o.weights
    return (
        ww[:, None, None, None]
        * ww[None, :, None, None]
        * wo[None, None, :, None]
        * wo[None, None, None, :]
    )


def _check_grids(a_w, a_o, b_w, b_o):
    if not (a_w.same_as(b_w) and a_o.same_as(b_o)):
        raise InvalidArgumentError("state and observable live on different grids")


@dataclass(frozen=True, eq=False)
class Observable:
    """Element of the observable algebra on a pair of spectral grids."""

    grid_w: SpectralGrid
    grid_o: SpectralGrid
    singular: np.ndarray
    regular: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        nw, no = self.grid_w.size, self.grid_o.size
        s = np.asarray(self.singular, dtype=complex)
        r = np.asarray(self.regular, dtype=complex)
        if s.shape != (nw, no, no):
            raise InvalidArgumentError(f"singular kernel shape {s.shape} != {(nw, no, no)}")
        if r.shape != (nw, nw, no, no):
            raise InvalidArgumentError(f"regular kernel shape {r.shape} != {(nw, nw, no, no)}")
        object.__setattr__(self, "singular", s)
        object.__setattr__(self, "regular", r)

    @classmethod
    def zeros(cls, grid_w, grid_o) -> "Observable":
        nw, no = grid_w.size, grid_o.size
        return cls(grid_w, grid_o, np.zeros((nw, no, no)), np.zeros((nw, nw, no, no)))

    @classmethod
    def singular_only(cls, grid_w, grid_o, kernel) -> "Observable":
        nw, no = grid_w.size, grid_o.size
        return cls(grid_w, grid_o, kernel, np.zeros((nw, nw, no, no)))

    @classmethod
    def diagonal(cls, grid_w, grid_o, values) -> "Observable":
        """``A_S = A(H, O)``: kernel ``values(w, o) delta(o - o')`` on the grid."""
        values = np.asarray(values, dtype=complex).reshape(grid_w.size, grid_o.size)
        kernel = np.zeros((grid_w.size, grid_o.size, grid_o.size), dtype=complex)
        idx = np.arange(grid_o.size)
        kernel[:, idx, idx] = values / grid_o.weights
        return cls.singular_only(grid_w, grid_o, kernel)

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    def hermiticity_residual(self) -> float:
        s = self.singular
        r = self.regular
        res_s = np.max(np.abs(s - np.conj(np.transpose(s, (0, 2, 1))))) if s.size else 0.0
        res_r = np.max(np.abs(r - np.conj(np.transpose(r, (1, 0, 3, 2))))) if r.size else 0.0
        return float(max(res_s, res_r))

    def is_self_adjoint(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_residual() <= tol

    def __add__(self, other: "Observable") -> "Observable":
        _check_grids(self.grid_w, self.grid_o, other.grid_w, other.grid_o)
        return Observable(self.grid_w, self.grid_o, self.singular + other.singular,
                          self.regular + other.regular)

    def __rmul__(self, c) -> "Observable":
        return Observable(self.grid_w, self.grid_o, c * self.singular, c * self.regular)


def identity(grid_w: SpectralGrid, grid_o: SpectralGrid) -> Observable:
    """The identity ``I = int |w,o><w,o|``: ``delta(o - o')`` as ``1/w_o`` on the diagonal."""
    ones = np.ones((grid_w.size, grid_o.size))
    A = Observable.diagonal(grid_w, grid_o, ones)
    return replace(A, kind="identity")


@dataclass(frozen=True)
class PointMass:
    """The functional ``weight * (eta, s, s'|``."""

    eta: float
    s: float
    s2: float
    weight: complex = 1.0


@dataclass(frozen=True, eq=False)
class StateFunctional:
    """Dual element ``rho = rho_S + rho_R``.

    The singular part is either a grid kernel (``singular``) or a finite list
    of weighted point masses (``masses``); ``representation`` records which.
    """

    grid_w: SpectralGrid
    grid_o: SpectralGrid
    singular: np.ndarray | None = None
    regular: np.ndarray | None = None
    masses: tuple[PointMass, ...] = ()
    representation: str = field(default="grid")

    def __post_init__(self):
        nw, no = self.grid_w.size, self.grid_o.size
        if self.masses:
            object.__setattr__(self, "representation", "point_mass")
            object.__setattr__(self, "masses", tuple(self.masses))
            if self.singular is not None:
                raise InvalidArgumentError("give either a singular kernel or point masses, not both")
        else:
            s = np.zeros((nw, no, no)) if self.singular is None else self.singular
            s = np.asarray(s, dtype=complex)
            if s.shape != (nw, no, no):
                raise InvalidArgumentError(f"singular kernel shape {s.shape} != {(nw, no, no)}")
            object.__setattr__(self, "singular", s)
        r = np.zeros((nw, nw, no, no)) if self.regular is None else self.regular
        r = np.asarray(r, dtype=complex)
        if r.shape != (nw, nw, no, no):
            raise InvalidArgumentError(f"regular kernel shape {r.shape} != {(nw, nw, no, no)}")
        object.__setattr__(self, "regular", r)

    @property
    def has_regular(self) -> bool:
        return bool(np.any(self.regular != 0))

    def with_regular(self, regular) -> "StateFunctional":
        return replace(self, regular=regular)

    def __add__(self, other: "StateFunctional") -> "StateFunctional":
        _check_grids(self.grid_w, self.grid_o, other.grid_w, other.grid_o)
        if self.masses or other.masses:
            if not (_zero(self.singular) and _zero(other.singular)):
                raise InvalidArgumentError("cannot add a grid kernel to a point-mass state")
            return StateFunctional(self.grid_w, self.grid_o, masses=self.masses + other.masses,
                                   regular=self.regular + other.regular)
        return StateFunctional(self.grid_w, self.grid_o, self.singular + other.singular,
                               self.regular + other.regular)

    def __rmul__(self, c) -> "StateFunctional":
        if self.masses:
            masses = tuple(replace(m, weight=c * m.weight) for m in self.masses)
            return StateFunctional(self.grid_w, self.grid_o, masses=masses, regular=c * self.regular)
        return StateFunctional(self.grid_w, self.grid_o, c * self.singular, c * self.regular)


def _zero(a) -> bool:
    return a is None or not np.any(a)


def _sample_singular(A: Observable, m: PointMass) -> complex:
    """Evaluate ``A(eta, s, s')``, exactly on nodes, multilinear in between."""
    coords = (m.eta, m.s, m.s2)
    grids = (A.grid_w, A.grid_o, A.grid_o)
    idx = []
    for x, g in zip(coords, grids):
        hit = np.flatnonzero(np.isclose(g.nodes, x, rtol=0.0, atol=1e-12 * max(1.0, abs(x))))
        idx.append(int(hit[0]) if hit.size else None)
    if all(i is not None for i in idx):
        return complex(A.singular[tuple(idx)])

    axes, point, table = [], [], A.singular
    for ax, (x, g, i) in enumerate(zip(coords, grids, idx)):
        if g.size == 1:
            if i is None:
                raise InvalidArgumentError(f"point mass coordinate {x} outside single-node grid")
            continue
        if not (g.nodes[0] <= x <= g.nodes[-1]):
            raise InvalidArgumentError(f"point mass coordinate {x} outside grid support")
        axes.append(g.nodes)
        point.append(x)
    keep = tuple(0 if g.size == 1 else slice(None) for g in grids)
    table = table[keep]
    re = RegularGridInterpolator(axes, table.real)(point)[0]
    im = RegularGridInterpolator(axes, table.imag)(point)[0]
    return complex(re, im)


def _pair_singular(rho: StateFunctional, A: Observable) -> complex:
    if rho.masses:
        total = 0j
        for m in rho.masses:
            if A.is_identity:
                # the delta(o - o') of I is contracted against the mass itself
                total += m.weight if np.isclose(m.s, m.s2) else 0.0
            else:
                total += m.weight * _sample_singular(A, m)
        return total
    return complex(np.sum(_weights3(A.grid_w, A.grid_o) * rho.singular * A.singular))


def _pair_regular(rho: StateFunctional, A: Observable) -> complex:
    if not np.any(rho.regular) or not np.any(A.regular):
        return 0j
    return complex(np.sum(_weights4(A.grid_w, A.grid_o) * rho.regular * A.regular))


def pair(rho: StateFunctional, A: Observable) -> complex:
    """``(rho|A)``: singular-singular plus regular-regular weighted sums."""
    _check_grids(rho.grid_w, rho.grid_o, A.grid_w, A.grid_o)
    return _pair_singular(rho, A) + _pair_regular(rho, A)


def split(A: Observable) -> tuple[Observable, Observable]:
    """Return ``(A_S, A_R)`` with ``A_S + A_R == A``."""
    zs = np.zeros_like(A.singular)
    zr = np.zeros_like(A.regular)
    return (
        Observable(A.grid_w, A.grid_o, A.singular.copy(), zr, kind=A.kind),
        Observable(A.grid_w, A.grid_o, zs, A.regular.copy()),
    )


def weighted_blocks(rho: StateFunctional) -> np.ndarray:
    """Per-energy matrices ``diag(sqrt w_o) rho(w,.,.) diag(sqrt w_o)``."""
    sq = np.sqrt(rho.grid_o.weights)
    return rho.singular * sq[None, :, None] * sq[None, None, :]


def _mass_blocks(rho: StateFunctional) -> list[np.ndarray]:
    by_eta: dict[float, dict[tuple[float, float], complex]] = {}
    for m in rho.masses:
        block = by_eta.setdefault(float(m.eta), {})
        key = (float(m.s), float(m.s2))
        block[key] = block.get(key, 0j) + complex(m.weight)
    mats = []
    for block in by_eta.values():
        labels = sorted({k[0] for k in block} | {k[1] for k in block})
        pos = {x: i for i, x in enumerate(labels)}
        M = np.zeros((len(labels), len(labels)), dtype=complex)
        for (s, s2), w in block.items():
            M[pos[s], pos[s2]] += w
        mats.append(M)
    return mats


@dataclass(frozen=True)
class StateDiagnostics:
    hermiticity_residual: float
    min_eigenvalue: float
    normalization_residual: float
    trace: complex

    @property
    def positive(self) -> bool:
        return self.min_eigenvalue >= -HERMITIAN_TOL

    @property
    def hermitian(self) -> bool:
        return self.hermiticity_residual <= HERMITIAN_TOL

    def to_dict(self) -> dict:
        return {
            "hermiticity_residual": self.hermiticity_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "normalization_residual": self.normalization_residual,
            "trace_re": float(np.real(self.trace)),
            "trace_im": float(np.imag(self.trace)),
            "positive": self.positive,
            "hermitian": self.hermitian,
        }


def check_state(rho: StateFunctional) -> StateDiagnostics:
    """Hermiticity, per-energy positivity and normalization of ``rho_S``."""
    if rho.masses:
        blocks = _mass_blocks(rho)
    else:
        blocks = list(weighted_blocks(rho))
    herm = max((float(np.max(np.abs(M - M.conj().T))) for M in blocks), default=0.0)
    min_eig = min(
        (float(np.min(np.linalg.eigvalsh(0.5 * (M + M.conj().T)))) for M in blocks),
        default=0.0,
    )
    trace = pair(rho, identity(rho.grid_w, rho.grid_o))
    return StateDiagnostics(herm, min_eig, float(abs(trace - 1.0)), trace)


def normalize(rho: StateFunctional) -> StateFunctional:
    """Rescale both kernels so that ``(rho|I) = 1``."""
    trace = pair(rho, identity(rho.grid_w, rho.grid_o))
    if abs(trace) < 1e-300:
        raise DegenerateStateError("state has zero trace and cannot be normalized")
    if trace == 1.0:
        return rho
    c = 1.0 / trace
    if abs(np.imag(c)) <= 1e-15 * abs(c):
        c = float(np.real(c))
    return c * rho
