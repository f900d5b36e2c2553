"""Liouvillian evolution of kernels, mean values and the decohered state.

The Liouvillian acts diagonally on the kernel basis: singular kernels are
invariant and the regular kernel picks up ``exp(i (w - w') t / hbar)``.
Evolution is therefore exact entrywise phase multiplication; no ODE solver
is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import Observable, StateFunctional, _check_grids, _pair_singular, _weights4
from .errors import InvalidArgumentError
from .spectral import SpectralGrid


@dataclass(frozen=True)
class EvolutionParams:
    hbar: float
    times: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.hbar > 0:
            raise InvalidArgumentError(f"hbar must be positive, got {self.hbar}")
        times = tuple(float(t) for t in self.times)
        if any(t < 0 for t in times) or list(times) != sorted(times):
            raise InvalidArgumentError("times must be non-negative and ascending")
        object.__setattr__(self, "times", times)


def _hbar(params) -> float:
    return params.hbar if isinstance(params, EvolutionParams) else float(params)


def energy_gaps(grid_w: SpectralGrid) -> np.ndarray:
    """``(w - w')`` on the energy grid, indexed ``[w, w']``."""
    w = grid_w.nodes
    return w[:, None] - w[None, :]


def _phase(grid_w: SpectralGrid, t: float, hbar: float) -> np.ndarray:
    return np.exp(1j * energy_gaps(grid_w) * (t / hbar))


def evolve_observable(A: Observable, t: float, params) -> Observable:
    """Heisenberg picture ``A(t) = exp(-i t L / hbar) A``."""
    if not np.isfinite(t):
        raise InvalidArgumentError("t must be finite")
    if t == 0:
        return A
    phase = _phase(A.grid_w, t, _hbar(params))[:, :, None, None]
    return replace(A, regular=A.regular * phase)


def evolve_state(rho: StateFunctional, t: float, params) -> StateFunctional:
    """Schrodinger picture ``rho(t)`` obtained through the duality formula."""
    if t == 0:
        return rho
    phase = _phase(rho.grid_w, t, _hbar(params))[:, :, None, None]
    return rho.with_regular(rho.regular * phase)


def _fluct_coefficients(rho: StateFunctional, A: Observable) -> np.ndarray:
    """``C[w, w'] = sum_{o,o'} w_w w_w' w_o w_o' rho_R A_R``."""
    return np.sum(_weights4(A.grid_w, A.grid_o) * rho.regular * A.regular, axis=(2, 3))


def mean_value_parts(rho: StateFunctional, A: Observable, times, params):
    """Invariant term and fluctuating terms of ``(rho(t)|A)`` for each time."""
    _check_grids(rho.grid_w, rho.grid_o, A.grid_w, A.grid_o)
    hbar = _hbar(params)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    invariant = _pair_singular(rho, A)
    C = _fluct_coefficients(rho, A)
    if not np.any(C):
        return invariant, np.zeros(times.shape, dtype=complex)
    # sum over (w, w') of C * exp(i (w - w') t / hbar), batched over t
    gaps = energy_gaps(A.grid_w).ravel()
    nz = C.ravel() != 0
    fl = np.exp(1j * np.outer(times / hbar, gaps[nz])) @ C.ravel()[nz]
    return invariant, fl


def mean_value(rho: StateFunctional, A: Observable, t: float, params) -> complex:
    """``<A>_rho(t) = (rho|A(t)) = (rho(t)|A)``."""
    invariant, fl = mean_value_parts(rho, A, [t], params)
    return invariant + fl[0]


def decohered_state(rho: StateFunctional) -> StateFunctional:
    """Weak long-time limit ``rho_*``: the singular component alone."""
    if not rho.has_regular:
        return rho
    return rho.with_regular(np.zeros_like(rho.regular))


def revival_time(grid_w: SpectralGrid, params) -> float:
    """``2 pi hbar / dw``: the grid frequencies rephase after this time."""
    return 2.0 * np.pi * _hbar(params) / grid_w.spacing


def pre_revival_times(grid_w: SpectralGrid, params, n: int = 200, fraction: float = 0.5):
    return np.linspace(0.0, fraction * revival_time(grid_w, params), n)


@dataclass
class DecoherenceReport:
    t_D: float | None
    epsilon: float
    E_char: float | None
    E_spread: float | None
    heuristic_time: float | None
    revival_time: float
    fluct_trace: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "t_D": self.t_D,
            "epsilon": self.epsilon,
            "E_char": self.E_char,
            "E_spread": self.E_spread,
            "heuristic_time": self.heuristic_time,
            "revival_time": self.revival_time,
            "window_end": self.fluct_trace[-1][0] if self.fluct_trace else None,
            "notes": list(self.notes),
        }


def decoherence_time(rho: StateFunctional, A: Observable, params: EvolutionParams,
                     epsilon: float = 1e-3) -> DecoherenceReport:
    """Operational decoherence time from the fluctuating-term modulus.

    ``t_D`` is the first sampled time from which ``|fluct(t)|`` stays at or
    below ``epsilon * |fluct(0)|``. ``E_char`` is the centroid of ``|w - w'|``
    weighted by ``|rho_R A_R|``; ``heuristic_time`` is the time at which a
    Gaussian of the same gap spread would decay by ``epsilon``.
    """
    if not 0 < epsilon < 1:
        raise InvalidArgumentError("epsilon must lie in (0, 1)")
    hbar = params.hbar
    times = np.asarray(params.times if params.times else [0.0], dtype=float)
    if times[0] != 0.0:
        times = np.concatenate([[0.0], times])
    t_rev = revival_time(rho.grid_w, hbar)
    notes = ["finite grid: regular kernel integrable by construction"]
    if times[-1] >= t_rev:
        notes.append(f"sampled times reach the grid revival time {t_rev:.6g}")

    _, fl = mean_value_parts(rho, A, times, hbar)
    mod = np.abs(fl)
    trace = [(float(t), float(m)) for t, m in zip(times, mod)]

    C = np.abs(_fluct_coefficients(rho, A))
    if mod[0] == 0.0 or C.sum() == 0.0:
        return DecoherenceReport(0.0, epsilon, None, None, None, t_rev, trace, notes)

    gaps = np.abs(energy_gaps(rho.grid_w))
    wsum = C.sum()
    E_char = float(np.sum(C * gaps) / wsum)
    signed = energy_gaps(rho.grid_w)
    mean_signed = np.sum(C * signed) / wsum
    spread = float(np.sqrt(np.sum(C * (signed - mean_signed) ** 2) / wsum))
    heuristic = hbar * np.sqrt(2.0 * np.log(1.0 / epsilon)) / spread if spread > 0 else None

    above = np.flatnonzero(mod > epsilon * mod[0])
    if above.size == 0:
        t_D = float(times[0])
    elif above[-1] == times.size - 1:
        t_D = None
    else:
        t_D = float(times[above[-1] + 1])
    return DecoherenceReport(t_D, epsilon, E_char, spread, heuristic, t_rev, trace, notes)
