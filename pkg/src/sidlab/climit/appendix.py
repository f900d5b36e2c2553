"""Phase-space evolution cross-check and positivity of small-hbar Wigner functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ..algebra import Observable, StateFunctional, pair
from ..diagonal import find_pointer_basis, transform_observable
from ..evolution import _fluct_coefficients, decohered_state, energy_gaps, mean_value_parts
from ..errors import InvalidArgumentError, PreconditionError
from ..phase_space.symbols import state_symbol
from ..spectral import SpectralGrid
from .limits import classical_distribution, gaussian_delta
from .models import ModelSpec


@dataclass
class EvolutionComparison:
    times: list
    quantum_trace: list
    phase_trace: list
    invariant_quantum: float
    invariant_phase: float
    sigmas: list
    smoothed_invariants: list
    route_residual: float
    limit_residual: float
    late_time_residual: float
    c_constant: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "times": list(self.times),
            "invariant_quantum": self.invariant_quantum,
            "invariant_phase": self.invariant_phase,
            "sigmas": list(self.sigmas),
            "smoothed_invariants": list(self.smoothed_invariants),
            "route_residual": self.route_residual,
            "limit_residual": self.limit_residual,
            "late_time_residual": self.late_time_residual,
            "c_constant": self.c_constant,
            "notes": list(self.notes),
        }


def richardson_zero(sigmas, values) -> float:
    """Extrapolate ``values(sigma)`` to ``sigma = 0`` as a polynomial in ``sigma^2``."""
    s2 = np.asarray(sigmas, dtype=float) ** 2
    coef = np.polyfit(s2, np.asarray(values, dtype=float), len(s2) - 1)
    return float(np.polyval(coef, 0.0))


def smoothed_invariant(diag, a: np.ndarray, model: ModelSpec, sigma: float) -> float:
    """``int rho_c(phi) A(H(phi), P(phi)) dphi`` for one regularization width.

    ``a[w, p]`` is the pointer-basis symbol of the observable on the energy
    grid, continued to all ``H`` by a cubic spline in ``omega``.
    """
    rho_c = classical_distribution(diag, model, sigma)
    H = model.H_values()
    Ps = model.P_values()
    labels = np.asarray(diag.label_values(), dtype=float)
    if model.N == 0:
        spline = CubicSpline(diag.grid_w.nodes, np.real(a[:, 0]))
        return float(np.real(model.chart.integrate(rho_c.values * spline(H))))
    # with extra constants of motion the symbol is continued term by term
    total = 0.0
    ww = diag.grid_w.weights[:, None] * diag.grid_p.weights[None, :]
    for j in range(diag.values.shape[1]):
        spline = CubicSpline(diag.grid_w.nodes, np.real(a[:, j]))
        Aphi = spline(H)
        for i, w in enumerate(diag.grid_w.nodes):
            if diag.values[i, j] == 0:
                continue
            dens = gaussian_delta(H - w, sigma)
            for Pv, pk in zip(Ps, np.broadcast_to(labels[i, j], (model.N,))):
                dens = dens * gaussian_delta(Pv - pk, sigma)
            total += ww[i, j] * np.real(diag.values[i, j]) * float(
                np.real(model.chart.integrate(dens * Aphi))) / rho_c.C[i, j]
    return total


def oscillatory_integral(rho: StateFunctional, A: Observable, times, hbar: float) -> np.ndarray:
    """``int int rho_R A_R exp(i (w - w') t / hbar) dw dw'`` for each time."""
    C = _fluct_coefficients(rho, A)
    gaps = energy_gaps(rho.grid_w)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return np.array([np.sum(C * np.exp(1j * gaps * t / hbar)) for t in times])


def phase_space_evolution(rho: StateFunctional, A: Observable, model: ModelSpec, times,
                          hbar: float, sigmas=None) -> EvolutionComparison:
    """Compare the quantum mean value with its phase-space counterpart.

    The invariant term is the phase-space integral of ``rho_c`` against the
    observable's symbol, Richardson-extrapolated in ``sigma^2`` to remove the
    delta regularization; the fluctuating term is the oscillatory kernel
    integral.
    """
    if sigmas is None:
        sigmas = model.params.get("sigmas", (0.33, 0.31, 0.29))
    sigmas = list(sigmas)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    inv_q, fl_q = mean_value_parts(rho, A, times, hbar)
    quantum = inv_q + fl_q

    rho_star = decohered_state(rho)
    U, diag = find_pointer_basis(rho_star)
    Ap = transform_observable(A, U)
    idx = np.arange(U.grid_p.size)
    a = Ap.singular[:, idx, idx] * (U.grid_p.weights**2)[None, :]
    smoothed = [smoothed_invariant(diag, a, model, s) for s in sigmas]
    inv_ps = richardson_zero(sigmas, smoothed)
    fl_ps = oscillatory_integral(rho, A, times, hbar)
    phase = inv_ps + fl_ps

    exact = float(np.real(pair(rho_star, A)))
    notes = []
    if np.max(np.abs(np.imag(quantum))) > 1e-10:
        notes.append("mean value has an imaginary part: observable not self-adjoint")
    c_const = classical_distribution(diag, model, min(sigmas)).c_constant
    return EvolutionComparison(
        times.tolist(), quantum.tolist(), phase.tolist(), float(np.real(inv_q)), inv_ps,
        sigmas, smoothed,
        float(np.max(np.abs(quantum - phase))),
        abs(inv_ps - exact),
        float(abs(quantum[-1] - inv_q)),
        c_const, notes,
    )


# positivity --------------------------------------------------------------------

@dataclass
class PositivityReport:
    hbars: list
    min_eigenvalues: list          # per hbar, over all point sets
    bochner_min_eigenvalue: float
    bochner_hbar: float
    wigner_minima: list
    negative_fractions: list
    trace_values: list
    seed: int
    m: int
    n_sets: int
    passed_matrices: bool
    negativity_decreasing: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def symplectic_fourier(W, points: np.ndarray) -> np.ndarray:
    """``f(z) = int W(q, p) exp(i (q p' - p q')) dq dp`` at ``z = (q', p')``."""
    q, p = W.chart.mesh()
    w = W.chart.cell_weights() * W.values
    qf, pf, wf = q.ravel(), p.ravel(), w.ravel()
    pts = np.atleast_2d(points)
    return np.exp(1j * (np.outer(pts[:, 1], qf) - np.outer(pts[:, 0], pf))) @ wf


def positive_type_matrix(W, a: np.ndarray, hbar: float, with_phase: bool = True) -> np.ndarray:
    """``M_jk = f(a_j - a_k) exp(i hbar/2 sigma(a_k, a_j))`` (phase optional)."""
    m = a.shape[0]
    diffs = (a[:, None, :] - a[None, :, :]).reshape(-1, 2)
    f = symplectic_fourier(W, diffs).reshape(m, m)
    if not with_phase:
        return f
    # sigma(a_k, a_j) = q_k p_j - p_k q_j
    sig = np.outer(a[:, 1], a[:, 0]) - np.outer(a[:, 0], a[:, 1])
    return f * np.exp(0.5j * hbar * sig)


def _profile(rho) :
    if callable(rho):
        return rho
    if not isinstance(rho, StateFunctional):
        raise InvalidArgumentError("positivity_check needs an energy profile or a StateFunctional")
    if rho.masses or rho.has_regular:
        raise PreconditionError("state must be diagonal in energy (no regular part)")
    s = rho.singular
    off = s - np.einsum("woo->wo", s)[:, :, None] * np.eye(s.shape[1])[None]
    if np.max(np.abs(off), initial=0.0) > 1e-12:
        raise PreconditionError("state kernel is not diagonal")
    vals = np.real(np.einsum("woo,o->w", s, rho.grid_o.weights))
    nodes = rho.grid_w.nodes
    return lambda w: np.interp(w, nodes, vals, left=0.0, right=0.0)


def diagonal_state_on(grid_w: SpectralGrid, grid_o: SpectralGrid, profile) -> StateFunctional:
    vals = np.clip(np.asarray(profile(grid_w.nodes), dtype=float), 0.0, None)
    total = float(np.sum(vals * grid_w.weights))
    if total <= 0:
        raise InvalidArgumentError("energy profile has no weight on the model's levels")
    kernel = np.zeros((grid_w.size, grid_o.size, grid_o.size), dtype=complex)
    idx = np.arange(grid_o.size)
    kernel[:, idx, idx] = (vals / total)[:, None] / grid_o.weights[None, :] / grid_o.weights.sum()
    return StateFunctional(grid_w, grid_o, kernel)


def positivity_check(rho, model: ModelSpec, hbar_sequence=None, m: int = 8, n_sets: int = 20,
                     seed: int = 0, tol: float = 1e-8, noise: float = 0.05) -> PositivityReport:
    """Positive-type matrices of the symplectic Fourier transform along an hbar sweep.

    ``rho`` is an energy profile ``rho(omega)`` or a StateFunctional diagonal
    in energy; at each hbar it is resampled on the model's levels.
    """
    if m < 1:
        raise InvalidArgumentError("m must be positive")
    profile = _profile(rho)
    hbars = list(hbar_sequence or model.hbar_sequence)
    rng = np.random.default_rng(seed)
    mins, wmins, negs, traces = [], [], [], []
    boch, boch_h = np.inf, min(hbars)
    for h in hbars:
        real = model.ket_realization(h) if model.ket_realization else None
        if real is None:
            state_symbol(None, model, h)
        state = diagonal_state_on(real.grid_w, real.grid_o, profile)
        W = state_symbol(state, model, h)
        vals = np.real(W.values)
        W = W.with_values(vals)
        absmass = float(np.real(W.chart.integrate(np.abs(vals))))
        negs.append(float(np.real(W.chart.integrate(np.clip(-vals, 0, None)))) / absmass)
        wmins.append(float(vals.min()))
        traces.append(float(np.real(W.integral())))
        # spread of the state sets the scale of its Fourier transform
        q, p = W.chart.mesh()
        spread = np.sqrt(np.real(W.chart.integrate((q**2 + p**2) * vals)) / max(traces[-1], 1e-300))
        scale = 1.0 / max(spread, 1e-12)
        lo = np.inf
        for _ in range(n_sets):
            a = rng.normal(scale=scale, size=(m, 2))
            M = positive_type_matrix(W, a, h)
            lo = min(lo, float(np.linalg.eigvalsh(0.5 * (M + M.conj().T)).min()))
            if h == boch_h:
                B = positive_type_matrix(W, a, h, with_phase=False)
                boch = min(boch, float(np.linalg.eigvalsh(0.5 * (B + B.conj().T)).min()))
        mins.append(lo)
    order = np.argsort(hbars)[::-1]
    seq = [negs[i] for i in order]
    decreasing = all(b <= a * (1 + noise) + 1e-9 for a, b in zip(seq, seq[1:]))
    return PositivityReport(hbars, mins, boch, boch_h, wmins, negs, traces, seed, m, n_sets,
                            all(x >= -tol for x in mins), decreasing)
