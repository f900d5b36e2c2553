"""Invariant volumes, eigen-symbol sharpening and the classical distribution."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..algebra import StateFunctional, normalize
from ..diagonal import DiagonalState
from ..errors import EmptyLevelSetError, InvalidArgumentError, ResolutionError
from ..phase_space.chart import PhaseSpaceChart
from ..phase_space.symbols import state_symbol
from .models import ModelSpec

C_CONSTANT_TOL = 0.01


def gaussian_delta(x, sigma: float) -> np.ndarray:
    """Unit-mass Gaussian ``N_sigma(x)``."""
    return np.exp(-0.5 * (np.asarray(x) / sigma) ** 2) / (np.sqrt(2.0 * np.pi) * sigma)


def level_step(values: np.ndarray, chart: PhaseSpaceChart, mask=None) -> float:
    """Largest change of ``values`` between neighbouring grid points (inside ``mask``)."""
    local = np.zeros(values.shape)
    for axis, g in enumerate(chart.axes):
        if g.size > 1:
            d = np.abs(np.diff(values, axis=axis, append=np.take(values, [-1], axis=axis)))
            local = np.maximum(local, d)
    if mask is not None:
        local = np.where(mask, local, 0.0)
    return float(np.max(local))


def _band_density(model: ModelSpec, omega: float, p, sigma: float, sigma_p: float,
                  H=None, Ps=None) -> np.ndarray:
    H = model.H_values() if H is None else H
    Ps = model.P_values() if Ps is None else Ps
    p = np.atleast_1d(np.asarray(p if p is not None else [], dtype=float))
    if p.size != model.N:
        raise InvalidArgumentError(f"model has {model.N} extra constants of motion, got {p.size} values")
    dens = gaussian_delta(H - omega, sigma)
    for Pv, pv in zip(Ps, p):
        dens = dens * gaussian_delta(Pv - pv, sigma_p)
    return dens


def invariant_volume(model: ModelSpec, omega: float, p=None, sigma: float = 0.25,
                     sigma_p: float | None = None) -> float:
    """``C(omega, p) = int N_sigma(H - omega) prod N_sigma(P_i - p_i) dphi``.

    The band volume divided by the band widths, with Gaussian bands; it
    tends to the level-set volume as the widths shrink.
    """
    if not sigma > 0:
        raise InvalidArgumentError("sigma must be positive")
    sigma_p = sigma if sigma_p is None else sigma_p
    H = model.H_values()
    Ps = model.P_values()
    # the level set has to be reached inside the sampled region
    inside = np.abs(H - omega) <= sigma
    for Pv, pv in zip(Ps, np.atleast_1d(p if p is not None else [])):
        inside &= np.abs(Pv - pv) <= sigma_p
    if not np.any(inside):
        raise EmptyLevelSetError(f"no grid point near the level set omega={omega}, p={p}")
    dens = _band_density(model, omega, p, sigma, sigma_p, H, Ps)
    return float(np.real(model.chart.integrate(dens)))


def level_curve_volume(H_grad, curve_points, lengths) -> float:
    """``oint dl / |grad H|`` from a sampled closed curve."""
    g = np.linalg.norm(H_grad(curve_points), axis=-1)
    return float(np.sum(lengths / g))


@dataclass
class SharpeningReport:
    omega: float
    delta_omega: float
    hbars: list
    mass_fractions: list
    widths: list
    monotone: bool
    width_decreasing: bool
    passed: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("omega", "delta_omega", "hbars", "mass_fractions", "widths",
                 "monotone", "width_decreasing", "passed", "notes")}


def band_projector_state(grid_w, grid_o, omega: float, delta_omega: float) -> StateFunctional:
    """Normalized Gaussian-smoothed spectral projector around ``omega``."""
    g = np.exp(-0.5 * ((grid_w.nodes - omega) / delta_omega) ** 2)
    kernel = np.zeros((grid_w.size, grid_o.size, grid_o.size), dtype=complex)
    idx = np.arange(grid_o.size)
    kernel[:, idx, idx] = g[:, None] / grid_o.weights[None, :]
    return normalize(StateFunctional(grid_w, grid_o, kernel))


def eigen_symbol_limit(model: ModelSpec, omega: float, delta_omega: float = 0.04,
                       band: float = 3.0, hbar_sequence=None, noise: float = 0.02) -> SharpeningReport:
    """Mass of the band-projector symbol inside ``|H - omega| < band * delta_omega``.

    The width is the root-mean-square distance ``|H(phi) - omega|`` under
    the symbol.
    """
    hbars = list(hbar_sequence or model.hbar_sequence)
    fractions, widths = [], []
    for h in hbars:
        real = model.ket_realization(h) if model.ket_realization else None
        if real is None:
            state_symbol(None, model, h)  # raises the unsupported-model error
        rho = band_projector_state(real.grid_w, real.grid_o, omega, delta_omega)
        W = state_symbol(rho, model, h)
        Hs = model.H_symbol.evaluate(*W.chart.mesh()).real
        total = np.real(W.integral())
        inside = np.real(W.chart.integrate(np.where(np.abs(Hs - omega) < band * delta_omega, W.values, 0)))
        fractions.append(float(inside / total))
        widths.append(float(np.sqrt(abs(np.real(W.chart.integrate((Hs - omega) ** 2 * W.values)) / total))))
    monotone = all(b >= a - noise for a, b in zip(fractions, fractions[1:]))
    width_dec = widths[-1] <= widths[0]
    notes = []
    if fractions[-1] < fractions[0]:
        notes.append("mass fraction lower at the smallest hbar than at the largest")
    return SharpeningReport(omega, delta_omega, hbars, fractions, widths, monotone, width_dec,
                            monotone and width_dec and fractions[-1] >= fractions[0], notes)


@dataclass(frozen=True, eq=False)
class ClassicalDistribution:
    chart: PhaseSpaceChart
    values: np.ndarray
    sigma: float
    source: DiagonalState
    C: np.ndarray
    c_constant: bool

    def integral(self) -> float:
        return float(np.real(self.chart.integrate(self.values)))

    def band_mass(self, omega: float, p=None, halfwidth: float | None = None, model=None) -> float:
        """Mass of ``rho_c`` within ``|H - omega| < halfwidth`` (and likewise for P)."""
        if model is None:
            raise InvalidArgumentError("band_mass needs the model for H and P")
        hw = 4.0 * self.sigma if halfwidth is None else halfwidth
        mask = np.abs(model.H_values(self.chart) - omega) < hw
        for Pv, pv in zip(model.P_values(self.chart), np.atleast_1d(p if p is not None else [])):
            mask &= np.abs(Pv - pv) < hw
        return float(np.real(self.chart.integrate(np.where(mask, self.values, 0.0))))


def classical_distribution(diag: DiagonalState, model: ModelSpec, sigma: float = 0.25,
                           sigma_p: float | None = None, tol: float = 1e-12) -> ClassicalDistribution:
    """``rho_c = sum w_w w_p rho(w,p) N_sigma(H - w) N_sigma(P - p) / C(w,p)``.

    ``C`` is integrated numerically for each term, so every ridge carries
    exactly its weight on the chart.
    """
    if not sigma > 0:
        raise InvalidArgumentError("sigma must be positive")
    sigma_p = sigma if sigma_p is None else sigma_p
    vals = np.asarray(diag.values)
    if np.any(np.abs(np.imag(vals)) > tol) or np.any(np.real(vals) < -tol):
        raise InvalidArgumentError("diagonal state must be real and non-negative")
    vals = np.clip(np.real(vals), 0.0, None)
    H = model.H_values()
    Ps = model.P_values()
    live = diag.grid_w.nodes[np.any(vals > 0, axis=1)]
    if live.size == 0:
        raise InvalidArgumentError("diagonal state carries no weight")
    band = (H >= live.min()) & (H <= live.max()) if live.size > 1 else np.abs(H - live[0]) <= sigma
    step = level_step(H, model.chart, band)
    if sigma <= step:
        raise ResolutionError(f"sigma={sigma} does not resolve H steps of {step:.3g} on the grid")
    if model.N:
        step_p = max(level_step(Pv, model.chart, band) for Pv in Ps)
        if sigma_p <= step_p:
            raise ResolutionError(f"sigma_p={sigma_p} does not resolve P steps of {step_p:.3g}")

    labels = np.asarray(diag.label_values(), dtype=float)
    ww = diag.grid_w.weights[:, None] * diag.grid_p.weights[None, :]
    out = np.zeros(model.chart.shape)
    Cs = np.full(vals.shape, np.nan)
    for i, w in enumerate(diag.grid_w.nodes):
        base = gaussian_delta(H - w, sigma)
        for j in range(vals.shape[1]):
            if vals[i, j] == 0.0:
                continue
            dens = base
            if model.N:
                pv = np.atleast_1d(labels[i, j])
                for Pv, pk in zip(Ps, np.broadcast_to(pv, (model.N,))):
                    dens = dens * gaussian_delta(Pv - pk, sigma_p)
            C = float(np.real(model.chart.integrate(dens)))
            if C <= 0:
                raise EmptyLevelSetError(f"empty level set at omega={w}")
            Cs[i, j] = C
            out += (ww[i, j] * vals[i, j] / C) * dens
    finite = Cs[np.isfinite(Cs)]
    c_const = bool(finite.size and (finite.max() - finite.min()) <= C_CONSTANT_TOL * finite.mean())
    return ClassicalDistribution(model.chart, out, sigma, diag, Cs, c_const)
