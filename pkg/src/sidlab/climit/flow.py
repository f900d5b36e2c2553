"""Hamiltonian trajectories and the constancy of ``rho_c`` along them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import IntegratorError, InvalidArgumentError, OutOfDomainError
from ..phase_space.poly import PolySymbol

DRIFT_REL = 1e-6
DRIFT_ABS = 1e-9
CONSTANCY_TOL = 1e-3

# fourth-order composition coefficients (Yoshida)
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = -(2.0 ** (1.0 / 3.0)) * _W1


@dataclass(frozen=True, eq=False)
class Trajectory:
    phi0: np.ndarray
    times: np.ndarray
    points: np.ndarray        # [t, 2 * dof]
    integrator: str
    step: float
    drift: float

    @property
    def dof(self) -> int:
        return self.points.shape[1] // 2


def _compile(poly: PolySymbol):
    """Exponent matrix and real coefficients for fast point evaluation."""
    coeffs = poly.coefficients()
    if not coeffs:
        return np.zeros((0, 2 * poly.dof), dtype=int), np.zeros(0)
    exps = np.array(list(coeffs), dtype=int)
    return exps, np.real(np.array(list(coeffs.values())))


class _Gradient:
    def __init__(self, H: PolySymbol):
        self.H = H
        d = H.dof
        self.d = d
        self.value_c = _compile(H)
        self.grad_c = [_compile(H.diff(a)) for a in range(2 * d)]

    @staticmethod
    def _eval(compiled, phi) -> float:
        exps, c = compiled
        if c.size == 0:
            return 0.0
        return float(np.sum(c * np.prod(phi[None, :] ** exps, axis=1)))

    def value(self, phi: np.ndarray) -> float:
        return self._eval(self.value_c, phi)

    def dq(self, phi) -> np.ndarray:
        return np.array([self._eval(g, phi) for g in self.grad_c[: self.d]])

    def dp(self, phi) -> np.ndarray:
        return np.array([self._eval(g, phi) for g in self.grad_c[self.d:]])


def is_separable(H: PolySymbol) -> bool:
    """True when no monomial mixes q and p."""
    d = H.dof
    return all(not (any(m[:d]) and any(m[d:])) for m in H.terms)


def _leapfrog(grad: _Gradient, phi: np.ndarray, dt: float) -> np.ndarray:
    d = grad.d
    q, p = phi[:d].copy(), phi[d:].copy()
    p -= 0.5 * dt * grad.dq(np.concatenate([q, p]))
    q += dt * grad.dp(np.concatenate([q, p]))
    p -= 0.5 * dt * grad.dq(np.concatenate([q, p]))
    return np.concatenate([q, p])


def _yoshida4(grad, phi, dt):
    for c in (_W1, _W0, _W1):
        phi = _leapfrog(grad, phi, c * dt)
    return phi


def _implicit_midpoint(grad: _Gradient, phi: np.ndarray, dt: float, iters: int = 50) -> np.ndarray:
    d = grad.d
    nxt = phi.copy()
    for _ in range(iters):
        mid = 0.5 * (phi + nxt)
        new = phi + dt * np.concatenate([grad.dp(mid), -grad.dq(mid)])
        if np.max(np.abs(new - nxt)) < 1e-15 * max(1.0, np.max(np.abs(new))):
            return new
        nxt = new
    return nxt


_STEPPERS = {"leapfrog": _leapfrog, "yoshida4": _yoshida4, "implicit_midpoint": _implicit_midpoint}


def hamiltonian_flow(model_or_H, phi0, T: float, steps: int | None = None,
                     integrator: str | None = None, max_step: float = 1e-3) -> Trajectory:
    """Integrate Hamilton's equations from ``phi0`` for a time ``T``.

    Separable Hamiltonians default to leapfrog; others use the implicit
    midpoint rule. Raises :class:`IntegratorError` when the energy drift
    exceeds ``1e-6 |H(phi0)| + 1e-9``.
    """
    H = model_or_H if isinstance(model_or_H, PolySymbol) else model_or_H.H_symbol
    phi0 = np.asarray(phi0, dtype=float)
    if phi0.shape != (2 * H.dof,):
        raise InvalidArgumentError(f"phi0 must have {2 * H.dof} components")
    if T < 0:
        raise InvalidArgumentError("T must be non-negative")
    if integrator is None:
        integrator = "leapfrog" if is_separable(H) else "implicit_midpoint"
    if integrator not in _STEPPERS:
        raise InvalidArgumentError(f"unknown integrator {integrator!r}")
    if integrator != "implicit_midpoint" and not is_separable(H):
        raise InvalidArgumentError(f"{integrator} needs a separable Hamiltonian")
    if T == 0:
        return Trajectory(phi0, np.zeros(1), phi0[None, :].copy(), integrator, 0.0, 0.0)
    if steps is None:
        steps = int(np.ceil(T / max_step))
    if steps < 1:
        raise InvalidArgumentError("steps must be positive")
    dt = T / steps
    grad = _Gradient(H)
    stepper = _STEPPERS[integrator]
    pts = np.empty((steps + 1, phi0.size))
    pts[0] = phi0
    for k in range(steps):
        pts[k + 1] = stepper(grad, pts[k], dt)
    H0 = grad.value(phi0)
    energies = np.real(H.evaluate(*pts.T))
    drift = float(np.max(np.abs(energies - H0)))
    if drift > DRIFT_REL * abs(H0) + DRIFT_ABS:
        raise IntegratorError(f"energy drift {drift:.3g} exceeds bound; reduce the step {dt:.3g}",
                              drift=drift)
    return Trajectory(phi0, np.linspace(0.0, T, steps + 1), pts, integrator, dt, drift)


def _fourier_interpolate(values: np.ndarray, chart, points: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation of a periodic-grid field at arbitrary points."""
    F = np.fft.fftn(values) / values.size
    out = F
    for axis, g in enumerate(chart.axes):
        n = g.size
        k = np.fft.fftfreq(n) * n
        if n % 2 == 0:
            k[n // 2] = 0.0
        phase = np.exp(2j * np.pi * np.outer(points[:, axis] - g.nodes[0], k) / (n * g.spacing))
        if axis == 0:
            out = np.tensordot(phase, out, axes=([1], [0]))          # [pt, rest...]
        else:
            # contract axis ``axis`` of the remaining array pointwise
            out = np.einsum("pk,pk...->p...", phase, out)
    return np.real(out)


def interpolate_on_chart(values: np.ndarray, chart, points, method: str = "spectral") -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    for axis, g in enumerate(chart.axes):
        lo, hi = g.nodes[0], g.nodes[-1]
        if np.any(points[:, axis] < lo) or np.any(points[:, axis] > hi):
            raise OutOfDomainError(f"trajectory leaves the sampled region along axis {g.label}")
    if method == "spectral":
        return _fourier_interpolate(np.real(values), chart, points)
    if method == "cubic":
        from scipy.interpolate import RegularGridInterpolator

        interp = RegularGridInterpolator([g.nodes for g in chart.axes], np.real(values), method="cubic")
        return interp(points)
    raise InvalidArgumentError(f"unknown interpolation method {method!r}")


@dataclass
class ConstancyReport:
    mean: float
    max_relative_deviation: float
    passed: bool
    n_points: int
    method: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def constancy_check(rho_c, traj: Trajectory, tol: float = CONSTANCY_TOL,
                    method: str = "spectral", max_points: int = 2000) -> ConstancyReport:
    """Relative spread of ``rho_c`` sampled along ``traj``."""
    pts = traj.points
    if pts.shape[0] > max_points:
        idx = np.unique(np.linspace(0, pts.shape[0] - 1, max_points).astype(int))
        pts = pts[idx]
    vals = interpolate_on_chart(rho_c.values, rho_c.chart, pts, method)
    mean = float(np.mean(vals))
    scale = abs(mean) if mean != 0 else 1.0
    dev = float(np.max(np.abs(vals - mean)) / scale)
    return ConstancyReport(mean, dev, dev < tol, int(pts.shape[0]), method)
