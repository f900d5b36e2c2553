"""Wigner transform and Weyl quantization for one degree of freedom.

Operators are position kernels ``K(x, x')`` on a uniform grid of spacing
``dx`` (so ``(K psi)(x) = sum_x' K(x, x') psi(x') dx``), plus an optional
local part ``local(x) delta(x - x')`` for multiplication operators.

The midpoint transform

    W(x_j, p_k) = 2 dx sum_m K(x_{j+m}, x_{j-m}) exp(-2 i p_k m dx / hbar)

is sampled on the ``p`` grid ``p_k = (k - n/2) pi hbar / (n dx)``, on which it
is an exact discrete Fourier pair with :func:`weyl_quantize`.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from ..errors import InvalidArgumentError
from ..spectral import SpectralGrid, make_grid
from .chart import PhaseSpaceChart, PhaseSpaceFunction
from .poly import PolySymbol


@dataclass(frozen=True, eq=False)
class OperatorKernel:
    x_grid: SpectralGrid
    matrix: np.ndarray
    local: np.ndarray | None = None
    periodic: bool = False

    def __post_init__(self):
        K = np.asarray(self.matrix, dtype=complex)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise InvalidArgumentError(f"kernel must be square, got shape {K.shape}")
        if K.shape[0] != self.x_grid.size:
            raise InvalidArgumentError("kernel size does not match the position grid")
        object.__setattr__(self, "matrix", K)
        if self.local is not None:
            loc = np.asarray(self.local, dtype=complex)
            if loc.shape != (K.shape[0],):
                raise InvalidArgumentError("local part must have one value per grid point")
            object.__setattr__(self, "local", loc)

    @property
    def dx(self) -> float:
        return self.x_grid.spacing

    def operator_matrix(self) -> np.ndarray:
        """Matrix acting on sample vectors: ``K dx + diag(local)``."""
        M = self.matrix * self.dx
        if self.local is not None:
            M = M + np.diag(self.local)
        return M

    def apply(self, psi) -> np.ndarray:
        return self.operator_matrix() @ np.asarray(psi, dtype=complex)

    def trace(self) -> complex:
        return complex(np.trace(self.operator_matrix()))

    def hermiticity_residual(self) -> float:
        r = float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))
        if self.local is not None:
            r = max(r, float(np.max(np.abs(self.local.imag))))
        return r

    def __add__(self, other: "OperatorKernel") -> "OperatorKernel":
        if not self.x_grid.same_as(other.x_grid):
            raise InvalidArgumentError("kernels on different grids")
        loc = None
        if self.local is not None or other.local is not None:
            loc = (self.local if self.local is not None else 0) + \
                (other.local if other.local is not None else 0)
        return OperatorKernel(self.x_grid, self.matrix + other.matrix, loc,
                              self.periodic and other.periodic)


def position_grid(half_width: float, n: int) -> SpectralGrid:
    """Uniform grid on ``[-L, L)``."""
    return make_grid((-half_width, half_width), n, "periodic", label="x")


def momentum_grid(x_grid: SpectralGrid, hbar: float) -> SpectralGrid:
    """Momentum axis dual to the midpoint transform on ``x_grid``."""
    n, dx = x_grid.size, x_grid.spacing
    pmax = np.pi * hbar / (2.0 * dx)
    return make_grid((-pmax, pmax), n, "periodic", label="p")


def wigner_chart(x_grid: SpectralGrid, hbar: float) -> PhaseSpaceChart:
    return PhaseSpaceChart((x_grid,), (momentum_grid(x_grid, hbar),))


def kernel_from_kets(x_grid: SpectralGrid, kets, coefficients, periodic: bool = False) -> OperatorKernel:
    """``sum_ab c[a, b] |u_a><u_b|`` for sample vectors ``kets[a, x]``."""
    U = np.asarray(kets, dtype=complex)
    C = np.asarray(coefficients, dtype=complex)
    return OperatorKernel(x_grid, U.T @ C @ U.conj(), None, periodic)


def _shift_offsets(n: int, periodic: bool) -> np.ndarray:
    if periodic:
        return np.arange(-(n // 2), n - n // 2)
    half = (n - 1) // 2
    return np.arange(-half, half + 1)


def wigner_symbol(K: OperatorKernel, hbar: float, state: bool = False) -> PhaseSpaceFunction:
    """Wigner symbol of ``K``; ``state=True`` divides by ``2 pi hbar``."""
    if not hbar > 0:
        raise InvalidArgumentError("hbar must be positive")
    if not isinstance(K, OperatorKernel):
        K = np.asarray(K)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise InvalidArgumentError(f"kernel must be square, got shape {K.shape}")
        raise InvalidArgumentError("wrap the kernel in an OperatorKernel to supply its grid")
    chart = wigner_chart(K.x_grid, hbar)
    n, dx = K.x_grid.size, K.dx
    m = _shift_offsets(n, K.periodic)
    j = np.arange(n)
    a = j[:, None] + m[None, :]
    b = j[:, None] - m[None, :]
    if K.periodic:
        S = K.matrix[a % n, b % n]
    else:
        inside = (a >= 0) & (a < n) & (b >= 0) & (b < n)
        S = np.where(inside, K.matrix[np.clip(a, 0, n - 1), np.clip(b, 0, n - 1)], 0.0)
    pk = chart.p_grids[0].nodes
    E = np.exp(-2j * np.outer(m, pk) * dx / hbar)
    W = 2.0 * dx * (S @ E)
    if K.local is not None:
        W = W + K.local[:, None]
    if state:
        W = W / (2.0 * np.pi * hbar)
    return PhaseSpaceFunction(chart, W, hbar, "grid-sampled", state, 0.5 if K.periodic else 1.0)


def _half_shift(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Trigonometric interpolation of ``values`` at the half-step points along ``axis``."""
    n = values.shape[axis]
    k = np.fft.fftfreq(n) * n
    if n % 2 == 0:
        k[n // 2] = 0.0  # Nyquist mode has no unique half-step continuation
    shape = [1] * values.ndim
    shape[axis] = n
    phase = np.exp(1j * np.pi * k / n).reshape(shape)
    return np.fft.ifft(np.fft.fft(values, axis=axis) * phase, axis=axis)


def weyl_quantize(f, hbar: float | None = None, x_grid: SpectralGrid | None = None,
                  periodic: bool = False) -> OperatorKernel:
    """Operator kernel whose Wigner symbol is ``f``.

    Grid functions must live on a chart produced by :func:`wigner_chart`.
    Polynomials use symmetric (Weyl) ordering and need ``x_grid``.
    """
    if isinstance(f, PolySymbol):
        if x_grid is None or hbar is None:
            raise InvalidArgumentError("polynomial quantization needs x_grid and hbar")
        return _quantize_poly(f, hbar, x_grid, periodic)
    if not isinstance(f, PhaseSpaceFunction):
        raise InvalidArgumentError("weyl_quantize needs a PhaseSpaceFunction or PolySymbol")
    if f.chart.dof != 1:
        raise InvalidArgumentError("the grid Weyl map is implemented for one degree of freedom")
    hbar = f.hbar if hbar is None else float(hbar)
    xg = f.chart.q_grids[0]
    pg = f.chart.p_grids[0]
    if not pg.same_as(momentum_grid(xg, hbar)):
        raise InvalidArgumentError("momentum axis is not the dual grid of the position axis")
    vals = f.values * (2.0 * np.pi * hbar if f.state else 1.0)
    n, dx, dp = xg.size, xg.spacing, pg.spacing
    pk = pg.nodes
    K = np.zeros((n, n), dtype=complex)
    pref = dp / (2.0 * np.pi * hbar)
    j = np.arange(n)

    # even a + b: midpoint on the grid
    m = _shift_offsets(n, periodic)
    G = pref * vals @ np.exp(2j * np.outer(pk, m) * dx / hbar)      # [j, m]
    a = j[:, None] + m[None, :]
    b = j[:, None] - m[None, :]
    # odd a + b: midpoint between grid points
    half = _half_shift(vals, axis=0)
    if periodic:
        mo = np.arange(-(n // 2), n - n // 2)
    else:
        mo = np.arange(-(n // 2), n // 2)
    Go = pref * half @ np.exp(1j * np.outer(pk, 2 * mo + 1) * dx / hbar)
    ao = j[:, None] + mo[None, :] + 1
    bo = j[:, None] - mo[None, :]
    for A, B, V in ((a, b, G), (ao, bo, Go)):
        if periodic:
            K[A % n, B % n] = V
        else:
            ok = (A >= 0) & (A < n) & (B >= 0) & (B < n)
            K[A[ok], B[ok]] = V[ok]
    return OperatorKernel(xg, K, None, periodic)


def momentum_operator(x_grid: SpectralGrid, hbar: float) -> np.ndarray:
    """Spectral ``-i hbar d/dx`` as a matrix on sample vectors."""
    n = x_grid.size
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=x_grid.spacing)
    if n % 2 == 0:
        k[n // 2] = 0.0
    F = np.fft.fft(np.eye(n), axis=0)
    return np.fft.ifft((hbar * k)[:, None] * F, axis=0)


def _quantize_poly(f: PolySymbol, hbar: float, x_grid: SpectralGrid, periodic: bool) -> OperatorKernel:
    if f.dof != 1:
        raise InvalidArgumentError("polynomial quantization is implemented for one degree of freedom")
    x = np.diag(x_grid.nodes).astype(complex)
    P = momentum_operator(x_grid, hbar)
    n = x_grid.size
    total = np.zeros((n, n), dtype=complex)
    local = np.zeros(n, dtype=complex)
    for (a, b), c in f.coefficients().items():
        if b == 0:
            local += c * x_grid.nodes**a
            continue
        Pb = np.linalg.matrix_power(P, b)
        term = np.zeros((n, n), dtype=complex)
        for k in range(a + 1):
            term += comb(a, k) * (np.linalg.matrix_power(x, k) @ Pb @ np.linalg.matrix_power(x, a - k))
        total += c * term / 2.0**a
    return OperatorKernel(x_grid, total / x_grid.spacing, local if np.any(local) else None, periodic)
