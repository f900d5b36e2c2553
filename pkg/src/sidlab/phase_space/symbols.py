"""Symbols of states and observables through a model's ket realization.

A realization samples unit-normalized kets ``u_{w,o}(x)`` on a position grid.
The delta-normalized generalized kets are ``u / sqrt(w_w w_o)``, which fixes

    A_S  ->  sum_w sum_{o,o'} sqrt(w_o w_o') A(w,o,o') |u_{w,o}><u_{w,o'}|
    rho_S -> sum_w w_w sum_{o,o'} sqrt(w_o w_o') rho(w,o,o') |u_{w,o'}><u_{w,o}|

so that ``Tr(rho A)`` reproduces the bilinear pairing. Only singular parts are
realized: the regular sector's ``w = w'`` diagonal would overlap the singular
one on a grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra import Observable, StateFunctional
from ..errors import InvalidArgumentError, UnsupportedModelError
from ..spectral import SpectralGrid
from .chart import PhaseSpaceFunction
from .wigner import OperatorKernel, wigner_symbol


@dataclass(frozen=True, eq=False)
class KetRealization:
    x_grid: SpectralGrid
    grid_w: SpectralGrid
    grid_o: SpectralGrid
    kets: np.ndarray          # [w, o, x], unit-normalized with weight dx
    hbar: float
    periodic: bool = False

    def __post_init__(self):
        k = np.asarray(self.kets, dtype=complex)
        if k.shape != (self.grid_w.size, self.grid_o.size, self.x_grid.size):
            raise InvalidArgumentError("kets must have shape (n_w, n_o, n_x)")
        object.__setattr__(self, "kets", k)

    def gram_residual(self) -> float:
        U = self.kets.reshape(-1, self.x_grid.size)
        G = U.conj() @ U.T * self.x_grid.spacing
        return float(np.max(np.abs(G - np.eye(G.shape[0]))))


def _realization(model, hbar: float) -> KetRealization:
    rule = getattr(model, "ket_realization", None)
    if rule is None:
        raise UnsupportedModelError(f"model {getattr(model, 'name', model)!r} has no ket realization")
    return rule(hbar)


def _check(real: KetRealization, grid_w, grid_o):
    if not (real.grid_w.same_as(grid_w) and real.grid_o.same_as(grid_o)):
        raise InvalidArgumentError("state/observable grids differ from the model's ket realization")


def _block_kernel(real: KetRealization, blocks: np.ndarray) -> OperatorKernel:
    """``sum_w sum_{ab} blocks[w, a, b] |u_{w,a}><u_{w,b}|``."""
    K = np.einsum("wax,wab,wby->xy", real.kets, blocks, real.kets.conj(), optimize=True)
    return OperatorKernel(real.x_grid, K, None, real.periodic)


def density_kernel(rho: StateFunctional, real: KetRealization) -> OperatorKernel:
    _check(real, rho.grid_w, rho.grid_o)
    if rho.masses:
        raise InvalidArgumentError("realize point masses through their grid kernel")
    sq = np.sqrt(rho.grid_o.weights)
    blocks = rho.grid_w.weights[:, None, None] * np.transpose(
        rho.singular * sq[None, :, None] * sq[None, None, :], (0, 2, 1))
    return _block_kernel(real, blocks)


def observable_kernel(A: Observable, real: KetRealization) -> OperatorKernel:
    _check(real, A.grid_w, A.grid_o)
    sq = np.sqrt(A.grid_o.weights)
    return _block_kernel(real, A.singular * sq[None, :, None] * sq[None, None, :])


def state_symbol(rho: StateFunctional, model, hbar: float) -> PhaseSpaceFunction:
    """Wigner function of ``rho`` (normalized to integrate to its trace)."""
    real = _realization(model, hbar)
    return wigner_symbol(density_kernel(rho, real), hbar, state=True)


def observable_symbol(A: Observable, model, hbar: float) -> PhaseSpaceFunction:
    real = _realization(model, hbar)
    return wigner_symbol(observable_kernel(A, real), hbar)


def symbol_pairing(rho_symbol: PhaseSpaceFunction, A_symbol: PhaseSpaceFunction) -> complex:
    """``int symb(rho) symb(A) dphi``."""
    return rho_symbol.pair(A_symbol)
