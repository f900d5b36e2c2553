"""Pointer basis: the energy-preserving unitary that diagonalizes ``rho_*``.

For each energy node the weighted matrix ``M = D rho D`` (``D = diag sqrt w_o``)
is Hermitian; its eigenvectors ``W`` give the kernel

    U(w, p, o) = conj(W[o, p]) / sqrt(w_o)

on a unit-weight eigen-index grid ``p``. Observables transform as
``A_p = W^T D A D conj(W)`` and states as ``rho_p = W^H D rho D W``, which
keeps the bilinear pairing invariant and makes ``rho_p`` diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Observable, StateFunctional, check_state, _check_grids
from .errors import InvalidArgumentError, InvalidStateError
from .spectral import SpectralGrid, index_grid

POSITIVITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PointerMap:
    grid_w: SpectralGrid
    grid_o: SpectralGrid
    grid_p: SpectralGrid
    kernel: np.ndarray  # U[w, p, o]

    @property
    def eigvecs(self) -> np.ndarray:
        """``W[w, o, p]`` (unitary per energy node)."""
        sq = np.sqrt(self.grid_o.weights)
        return np.conj(np.transpose(self.kernel, (0, 2, 1))) * sq[None, :, None]

    def unitarity_residual(self) -> float:
        U = self.kernel
        gram = np.einsum("wpo,wqo,o->wpq", U, np.conj(U), self.grid_o.weights)
        target = np.diag(1.0 / self.grid_p.weights)
        return float(np.max(np.abs(gram - target[None])))


@dataclass(frozen=True, eq=False)
class DiagonalState:
    """``rho(w, p)`` of the fully diagonal decohered state."""

    grid_w: SpectralGrid
    grid_p: SpectralGrid
    values: np.ndarray
    p_values: np.ndarray | None = None

    def total(self) -> float:
        return float(np.sum(self.grid_w.weights[:, None] * self.grid_p.weights[None, :] * self.values))

    def to_state(self) -> StateFunctional:
        nw, npp = self.values.shape
        kernel = np.zeros((nw, npp, npp), dtype=complex)
        idx = np.arange(npp)
        kernel[:, idx, idx] = self.values
        return StateFunctional(self.grid_w, self.grid_p, kernel)

    def label_values(self) -> np.ndarray:
        """P-value attached to each (w, p) cell."""
        if self.p_values is not None:
            return self.p_values
        return np.broadcast_to(self.grid_p.nodes, self.values.shape)


def pointer_map_from_unitaries(grid_w, grid_o, unitaries) -> PointerMap:
    """Build a :class:`PointerMap` from per-energy unitary matrices ``W[w, o, p]``."""
    W = np.asarray(unitaries, dtype=complex)
    if W.shape != (grid_w.size, grid_o.size, grid_o.size):
        raise InvalidArgumentError("need one n_o x n_o unitary per energy node")
    sq = np.sqrt(grid_o.weights)
    kernel = np.conj(np.transpose(W, (0, 2, 1))) / sq[None, None, :]
    return PointerMap(grid_w, grid_o, index_grid(grid_o.size), kernel)


def identity_pointer_map(grid_w, grid_o) -> PointerMap:
    eye = np.broadcast_to(np.eye(grid_o.size), (grid_w.size, grid_o.size, grid_o.size))
    return pointer_map_from_unitaries(grid_w, grid_o, eye)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (np.abs(v[k]) / v[k])


def _ordered_eigh(M: np.ndarray):
    """Eigenpairs sorted by descending eigenvalue with deterministic ties and phases."""
    lam, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    V = np.stack([_fix_phase(V[:, i]) for i in range(V.shape[1])], axis=1)
    scale = max(1.0, float(np.max(np.abs(lam))))
    tie = 1e-12 * scale
    keys = []
    for i in range(lam.size):
        bucket = np.round(lam[i] / tie) if tie > 0 else lam[i]
        first = int(np.flatnonzero(np.abs(V[:, i]) > 1e-12)[0])
        keys.append((-bucket, first, tuple(-np.round(V[:, i].real, 10))))
    order = sorted(range(lam.size), key=lambda i: keys[i])
    return lam[order], V[:, order]


def find_pointer_basis(rho_star: StateFunctional, tol: float = POSITIVITY_TOL):
    """Eigendecompose ``rho_*`` energy by energy.

    Returns the :class:`PointerMap` and the :class:`DiagonalState` holding the
    eigenvalues. ``p_values`` records the mean o-label of each pointer ket.
    """
    if rho_star.masses:
        raise InvalidArgumentError("pointer basis needs a grid-kernel state")
    if rho_star.has_regular:
        raise InvalidArgumentError("pointer basis needs the decohered state (zero regular part)")
    diag = check_state(rho_star)
    if diag.hermiticity_residual > tol:
        raise InvalidStateError(f"state not Hermitian (residual {diag.hermiticity_residual:.3g})")
    if diag.min_eigenvalue < -tol:
        raise InvalidStateError(f"state not positive (min eigenvalue {diag.min_eigenvalue:.3g})")

    sq = np.sqrt(rho_star.grid_o.weights)
    blocks = rho_star.singular * sq[None, :, None] * sq[None, None, :]
    nw, no = rho_star.grid_w.size, rho_star.grid_o.size
    W = np.empty((nw, no, no), dtype=complex)
    values = np.empty((nw, no))
    for i in range(nw):
        values[i], W[i] = _ordered_eigh(blocks[i])

    U = pointer_map_from_unitaries(rho_star.grid_w, rho_star.grid_o, W)
    p_values = np.einsum("wop,o->wp", np.abs(W) ** 2, rho_star.grid_o.nodes)
    return U, DiagonalState(rho_star.grid_w, U.grid_p, values, p_values)


def _check_map(grid_w, grid_o, U: PointerMap):
    if not (grid_w.same_as(U.grid_w) and grid_o.same_as(U.grid_o)):
        raise InvalidArgumentError("pointer map built on different grids")


def transform_observable(A: Observable, U: PointerMap) -> Observable:
    """Kernels of ``A`` in the pointer coordinates ``(w, p, p')``."""
    _check_map(A.grid_w, A.grid_o, U)
    W = U.eigvecs
    sq = np.sqrt(A.grid_o.weights)
    left = np.transpose(W, (0, 2, 1)) * sq[None, None, :]      # W^T D, [w, p, o]
    right = np.conj(W) * sq[None, :, None]                     # D conj(W), [w, o, p]
    sing = left @ A.singular @ right
    reg = np.einsum("apo,abom,bmq->abpq", left, A.regular, right, optimize=True)
    return Observable(A.grid_w, U.grid_p, sing, reg, kind=A.kind)


def transform_state(rho: StateFunctional, U: PointerMap) -> StateFunctional:
    """Kernels of ``rho`` in the pointer coordinates (conjugate placement)."""
    _check_map(rho.grid_w, rho.grid_o, U)
    if rho.masses:
        raise InvalidArgumentError("transform_state needs a grid-kernel state")
    W = U.eigvecs
    sq = np.sqrt(rho.grid_o.weights)
    left = np.conj(np.transpose(W, (0, 2, 1))) * sq[None, None, :]   # W^H D
    right = W * sq[None, :, None]                                     # D W
    sing = left @ rho.singular @ right
    reg = np.einsum("apo,abom,bmq->abpq", left, rho.regular, right, optimize=True)
    return StateFunctional(rho.grid_w, U.grid_p, sing, reg)


def reconstruct_state(U: PointerMap, diag: DiagonalState) -> StateFunctional:
    """Inverse map: ``rho(w, o, o') = sum_p conj(U(w,p,o)) rho(w,p) U(w,p,o')``."""
    K = U.kernel
    sing = np.einsum("wpo,wp,wpm->wom", np.conj(K), diag.values * diag.grid_p.weights, K)
    return StateFunctional(U.grid_w, U.grid_o, sing)


def off_diagonal_mass(rho: StateFunctional) -> float:
    """Frobenius norm of the off-diagonal part of the singular kernel."""
    s = rho.singular.copy()
    idx = np.arange(s.shape[1])
    s[:, idx, idx] = 0.0
    return float(np.linalg.norm(s))
