from __future__ import annotations

import numpy as np
import pytest

from sidlab.algebra import Observable, StateFunctional, normalize
from sidlab.spectral import make_grid


def hermitian_regular(rng, nw, no, scale=1.0):
    X = rng.normal(size=(nw, nw, no, no)) + 1j * rng.normal(size=(nw, nw, no, no))
    return scale * 0.5 * (X + np.conj(np.transpose(X, (1, 0, 3, 2))))


def psd_singular(rng, nw, no, weights_o):
    """Kernels whose weighted blocks D K D are positive semi-definite."""
    X = rng.normal(size=(nw, no, no)) + 1j * rng.normal(size=(nw, no, no))
    M = X @ np.conj(np.transpose(X, (0, 2, 1)))
    sq = np.sqrt(weights_o)
    return M / sq[None, :, None] / sq[None, None, :]


def random_state(rng, grid_w, grid_o, regular=0.1) -> StateFunctional:
    nw, no = grid_w.size, grid_o.size
    rho = StateFunctional(grid_w, grid_o, psd_singular(rng, nw, no, grid_o.weights),
                          hermitian_regular(rng, nw, no, regular))
    return normalize(rho)


def random_observable(rng, grid_w, grid_o) -> Observable:
    nw, no = grid_w.size, grid_o.size
    S = rng.normal(size=(nw, no, no)) + 1j * rng.normal(size=(nw, no, no))
    S = 0.5 * (S + np.conj(np.transpose(S, (0, 2, 1))))
    return Observable(grid_w, grid_o, S, hermitian_regular(rng, nw, no))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grids():
    return make_grid((0.0, 2.0), 9, "trapezoid"), make_grid((-1.0, 1.0), 4, "gauss", label="o")


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {title}  {detail}".rstrip()
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
