"""Phase-space symbols: exact polynomials, grid functions, Wigner and Weyl maps."""

from .chart import PhaseSpaceChart, PhaseSpaceFunction, make_chart, sample_poly, symplectic_matrices
from .poly import PolySymbol, moyal_series, poisson_bracket, star_series
from .star import (
    ScalingReport,
    commuting_product_check,
    fit_order,
    halving_sequence,
    hbar_dependence,
    moyal_bracket,
    require_hbar_independent,
    star_product,
)
from .symbols import (
    KetRealization,
    density_kernel,
    observable_kernel,
    observable_symbol,
    state_symbol,
    symbol_pairing,
)
from .wigner import (
    OperatorKernel,
    kernel_from_kets,
    momentum_grid,
    position_grid,
    weyl_quantize,
    wigner_chart,
    wigner_symbol,
)

__all__ = [
    "PhaseSpaceChart", "PhaseSpaceFunction", "make_chart", "sample_poly", "symplectic_matrices",
    "PolySymbol", "moyal_series", "poisson_bracket", "star_series",
    "ScalingReport", "commuting_product_check", "fit_order", "halving_sequence",
    "hbar_dependence", "moyal_bracket", "require_hbar_independent", "star_product",
    "KetRealization", "density_kernel", "observable_kernel", "observable_symbol",
    "state_symbol", "symbol_pairing",
    "OperatorKernel", "kernel_from_kets", "momentum_grid", "position_grid",
    "weyl_quantize", "wigner_chart", "wigner_symbol",
]
