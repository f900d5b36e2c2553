"""Classical limit: reference models, classical distributions, flows and cross-checks."""

from .appendix import (
    EvolutionComparison,
    PositivityReport,
    diagonal_state_on,
    phase_space_evolution,
    positive_type_matrix,
    positivity_check,
    richardson_zero,
    symplectic_fourier,
)
from .flow import ConstancyReport, Trajectory, constancy_check, hamiltonian_flow, interpolate_on_chart
from .limits import (
    ClassicalDistribution,
    SharpeningReport,
    band_projector_state,
    classical_distribution,
    eigen_symbol_limit,
    gaussian_delta,
    invariant_volume,
)
from .models import MODELS, ModelSpec, build_model, free_translation, oscillator, two_mode

__all__ = [
    "EvolutionComparison", "PositivityReport", "diagonal_state_on", "phase_space_evolution",
    "positive_type_matrix", "positivity_check", "richardson_zero", "symplectic_fourier",
    "ConstancyReport", "Trajectory", "constancy_check", "hamiltonian_flow", "interpolate_on_chart",
    "ClassicalDistribution", "SharpeningReport", "band_projector_state", "classical_distribution",
    "eigen_symbol_limit", "gaussian_delta", "invariant_volume",
    "MODELS", "ModelSpec", "build_model", "free_translation", "oscillator", "two_mode",
]
