"""Noise spectroscopy for a two-level system coupled to classical colored noise.

Forward direction: integrate the memory-kernel (Born) equation of motion in
the time domain, or evaluate its exact Laplace-domain response, for a qubit
whose energy bias fluctuates with a known correlation function; a stochastic
trajectory average is available as an independent reference.

Inverse direction: starting from sampled population traces, transform to the
frequency side and invert the response formulas for the noise spectrum --
via the coherent oscillation decay at the optimal working point, via
relaxation-rate pairs, or via golden-rule rates swept over the bias angle.

Units convention: time in ps, angular frequency in rad/ps.  Qubit energies
quoted in GHz (ordinary frequency) convert through
``ghz_to_angular`` (omega = 2 pi nu 1e-3).
"""

from .bloch import (
    SuperopEigendecomposition,
    anticommutator_superop,
    commutator_superop,
    devectorize,
    matrix_s_function,
    vectorize,
)
from .errors import (
    DetectionError,
    ExtrapolationError,
    NoiseSpecError,
    PoleProximityError,
    SingularEvaluationError,
)
from .identify import (
    DeltaEstimate,
    DiscreteLaplace,
    GoldenRuleSweep,
    MeasurementTrace,
    RelaxationInversion,
    SpectrumEstimate,
    detect_delta,
    discrete_laplace,
    full_Q_values,
    golden_rule_sweep,
    identify_from_relaxation,
    identify_gamma_complex,
    identify_gamma_ft,
    identify_gamma_ft_ac,
    laplace_on_real_axis,
    natural_grid,
    rate_trace_from_trajectory,
)
from .noise import ModulatedTransforms, NoiseModel, NoiseSpectra, SpectralAsymmetry
from .qubit import (
    ChargeQubitParams,
    RatePair,
    charge_frame,
    coherent_Q,
    coherent_Q_closed_form,
    coherent_Q_general_bias,
    eigen_frame,
    ghz_to_angular,
    angular_to_ghz,
    golden_rule_rates,
    relaxation_rate,
    relaxation_rate_closed_form,
    relaxation_rates_lowest_order,
)
from .response import (
    FinalValueResult,
    SystemSpec,
    bloch_response,
    final_value,
    kernel_K,
    rate_response,
    system_matrix,
)
from .timesim import (
    EnsembleResult,
    SimConfig,
    Trajectory,
    integrate_volterra,
    memory_kernel_stack,
    monte_carlo_reference,
    transition_rate_trace,
)

__version__ = "0.1.0"

__all__ = [
    "ChargeQubitParams",
    "DeltaEstimate",
    "DetectionError",
    "DiscreteLaplace",
    "EnsembleResult",
    "ExtrapolationError",
    "FinalValueResult",
    "GoldenRuleSweep",
    "MeasurementTrace",
    "ModulatedTransforms",
    "NoiseModel",
    "NoiseSpecError",
    "NoiseSpectra",
    "PoleProximityError",
    "RatePair",
    "RelaxationInversion",
    "SimConfig",
    "SingularEvaluationError",
    "SpectralAsymmetry",
    "SpectrumEstimate",
    "SuperopEigendecomposition",
    "SystemSpec",
    "Trajectory",
    "angular_to_ghz",
    "anticommutator_superop",
    "bloch_response",
    "charge_frame",
    "coherent_Q",
    "coherent_Q_closed_form",
    "coherent_Q_general_bias",
    "commutator_superop",
    "detect_delta",
    "devectorize",
    "discrete_laplace",
    "eigen_frame",
    "final_value",
    "full_Q_values",
    "ghz_to_angular",
    "golden_rule_rates",
    "golden_rule_sweep",
    "identify_from_relaxation",
    "identify_gamma_complex",
    "identify_gamma_ft",
    "identify_gamma_ft_ac",
    "integrate_volterra",
    "kernel_K",
    "laplace_on_real_axis",
    "matrix_s_function",
    "memory_kernel_stack",
    "monte_carlo_reference",
    "natural_grid",
    "rate_response",
    "rate_trace_from_trajectory",
    "relaxation_rate",
    "relaxation_rate_closed_form",
    "relaxation_rates_lowest_order",
    "transition_rate_trace",
    "vectorize",
]
