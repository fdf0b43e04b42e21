"""Steering-robustness toolkit for noisy qubit measurement pairs.

Quantifies the steering resource of a bipartite qubit scenario through an
analytic incompatibility-robustness monotone, and maximizes it over
piecewise-constant control pulses acting against Markovian noise, with
exact gradients end to end.
"""

from .compat import (
    NoiseParams,
    apply_noise,
    c_functional,
    is_jointly_measurable,
    robustness,
    robustness_gradient,
)
from .control import (
    LandscapeGrid,
    OptimizeConfig,
    OptimizeResult,
    SweepPoint,
    landscape,
    naive_optimize,
    optimize,
    time_sweep,
)
from .errors import (
    DegenerateRootError,
    InternalConsistencyError,
    InvalidEffectError,
    NoiseInsufficientError,
    NotDifferentiableError,
    SteerctlError,
    UnsupportedStateError,
)
from .lindblad import (
    ControlHamiltonian,
    DriftGenerator,
    DriftKind,
    PulseSequence,
    TransferMatrix,
    control_matrix,
    drift_matrix,
    expm_frechet,
    is_unital,
    pauli_transfer_matrix,
    propagate,
    propagate_schrodinger,
    propagate_with_jacobian,
    propagator_jacobian,
)
from .qubit_algebra import (
    BipartiteState,
    FourVector,
    HermitianMatrix2,
    complement,
    effect_from_matrix,
    effect_to_matrix,
    minkowski,
    sharp_effect,
    validate_effect,
)
from .steering import (
    Assemblage,
    ScenarioEvaluator,
    SteeringScenario,
    assemblage,
    bob_marginal,
    resource_map,
    steering_gradient,
    steering_robustness,
    steering_value_and_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "Assemblage",
    "BipartiteState",
    "ControlHamiltonian",
    "DegenerateRootError",
    "DriftGenerator",
    "DriftKind",
    "FourVector",
    "HermitianMatrix2",
    "InternalConsistencyError",
    "InvalidEffectError",
    "LandscapeGrid",
    "NoiseInsufficientError",
    "NoiseParams",
    "NotDifferentiableError",
    "OptimizeConfig",
    "OptimizeResult",
    "PulseSequence",
    "ScenarioEvaluator",
    "SteerctlError",
    "SteeringScenario",
    "SweepPoint",
    "TransferMatrix",
    "UnsupportedStateError",
    "apply_noise",
    "assemblage",
    "bob_marginal",
    "c_functional",
    "complement",
    "control_matrix",
    "drift_matrix",
    "effect_from_matrix",
    "effect_to_matrix",
    "expm_frechet",
    "is_jointly_measurable",
    "is_unital",
    "landscape",
    "minkowski",
    "naive_optimize",
    "optimize",
    "pauli_transfer_matrix",
    "propagate",
    "propagate_schrodinger",
    "propagate_with_jacobian",
    "propagator_jacobian",
    "resource_map",
    "robustness",
    "robustness_gradient",
    "sharp_effect",
    "steering_gradient",
    "steering_robustness",
    "steering_value_and_gradient",
    "time_sweep",
    "validate_effect",
]
