"""causal-probe: projective measurements of nonlocal variables on two-spin,
two-oscillator and lattice scalar-field systems, with quantitative
superluminal-signaling diagnostics and cutoff-scaling fits."""

__version__ = "0.1.0"

from .policy import DEFAULT_POLICY, NumericPolicy, TruncationError
from .core import (
    MeasurementScheme,
    Operator,
    OutcomeEnsemble,
    SchemeDiagnostics,
    StateVector,
    born_ensemble,
    embed_local,
    post_measurement_expectation,
    qndsv_scheme,
    reduced_projector,
    tensor_state,
    validate_scheme,
)
from .harness import Scenario, ScenarioError, compare_schemes, cutoff_sweep, run_scenario

__all__ = [
    "DEFAULT_POLICY",
    "MeasurementScheme",
    "NumericPolicy",
    "Operator",
    "OutcomeEnsemble",
    "Scenario",
    "ScenarioError",
    "SchemeDiagnostics",
    "StateVector",
    "TruncationError",
    "born_ensemble",
    "compare_schemes",
    "cutoff_sweep",
    "embed_local",
    "post_measurement_expectation",
    "qndsv_scheme",
    "reduced_projector",
    "run_scenario",
    "tensor_state",
    "validate_scheme",
    "__version__",
]
