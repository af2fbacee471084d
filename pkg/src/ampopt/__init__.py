"""Noise-aware truncation of amplitude-amplification circuits."""

from .ir import (
    AmplificationMeta,
    Circuit,
    CircuitError,
    GateKind,
    GateOp,
    MarkedSet,
    iteration_segment,
    truncate_after,
    validate,
)
from .noise import NoiseProfile, SegmentNoise, calculate_noise, lambda_to_p, load_profile, synthetic_segment
from .predict import PredictionCurve, PredictionPoint, amplification_at, find_inflection, optimize_circuit, predict_curve
from .qasm import QasmError, emit, parse
from .sim import DensityMatrix, OutcomeDistribution, simulate, success_probability, sweep, trajectory_sample
from .synth import (
    GroverSpec,
    build_amplification_circuit,
    build_diffuser,
    build_oracle,
    grover_circuit,
    grover_params,
    lower_to_basis,
)

__version__ = "0.1.0"
