"""Back-end: per-iteration accuracy prediction and truncation at the
inflection point."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ir import Circuit, CircuitError, iteration_segment, truncate_after
from .noise import NoiseProfile, log_survival, noise_from_log_survival

PEAK = "peak"
LITERAL = "paper-literal"  # CLI token for the literal halting rule
CRITERIA = (PEAK, LITERAL)


def amplification_at(theta: float, t: int) -> float:
    """Noiseless probability of a marked outcome after ``t`` iterations."""
    if t < 0:
        raise ValueError("iteration must be non-negative")
    return min(1.0, max(0.0, math.sin((2 * t + 1) * theta) ** 2))


@dataclass(frozen=True)
class PredictionPoint:
    t: int
    amplification: float
    cumulative_noise: float

    @property
    def estimated_success(self) -> float:
        return self.amplification * (1.0 - self.cumulative_noise)


@dataclass(frozen=True)
class PredictionCurve:
    """Predicted points for t = 1..T plus the chosen stopping iteration.

    ``baseline`` is the t = 0 point (no amplification); its noise is zero
    unless the preamble was included.
    """

    theta: float
    points: tuple[PredictionPoint, ...]
    inflection: int
    baseline: PredictionPoint
    criterion: str = PEAK

    def at(self, t: int) -> PredictionPoint:
        return self.baseline if t == 0 else self.points[t - 1]

    def estimated(self) -> list[float]:
        """Estimated success for t = 0..T."""
        return [self.baseline.estimated_success] + [p.estimated_success for p in self.points]


def _peak(values: list[float]) -> int:
    # Strict comparison keeps the smallest t among ties.
    best = 0
    for t, v in enumerate(values):
        if v > values[best]:
            best = t
    return best


def _first_crossing(points: tuple[PredictionPoint, ...]) -> int:
    # Halt at the first t whose amplification no longer beats the accumulated
    # noise and drop that iteration with everything after it.
    for p in points:
        if p.amplification <= p.cumulative_noise:
            return p.t - 1
    return len(points)


def find_inflection(curve: PredictionCurve, criterion: str | None = None) -> int:
    """Iteration count t* in [0, T] at which to stop amplifying.

    ``peak`` takes the argmax of estimated success (ties go to fewer
    iterations); the literal rule stops at the first amplification <= noise.
    """
    criterion = criterion or curve.criterion
    if criterion == PEAK:
        return _peak(curve.estimated())
    if criterion == LITERAL:
        return _first_crossing(curve.points)
    raise ValueError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")


def predict_curve(
    c: Circuit,
    profile: NoiseProfile,
    *,
    include_preamble: bool = False,
    criterion: str = PEAK,
) -> PredictionCurve:
    """Run the noise model over every iteration segment of ``c``.

    Work is one pass over the gates; nothing is simulated.
    """
    if c.meta is None or not c.segments:
        raise CircuitError("prediction needs an instrumented circuit with at least one iteration")
    theta = c.meta.theta
    survival = log_survival(c.preamble_gates(), profile) if include_preamble else 0.0
    baseline = PredictionPoint(0, amplification_at(theta, 0), noise_from_log_survival(survival))
    points = []
    for t in range(1, c.iterations + 1):
        survival += log_survival(iteration_segment(c, t).gates, profile)
        points.append(PredictionPoint(t, amplification_at(theta, t), noise_from_log_survival(survival)))
    curve = PredictionCurve(theta, tuple(points), 0, baseline, criterion)
    return PredictionCurve(theta, curve.points, find_inflection(curve), baseline, criterion)


def optimize_circuit(
    c: Circuit,
    profile: NoiseProfile,
    *,
    include_preamble: bool = False,
    criterion: str = PEAK,
) -> tuple[Circuit, PredictionCurve]:
    """Truncate ``c`` after its predicted inflection point.

    Returns the shortened circuit and the curve it was chosen from.
    """
    curve = predict_curve(c, profile, include_preamble=include_preamble, criterion=criterion)
    return truncate_after(c, curve.inflection), curve
