"""Circuit representation with amplification metadata and iteration segments.

Intrinsics (amplification_begin/end, iteration_begin/end) are not stored as
pseudo-gates. They become ``Circuit.meta`` plus ``Circuit.segments``, so noise
loops over ``gates`` never have to skip non-gate entries.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from collections.abc import Iterable, Sequence


class GateKind(str, enum.Enum):
    RZ = "rz"
    SX = "sx"
    CX = "cx"
    X = "x"
    H = "h"
    MCPHASE = "mcphase"


_FIXED_ARITY = {
    GateKind.RZ: 1,
    GateKind.SX: 1,
    GateKind.X: 1,
    GateKind.H: 1,
    GateKind.CX: 2,
}
_ANGLED = {GateKind.RZ, GateKind.MCPHASE}

BASIS_KINDS = frozenset({GateKind.RZ, GateKind.SX, GateKind.CX})


class CircuitError(ValueError):
    """Raised for malformed circuits or out-of-range segment requests."""


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle))

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def problems(self, n: int) -> list[str]:
        out = []
        expected = _FIXED_ARITY.get(self.kind)
        if expected is not None and self.arity != expected:
            out.append(f"{self.kind.value} expects {expected} qubit(s), got {self.arity}")
        if self.kind is GateKind.MCPHASE and self.arity < 1:
            out.append("mcphase needs at least one qubit")
        if len(set(self.qubits)) != self.arity:
            out.append(f"duplicate qubit in {self.kind.value} {self.qubits}")
        for q in self.qubits:
            if not 0 <= q < n:
                out.append(f"qubit {q} out of range for {n} qubits")
        if self.kind in _ANGLED:
            if self.angle is None:
                out.append(f"{self.kind.value} requires an angle")
            elif not math.isfinite(self.angle):
                out.append(f"{self.kind.value} angle is not finite")
        elif self.angle is not None:
            out.append(f"{self.kind.value} takes no angle")
        return out


def rz(q: int, angle: float) -> GateOp:
    return GateOp(GateKind.RZ, (q,), angle)


def sx(q: int) -> GateOp:
    return GateOp(GateKind.SX, (q,))


def cx(control: int, target: int) -> GateOp:
    return GateOp(GateKind.CX, (control, target))


def x(q: int) -> GateOp:
    return GateOp(GateKind.X, (q,))


def h(q: int) -> GateOp:
    return GateOp(GateKind.H, (q,))


def mcphase(qubits: Sequence[int], angle: float) -> GateOp:
    return GateOp(GateKind.MCPHASE, tuple(qubits), angle)


def amplitude_angle(m: int, n: int) -> float:
    return math.asin(math.sqrt(m / 2**n))


@dataclass(frozen=True)
class AmplificationMeta:
    """What ``amplification_begin`` conveys.

    ``m`` and ``t_opt`` may be None when a parsed file only supplied theta.
    """

    theta: float
    n: int
    m: int | None = None
    t_opt: int | None = None

    def problems(self) -> list[str]:
        out = []
        if not math.isfinite(self.theta) or not 0 < self.theta <= math.pi / 2:
            out.append(f"theta {self.theta!r} outside (0, pi/2]")
        if self.m is not None:
            if not 1 <= self.m < 2**self.n:
                out.append(f"marked count {self.m} outside [1, 2^{self.n})")
            elif abs(self.theta - amplitude_angle(self.m, self.n)) > 1e-12:
                out.append("theta inconsistent with marked count")
        if self.t_opt is not None and self.t_opt < 1:
            out.append(f"t_opt must be >= 1, got {self.t_opt}")
        return out


@dataclass(frozen=True)
class MarkedSet:
    """Winning basis states as n-character bitstrings; character i is qubit i."""

    n: int
    states: frozenset[str]

    def __post_init__(self):
        states = frozenset(self.states)
        object.__setattr__(self, "states", states)
        if not states:
            raise ValueError("marked set is empty")
        for s in states:
            if len(s) != self.n or set(s) - {"0", "1"}:
                raise ValueError(f"marked state {s!r} is not a {self.n}-bit string")
        if len(states) >= 2**self.n:
            raise ValueError("every basis state is marked")

    @classmethod
    def of(cls, states: Iterable[str]) -> MarkedSet:
        states = list(states)
        if not states:
            raise ValueError("marked set is empty")
        return cls(len(states[0]), frozenset(states))

    @property
    def m(self) -> int:
        return len(self.states)

    def indices(self) -> list[int]:
        """Computational-basis indices, qubit 0 being the most significant bit."""
        return sorted(int(s, 2) for s in self.states)


@dataclass(frozen=True)
class Circuit:
    """Ordered basis-gate list over ``n`` qubits.

    ``segments`` are half-open ``(start, end)`` gate-index ranges, one per
    amplification iteration. Gates before the first segment form the preamble.
    """

    n: int
    gates: tuple[GateOp, ...]
    meta: AmplificationMeta | None = None
    segments: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "segments", tuple((int(a), int(b)) for a, b in self.segments))

    @property
    def preamble(self) -> tuple[int, int]:
        end = self.segments[0][0] if self.segments else len(self.gates)
        return (0, end)

    @property
    def iterations(self) -> int:
        return len(self.segments)

    def preamble_gates(self) -> tuple[GateOp, ...]:
        return self.gates[slice(*self.preamble)]


def validate(c: Circuit) -> list[str]:
    """Every invariant violation in ``c``; an empty list means valid."""
    out = []
    if c.n < 1:
        out.append(f"qubit count must be positive, got {c.n}")
    for i, g in enumerate(c.gates):
        out.extend(f"gate {i}: {p}" for p in g.problems(c.n))
    if c.meta is not None:
        out.extend(f"meta: {p}" for p in c.meta.problems())
        if c.meta.n != c.n:
            out.append(f"meta: qubit count {c.meta.n} differs from circuit {c.n}")
    elif c.segments:
        out.append("segments present without amplification meta")

    prev_end = None
    for k, (start, end) in enumerate(c.segments):
        if start > end:
            out.append(f"segment {k + 1} has start {start} after end {end}")
        if start < 0 or end > len(c.gates):
            out.append(f"segment {k + 1} exceeds gate list")
        if prev_end is not None:
            if start < prev_end:
                out.append("segments overlap")
            elif start > prev_end:
                out.append(f"gap before segment {k + 1}")
        prev_end = end
    if c.segments and prev_end != len(c.gates):
        out.append("gates after the last segment belong to no iteration")
    return out


def _check_t(c: Circuit, t: int, lo: int) -> None:
    if not lo <= t <= c.iterations:
        raise CircuitError(f"iteration {t} out of range [{lo}, {c.iterations}]")


def iteration_segment(c: Circuit, t: int) -> Circuit:
    """Gates of iteration ``t`` (1-based) as a standalone fragment."""
    _check_t(c, t, 1)
    start, end = c.segments[t - 1]
    return Circuit(c.n, c.gates[start:end])


def truncate_after(c: Circuit, t: int) -> Circuit:
    """Keep the preamble and iterations 1..t; drop everything later."""
    _check_t(c, t, 0)
    end = c.segments[t - 1][1] if t else c.preamble[1]
    return replace(c, gates=c.gates[:end], segments=c.segments[:t])


def fragment(n: int, gates: Iterable[GateOp]) -> Circuit:
    return Circuit(n, tuple(gates))


def instrumented(
    n: int,
    preamble: Sequence[GateOp],
    iterations: Sequence[Sequence[GateOp]],
    meta: AmplificationMeta,
) -> Circuit:
    """Assemble a circuit from a preamble and per-iteration gate lists."""
    gates = list(preamble)
    segments = []
    for body in iterations:
        start = len(gates)
        gates.extend(body)
        segments.append((start, len(gates)))
    return Circuit(n, tuple(gates), meta, tuple(segments))
