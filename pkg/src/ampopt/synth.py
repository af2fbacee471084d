"""Front-end: build Grover circuits lowered to {rz, sx, cx} and instrumented
with iteration boundaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Iterable, Sequence

from .ir import (
    AmplificationMeta,
    Circuit,
    GateKind,
    GateOp,
    MarkedSet,
    amplitude_angle,
    cx,
    h,
    instrumented,
    mcphase,
    rz,
    sx,
    x,
)


@dataclass(frozen=True)
class GroverSpec:
    n: int
    marked: MarkedSet
    iterations_override: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 qubits")
        if self.marked.n != self.n:
            raise ValueError(f"marked states have {self.marked.n} bits, expected {self.n}")
        if self.iterations_override is not None and self.iterations_override < 1:
            raise ValueError("iterations override must be positive")


def grover_params(m: int, n: int) -> tuple[float, int]:
    """Initial amplitude angle and the noiseless optimal iteration count.

    The count is the nearest integer to arccos(a) / (2 arcsin(a)) with
    a = sqrt(m / 2**n), floored at 1.
    """
    if not 1 <= m < 2**n:
        raise ValueError(f"marked count {m} outside [1, 2^{n})")
    amplitude = math.sqrt(m / 2**n)
    theta = math.asin(amplitude)
    t_opt = max(1, round(math.acos(amplitude) / (2 * theta)))
    return theta, t_opt


def _phase_polynomial(qubits: Sequence[int], angle: float) -> list[GateOp]:
    # Phase `angle` on |1...1> of `qubits`, up to global phase, no ancillas.
    # x_1...x_k = 2^(1-k) * sum over nonempty S of (-1)^(|S|-1) parity(S).
    # Terms whose subset contains the last qubit are walked in Gray-code order
    # with the parity held on that qubit; the rest is the same problem on the
    # remaining k-1 qubits with half the angle.
    out: list[GateOp] = []
    qubits = list(qubits)
    while qubits:
        *controls, target = qubits
        k = len(qubits)
        unit = angle / 2 ** (k - 1)
        prev = 0
        for i in range(2 ** len(controls)):
            code = i ^ (i >> 1)
            flipped = code ^ prev
            if flipped:
                out.append(cx(controls[flipped.bit_length() - 1], target))
            sign = -1 if bin(code).count("1") % 2 else 1
            out.append(rz(target, sign * unit))
            prev = code
        if prev:
            out.append(cx(controls[prev.bit_length() - 1], target))
        qubits = controls
        angle /= 2
    return out


def lower_to_basis(gates: Iterable[GateOp]) -> list[GateOp]:
    """Rewrite H, X and MCPHASE over {rz, sx, cx}, preserving the unitary up to
    global phase."""
    out: list[GateOp] = []
    for g in gates:
        if g.kind is GateKind.H:
            q = g.qubits[0]
            out += [rz(q, math.pi / 2), sx(q), rz(q, math.pi / 2)]
        elif g.kind is GateKind.X:
            q = g.qubits[0]
            out += [sx(q), sx(q)]
        elif g.kind is GateKind.MCPHASE:
            out += _phase_polynomial(g.qubits, g.angle)
        else:
            out.append(g)
    return out


def _flip_zeros(state: str) -> list[GateOp]:
    return [x(q) for q, bit in enumerate(state) if bit == "0"]


def build_oracle(marked: MarkedSet, *, lower: bool = True) -> list[GateOp]:
    """Diagonal phase flip on every marked state, one X-conjugated block each."""
    gates: list[GateOp] = []
    everything = tuple(range(marked.n))
    for state in sorted(marked.states):
        flips = _flip_zeros(state)
        gates += flips + [mcphase(everything, math.pi)] + flips
    return lower_to_basis(gates) if lower else gates


def build_diffuser(n: int, *, lower: bool = True) -> list[GateOp]:
    """Reflection about the uniform superposition (2|s><s| - I up to sign)."""
    if n < 2:
        raise ValueError("diffuser needs at least 2 qubits")
    hs = [h(q) for q in range(n)]
    xs = [x(q) for q in range(n)]
    gates = hs + xs + [mcphase(tuple(range(n)), math.pi)] + xs + hs
    return lower_to_basis(gates) if lower else gates


def build_amplification_circuit(spec: GroverSpec) -> Circuit:
    theta, t_opt = grover_params(spec.marked.m, spec.n)
    t = spec.iterations_override or t_opt
    preamble = lower_to_basis(h(q) for q in range(spec.n))
    body = build_oracle(spec.marked) + build_diffuser(spec.n)
    meta = AmplificationMeta(theta=theta, n=spec.n, m=spec.marked.m, t_opt=t_opt)
    return instrumented(spec.n, preamble, [body] * t, meta)


def grover_circuit(marked: Iterable[str], iterations: int | None = None) -> Circuit:
    marked = MarkedSet.of(marked)
    return build_amplification_circuit(GroverSpec(marked.n, marked, iterations))


__all__ = [
    "GroverSpec",
    "amplitude_angle",
    "build_amplification_circuit",
    "build_diffuser",
    "build_oracle",
    "grover_circuit",
    "grover_params",
    "lower_to_basis",
]
