"""Exact density-matrix simulation with per-gate depolarizing channels, and a
Pauli-trajectory sampler used to cross-check it.

States are kept as tensors with one length-2 axis per qubit (qubit 0 first,
so basis index ``int(bitstring, 2)``). A density matrix has n row axes
followed by n column axes; a trajectory batch has a leading shot axis.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from collections.abc import Iterable, Sequence

import numpy as np

from .ir import Circuit, CircuitError, GateKind, GateOp, MarkedSet
from .noise import NoiseProfile

log = logging.getLogger(__name__)

_S2 = 1 / math.sqrt(2)
SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
H = np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex)

TRACE_CHECK_EVERY = 1000
TRACE_TOLERANCE = 1e-12


def _at(ndim: int, fixed: dict[int, int]) -> tuple:
    index = [slice(None)] * ndim
    for axis, value in fixed.items():
        index[axis] = value
    return tuple(index)


def _mix(t: np.ndarray, axis: int, u: np.ndarray) -> None:
    i0, i1 = _at(t.ndim, {axis: 0}), _at(t.ndim, {axis: 1})
    a, b = t[i0], t[i1]
    new0 = u[0, 0] * a + u[0, 1] * b
    new1 = u[1, 0] * a + u[1, 1] * b
    t[i0], t[i1] = new0, new1


def _swap(t: np.ndarray, axis: int, fixed: dict[int, int] | None = None) -> None:
    fixed = fixed or {}
    i0 = _at(t.ndim, {**fixed, axis: 0})
    i1 = _at(t.ndim, {**fixed, axis: 1})
    tmp = t[i0].copy()
    t[i0] = t[i1]
    t[i1] = tmp


def _phase(t: np.ndarray, axes: Sequence[int], factor: complex) -> None:
    t[_at(t.ndim, {a: 1 for a in axes})] *= factor


def _apply(t: np.ndarray, axes: Sequence[int], g: GateOp, conj: bool = False) -> None:
    """Left-multiply ``t`` by the gate acting on ``axes`` (conjugated if asked)."""
    kind = g.kind
    if kind is GateKind.RZ or kind is GateKind.MCPHASE:
        # Relative phase only; the global factor cancels in every use here.
        phase = np.exp(1j * g.angle)
        _phase(t, axes, phase.conjugate() if conj else phase)
    elif kind is GateKind.SX:
        _mix(t, axes[0], SX.conj() if conj else SX)
    elif kind is GateKind.H:
        _mix(t, axes[0], H)
    elif kind is GateKind.X:
        _swap(t, axes[0])
    elif kind is GateKind.CX:
        _swap(t, axes[1], {axes[0]: 1})
    else:  # pragma: no cover
        raise CircuitError(f"cannot simulate {kind}")


def _check_gate(g: GateOp, n: int) -> None:
    problems = g.problems(n)
    if problems:
        raise CircuitError("; ".join(problems))


class DensityMatrix:
    """Mutable 2^n x 2^n density matrix; methods update in place and return self."""

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=complex)
        dim = data.shape[0]
        n = dim.bit_length() - 1
        if data.shape != (dim, dim) or 2**n != dim:
            raise ValueError(f"density matrix must be 2^n x 2^n, got {data.shape}")
        self.n = n
        self._t = np.array(data).reshape((2,) * (2 * n))

    @classmethod
    def zero(cls, n: int) -> DensityMatrix:
        data = np.zeros((2**n, 2**n), dtype=complex)
        data[0, 0] = 1.0
        return cls(data)

    @classmethod
    def from_statevector(cls, psi: np.ndarray) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> DensityMatrix:
        return cls(np.eye(2**n, dtype=complex) / 2**n)

    @property
    def data(self) -> np.ndarray:
        return self._t.reshape(2**self.n, 2**self.n)

    def copy(self) -> DensityMatrix:
        return DensityMatrix(self.data.copy())

    def trace(self) -> complex:
        return np.trace(self.data)

    def probabilities(self) -> np.ndarray:
        return np.real(np.diagonal(self.data)).copy()

    def apply_gate(self, g: GateOp) -> DensityMatrix:
        _check_gate(g, self.n)
        _apply(self._t, g.qubits, g)
        _apply(self._t, [q + self.n for q in g.qubits], g, conj=True)
        return self

    def apply_depolarizing(self, qubits: Sequence[int], lam: float) -> DensityMatrix:
        """(1 - lam) rho + lam * Tr_qubits[rho] (x) I / 2^k on the listed qubits."""
        k = len(qubits)
        bound = 4**k / (4**k - 1)
        if not 0 <= lam <= bound:
            raise ValueError(f"lambda {lam!r} outside [0, {bound!r}] for {k} qubit(s)")
        if lam == 0:
            return self
        t, n = self._t, self.n
        rows, cols = list(qubits), [q + n for q in qubits]
        values = list(itertools.product((0, 1), repeat=k))

        def block(a, b):
            return _at(t.ndim, {**dict(zip(rows, a)), **dict(zip(cols, b))})

        reduced = sum(t[block(a, a)] for a in values) / 2**k
        for a in values:
            for b in values:
                if a == b:
                    t[block(a, a)] = (1 - lam) * t[block(a, a)] + lam * reduced
                else:
                    t[block(a, b)] *= 1 - lam
        return self


def apply_gate(rho: DensityMatrix, g: GateOp) -> DensityMatrix:
    """rho -> U rho U^dagger, returned as a new matrix."""
    return rho.copy().apply_gate(g)


def apply_depolarizing(rho: DensityMatrix, qubits: Sequence[int], lam: float) -> DensityMatrix:
    return rho.copy().apply_depolarizing(qubits, lam)


@dataclass(frozen=True)
class OutcomeDistribution:
    n: int
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (2**self.n,):
            raise ValueError(f"expected {2**self.n} probabilities, got {p.shape}")
        if p.min() < -1e-10 or abs(p.sum() - 1) > 1e-10:
            raise ValueError("not a probability distribution")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def __getitem__(self, bitstring: str) -> float:
        return float(self.probabilities[int(bitstring, 2)])


def success_probability(dist: OutcomeDistribution, marked: MarkedSet) -> float:
    if dist.n != marked.n:
        raise ValueError(f"distribution over {dist.n} qubits, marked states over {marked.n}")
    return float(sum(dist.probabilities[i] for i in marked.indices()))


class _Evolution:
    """Noisy density-matrix evolution with periodic trace-drift checks."""

    def __init__(self, n: int, profile: NoiseProfile):
        self.rho = DensityMatrix.zero(n)
        self.profile = profile
        self.ops = 0
        self.renormalizations = 0

    def run(self, gates: Iterable[GateOp]) -> None:
        rho, profile = self.rho, self.profile
        for g in gates:
            rho.apply_gate(g)
            lam = profile.lambda_for(g)
            if lam:
                rho.apply_depolarizing(g.qubits, lam)
            self.ops += 1
            if self.ops % TRACE_CHECK_EVERY == 0:
                self._check_trace()

    def _check_trace(self) -> None:
        tr = self.rho.trace().real
        if abs(tr - 1) > TRACE_TOLERANCE:
            self.rho._t /= tr
            self.renormalizations += 1
            log.info("renormalized trace %.17g after %d gates", tr, self.ops)

    def distribution(self) -> OutcomeDistribution:
        p = self.rho.probabilities()
        return OutcomeDistribution(self.rho.n, p / p.sum())


def _segment_gates(c: Circuit, t: int) -> tuple[GateOp, ...]:
    start, end = c.segments[t - 1]
    return c.gates[start:end]


def _upto(c: Circuit, upto: int | None) -> int:
    upto = c.iterations if upto is None else upto
    if not 0 <= upto <= c.iterations:
        raise CircuitError(f"upto={upto} outside [0, {c.iterations}]")
    return upto


def simulate(c: Circuit, profile: NoiseProfile, upto: int | None = None) -> OutcomeDistribution:
    """Exact outcome distribution after the preamble and iterations 1..upto."""
    upto = _upto(c, upto)
    evo = _Evolution(c.n, profile)
    evo.run(c.preamble_gates())
    for t in range(1, upto + 1):
        evo.run(_segment_gates(c, t))
    return evo.distribution()


def sweep(c: Circuit, profile: NoiseProfile, marked: MarkedSet) -> list[tuple[int, float]]:
    """Observed success after each of t = 0..T iterations, evolving once."""
    if marked.n != c.n:
        raise ValueError(f"marked states over {marked.n} qubits, circuit has {c.n}")
    evo = _Evolution(c.n, profile)
    evo.run(c.preamble_gates())
    out = [(0, success_probability(evo.distribution(), marked))]
    for t in range(1, c.iterations + 1):
        evo.run(_segment_gates(c, t))
        out.append((t, success_probability(evo.distribution(), marked)))
    return out


def _pauli_kick(states: np.ndarray, qubits: Sequence[int], codes: np.ndarray) -> None:
    # codes[i] in 1..4^k-1 selects a non-identity Pauli for shot i; two bits per
    # qubit (bit 0: X part, bit 1: Z part). Y differs from XZ by a phase only.
    for j, q in enumerate(qubits):
        part = (codes >> (2 * j)) & 3
        z = np.nonzero(part & 2)[0]
        if z.size:
            states[(z,) + _at(states.ndim - 1, {q: 1})] *= -1
        xs = np.nonzero(part & 1)[0]
        if xs.size:
            sub = states[xs]
            _swap(sub, q + 1)
            states[xs] = sub


def _trajectory_chunk(gates, profile, n, shots, rng) -> np.ndarray:
    states = np.zeros((shots,) + (2,) * n, dtype=complex)
    states[(slice(None),) + (0,) * n] = 1.0
    for g in gates:
        _apply(states, [q + 1 for q in g.qubits], g)
        p = profile.p_for(g)
        if p:
            hit = np.nonzero(rng.random(shots) < p)[0]
            if hit.size:
                sub = states[hit]
                codes = rng.integers(1, 4**g.arity, size=hit.size)
                _pauli_kick(sub, g.qubits, codes)
                states[hit] = sub
    probs = np.abs(states.reshape(shots, -1)) ** 2
    cumulative = np.cumsum(probs, axis=1)
    draws = rng.random(shots) * cumulative[:, -1]
    outcomes = (cumulative < draws[:, None]).sum(axis=1)
    return np.bincount(np.minimum(outcomes, 2**n - 1), minlength=2**n)


def trajectory_sample(
    c: Circuit,
    profile: NoiseProfile,
    shots: int,
    seed: int,
    upto: int | None = None,
) -> OutcomeDistribution:
    """Empirical distribution from Pauli-error statevector trajectories.

    After each gate, with probability P a uniformly random non-identity Pauli
    hits the gate's qubits. Shots run in fixed-size blocks, each seeded from
    (seed, block index), so the result depends only on the arguments.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    upto = _upto(c, upto)
    gates = c.gates[: c.segments[upto - 1][1]] if upto else c.preamble_gates()
    for g in gates:
        _check_gate(g, c.n)
    block = max(1, 2**20 // 2**c.n)
    counts = np.zeros(2**c.n, dtype=np.int64)
    for index, start in enumerate(range(0, shots, block)):
        rng = np.random.default_rng([seed, index])
        counts += _trajectory_chunk(gates, profile, c.n, min(block, shots - start), rng)
    return OutcomeDistribution(c.n, counts / shots)
