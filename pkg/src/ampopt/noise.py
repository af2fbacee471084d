"""Depolarizing noise profiles and per-segment noise accumulation."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from collections.abc import Iterable, Mapping
from types import MappingProxyType

from .ir import Circuit, GateKind, GateOp

REQUIRED_KINDS = (GateKind.RZ, GateKind.SX, GateKind.CX)
_PROFILE_KINDS = {GateKind.RZ: 1, GateKind.SX: 1, GateKind.X: 1, GateKind.H: 1, GateKind.CX: 2}


class ProfileError(ValueError):
    pass


def lambda_bound(arity: int) -> float:
    """Largest admissible depolarizing parameter for an ``arity``-qubit channel."""
    return 4**arity / (4**arity - 1)


def lambda_to_p(lam: float, arity: int) -> float:
    """Probability that a gate suffers a non-identity Pauli error.

    P = lambda * (4^a - 1) / 4^a, from twirling the depolarizing channel into
    uniform Pauli form.
    """
    if arity not in (1, 2):
        raise ValueError(f"arity must be 1 or 2, got {arity}")
    if not 0 <= lam <= lambda_bound(arity):
        raise ProfileError(f"lambda {lam!r} outside [0, {lambda_bound(arity)!r}] for {arity} qubit(s)")
    d2 = 4**arity
    return min(1.0, lam * (d2 - 1) / d2)


@dataclass(frozen=True)
class NoiseProfile:
    """Per-gate-kind depolarizing parameters, optionally overridden per position."""

    name: str
    lambda_by_kind: Mapping[GateKind, float]
    per_position: Mapping[tuple[GateKind, tuple[int, ...]], float] = field(default_factory=dict)

    def __post_init__(self):
        by_kind = {GateKind(k): float(v) for k, v in self.lambda_by_kind.items()}
        overrides = {(GateKind(k), tuple(q)): float(v) for (k, q), v in self.per_position.items()}
        for kind, lam in by_kind.items():
            _check_bound(kind, lam)
        for (kind, qubits), lam in overrides.items():
            _check_bound(kind, lam)
            if len(qubits) != _PROFILE_KINDS[kind]:
                raise ProfileError(f"override for {kind.value} names {len(qubits)} qubit(s)")
        object.__setattr__(self, "lambda_by_kind", MappingProxyType(by_kind))
        object.__setattr__(self, "per_position", MappingProxyType(overrides))

    @classmethod
    def uniform(cls, sx: float, cx: float, rz: float = 0.0, name: str | None = None) -> NoiseProfile:
        return cls(name or f"uniform-sx{sx:g}-cx{cx:g}", {"rz": rz, "sx": sx, "cx": cx})

    @classmethod
    def noiseless(cls) -> NoiseProfile:
        return cls.uniform(0.0, 0.0, name="noiseless")

    @classmethod
    def maximal(cls) -> NoiseProfile:
        """Every gate kind at its upper bound: a uniform Pauli channel after each gate."""
        return cls("maximal", {k: lambda_bound(a) for k, a in _PROFILE_KINDS.items()})

    def lambda_for(self, g: GateOp) -> float:
        lam = self.per_position.get((g.kind, g.qubits))
        if lam is not None:
            return lam
        try:
            return self.lambda_by_kind[g.kind]
        except KeyError:
            raise ProfileError(f"profile {self.name!r} has no parameter for {g.kind.value}") from None

    def p_for(self, g: GateOp) -> float:
        return lambda_to_p(self.lambda_for(g), g.arity)

    def to_dict(self) -> dict:
        doc = {"name": self.name, "lambda": {k.value: v for k, v in self.lambda_by_kind.items()}}
        if self.per_position:
            doc["overrides"] = [
                {"kind": k.value, "qubits": list(q), "lambda": v} for (k, q), v in self.per_position.items()
            ]
        return doc


def _check_bound(kind: GateKind, lam: float) -> None:
    if kind not in _PROFILE_KINDS:
        raise ProfileError(f"gate kind {kind.value} cannot carry a noise parameter")
    bound = lambda_bound(_PROFILE_KINDS[kind])
    if not (math.isfinite(lam) and 0 <= lam <= bound):
        raise ProfileError(f"lambda for {kind.value} = {lam!r} outside [0, {bound!r}]")


def load_profile(document: str | Mapping) -> NoiseProfile:
    """Build a profile from JSON text (or an already decoded mapping).

    Schema: ``{"name": str, "lambda": {"rz": num, "sx": num, "cx": num},
    "overrides": [{"kind": str, "qubits": [int], "lambda": num}]}``.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ProfileError(f"profile is not valid JSON: {exc}") from None
    if not isinstance(document, Mapping):
        raise ProfileError("profile must be a JSON object")
    name = document.get("name")
    if not isinstance(name, str):
        raise ProfileError("profile needs a string 'name'")
    table = document.get("lambda")
    if not isinstance(table, Mapping):
        raise ProfileError("profile needs a 'lambda' object")
    by_kind = {}
    for key, value in table.items():
        try:
            kind = GateKind(key)
        except ValueError:
            raise ProfileError(f"unknown gate kind {key!r}") from None
        by_kind[kind] = _number(value, f"lambda.{key}")
    for kind in REQUIRED_KINDS:
        if kind not in by_kind:
            raise ProfileError(f"missing kind {kind.value!r} in 'lambda'")

    overrides = {}
    entries = document.get("overrides", [])
    if not isinstance(entries, list):
        raise ProfileError("'overrides' must be a list")
    for i, entry in enumerate(entries):
        if not isinstance(entry, Mapping) or set(entry) != {"kind", "qubits", "lambda"}:
            raise ProfileError(f"override {i} needs exactly 'kind', 'qubits', 'lambda'")
        try:
            kind = GateKind(entry["kind"])
        except ValueError:
            raise ProfileError(f"override {i}: unknown gate kind {entry['kind']!r}") from None
        qubits = entry["qubits"]
        if not isinstance(qubits, list) or not all(isinstance(q, int) and q >= 0 for q in qubits):
            raise ProfileError(f"override {i}: 'qubits' must be a list of non-negative ints")
        overrides[(kind, tuple(qubits))] = _number(entry["lambda"], f"overrides[{i}].lambda")
    return NoiseProfile(name, by_kind, overrides)


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProfileError(f"{where} must be a number")
    return float(value)


@dataclass(frozen=True)
class SegmentNoise:
    noise_rate: float

    def __post_init__(self):
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ValueError(f"noise rate {self.noise_rate!r} outside [0, 1]")


def combine(*rates: float) -> float:
    """Probability that at least one of several independent events occurs."""
    return noise_from_log_survival(math.fsum(math.log1p(-r) if r < 1 else -math.inf for r in rates))


def noise_from_log_survival(log_survival: float) -> float:
    return min(1.0, max(0.0, -math.expm1(log_survival)))


def log_survival(gates: Iterable[GateOp], profile: NoiseProfile) -> float:
    """Sum of log(1 - p) over the gates; -inf once any gate is certain to err."""
    counts = Counter(gates)
    terms = []
    for g, count in counts.items():
        p = profile.p_for(g)
        if p >= 1.0:
            return -math.inf
        if p:
            terms.append(count * math.log1p(-p))
    return math.fsum(terms)


def calculate_noise(segment: Circuit | Iterable[GateOp], profile: NoiseProfile) -> SegmentNoise:
    """Chance that at least one gate in the segment was hit by a Pauli error."""
    gates = segment.gates if isinstance(segment, Circuit) else segment
    return SegmentNoise(noise_from_log_survival(log_survival(gates, profile)))


def synthetic_segment(counts: Mapping[str | GateKind, int], n: int = 2) -> Circuit:
    """Fragment with the requested number of gates per kind on placeholder qubits."""
    gates = []
    for key, count in counts.items():
        kind = GateKind(key)
        if count < 0:
            raise ValueError(f"negative count for {kind.value}")
        if kind is GateKind.CX:
            proto = GateOp(kind, (0, 1))
        elif kind is GateKind.RZ:
            proto = GateOp(kind, (0,), 0.0)
        elif kind is GateKind.MCPHASE:
            raise ValueError("synthetic segments hold basis gates only")
        else:
            proto = GateOp(kind, (0,))
        gates += [proto] * count
    return Circuit(n, tuple(gates))
