from collections import Counter

import pytest
from hypothesis import given, strategies as st

from ampopt.ir import (
    AmplificationMeta,
    Circuit,
    CircuitError,
    GateKind,
    GateOp,
    MarkedSet,
    amplitude_angle,
    cx,
    instrumented,
    iteration_segment,
    rz,
    sx,
    truncate_after,
    validate,
)
from ampopt.noise import synthetic_segment
from ampopt.synth import grover_circuit


def toy(iterations=4, per_iteration=3, n=5):
    meta = AmplificationMeta(theta=amplitude_angle(1, n), n=n, m=1, t_opt=4)
    pre = [sx(q) for q in range(n)]
    bodies = [[rz(0, 0.1 * t), sx(1), cx(0, 1)][:per_iteration] for t in range(iterations)]
    return instrumented(n, pre, bodies, meta)


def test_grover_circuit_is_valid():
    assert validate(grover_circuit(["11010"])) == []


def test_overlapping_segments_reported():
    c = toy()
    bad = Circuit(c.n, c.gates, c.meta, ((5, 8), (7, 11), (11, 14), (14, 17)))
    assert "segments overlap" in validate(bad)


def test_duplicate_qubit_reported():
    c = Circuit(5, (GateOp(GateKind.CX, (3, 3)),))
    assert any("duplicate qubit" in v for v in validate(c))


@pytest.mark.parametrize(
    "gate, fragment",
    [
        (GateOp(GateKind.CX, (0,)), "expects 2"),
        (GateOp(GateKind.SX, (7,)), "out of range"),
        (GateOp(GateKind.RZ, (0,)), "requires an angle"),
        (GateOp(GateKind.RZ, (0,), float("nan")), "not finite"),
        (GateOp(GateKind.SX, (0,), 1.0), "takes no angle"),
    ],
)
def test_gate_violations(gate, fragment):
    assert any(fragment in v for v in validate(Circuit(5, (gate,))))


def test_gap_and_trailing_gates_reported():
    c = toy()
    gapped = Circuit(c.n, c.gates, c.meta, ((5, 8), (9, 11), (11, 14), (14, 17)))
    assert any("gap" in v for v in validate(gapped))
    short = Circuit(c.n, c.gates, c.meta, ((5, 8), (8, 11)))
    assert any("no iteration" in v for v in validate(short))


def test_meta_theta_consistency():
    meta = AmplificationMeta(theta=0.177713, n=5, m=1, t_opt=4)
    assert any("inconsistent" in p for p in meta.problems())
    assert AmplificationMeta(theta=0.177713, n=5).problems() == []


def test_validate_does_not_mutate():
    c = toy()
    before = (c.gates, c.segments)
    validate(c)
    assert (c.gates, c.segments) == before


def test_iteration_segment_matches_slice():
    c = toy()
    frag = iteration_segment(c, 1)
    assert frag.gates == c.gates[5:8]
    assert frag.meta is None and frag.n == c.n


def test_iteration_segment_out_of_range():
    with pytest.raises(CircuitError):
        iteration_segment(toy(), 5)
    with pytest.raises(CircuitError):
        iteration_segment(toy(), 0)


def test_iteration_segment_from_table_counts():
    body = synthetic_segment({"rz": 106, "sx": 18, "cx": 80}, n=5).gates
    meta = AmplificationMeta(theta=amplitude_angle(1, 5), n=5, m=1, t_opt=4)
    c = instrumented(5, [], [body] * 4, meta)
    counts = Counter(g.kind.value for g in iteration_segment(c, 2).gates)
    assert counts == {"rz": 106, "sx": 18, "cx": 80}


def test_truncate_examples():
    c = toy()
    three = truncate_after(c, 3)
    assert three.iterations == 3 and len(three.gates) == 5 + 3 * 3
    assert three.meta == c.meta
    zero = truncate_after(c, 0)
    assert zero.segments == () and zero.gates == c.preamble_gates()
    assert truncate_after(c, 4) == c
    with pytest.raises(CircuitError):
        truncate_after(c, 5)


def test_marked_set_checks():
    assert MarkedSet.of(["00", "11"]).m == 2
    assert MarkedSet.of(["10"]).indices() == [2]
    with pytest.raises(ValueError):
        MarkedSet(2, frozenset())
    with pytest.raises(ValueError):
        MarkedSet(2, frozenset({"101"}))
    with pytest.raises(ValueError):
        MarkedSet(1, frozenset({"0", "1"}))


circuits = st.builds(
    toy,
    iterations=st.integers(0, 6),
    per_iteration=st.integers(0, 3),
    n=st.integers(2, 6),
)


@given(circuits, st.data())
def test_truncation_properties(c, data):
    t = data.draw(st.integers(0, c.iterations))
    cut = truncate_after(c, t)
    assert validate(cut) == []
    assert truncate_after(cut, t) == cut
    assert cut.iterations == t


@given(circuits)
def test_segments_reassemble(c):
    gates = list(c.preamble_gates())
    for t in range(1, c.iterations + 1):
        gates += iteration_segment(c, t).gates
    assert tuple(gates) == c.gates
