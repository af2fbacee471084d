import itertools
import math
from collections import Counter

import numpy as np
import pytest

from ampopt.ir import GateKind, MarkedSet, amplitude_angle, h, mcphase, x
from ampopt.synth import (
    GroverSpec,
    build_amplification_circuit,
    build_diffuser,
    build_oracle,
    grover_circuit,
    grover_params,
    lower_to_basis,
)

from conftest import H_MATRIX, PX, dense_unitary, equal_up_to_phase, gate_matrix, statevector


@pytest.mark.parametrize("m, n, t_opt", [(1, 5, 4), (1, 7, 8), (1, 9, 17), (3, 5, 2), (1, 2, 1)])
def test_grover_params(m, n, t_opt):
    theta, t = grover_params(m, n)
    assert t == t_opt
    assert theta == pytest.approx(math.asin(math.sqrt(m / 2**n)), abs=1e-15)


def test_theta_for_five_qubits():
    theta, _ = grover_params(1, 5)
    assert theta == pytest.approx(0.1777106008, abs=1e-10)


@pytest.mark.parametrize("m, n", [(0, 3), (8, 3)])
def test_grover_params_range(m, n):
    with pytest.raises(ValueError):
        grover_params(m, n)


def only_basis(gates):
    return {g.kind for g in gates} <= {GateKind.RZ, GateKind.SX, GateKind.CX}


def test_lower_h():
    lowered = lower_to_basis([h(0)])
    assert [g.kind for g in lowered] == [GateKind.RZ, GateKind.SX, GateKind.RZ]
    assert equal_up_to_phase(dense_unitary(lowered, 1), H_MATRIX)


def test_lower_x():
    lowered = lower_to_basis([x(0)])
    assert [g.kind for g in lowered] == [GateKind.SX, GateKind.SX]
    assert equal_up_to_phase(dense_unitary(lowered, 1), PX)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("angle", [math.pi, 0.37, -1.2])
def test_lower_mcphase(k, angle):
    g = mcphase(tuple(range(k)), angle)
    lowered = lower_to_basis([g])
    assert only_basis(lowered)
    assert equal_up_to_phase(dense_unitary(lowered, k), gate_matrix(g, k))


def test_lower_mcphase_on_scattered_qubits():
    g = mcphase((4, 1, 3), math.pi)
    lowered = lower_to_basis([g])
    assert equal_up_to_phase(dense_unitary(lowered, 5), gate_matrix(g, 5))


def test_mcphase_gate_count_is_linear_in_hilbert_dimension():
    for k in range(1, 10):
        counts = Counter(g.kind for g in lower_to_basis([mcphase(tuple(range(k)), math.pi)]))
        assert counts[GateKind.RZ] == 2**k - 1
        assert counts[GateKind.CX] == 2**k - 2


def oracle_diagonal(marked):
    return np.array([-1 if format(i, f"0{marked.n}b") in marked.states else 1 for i in range(2**marked.n)])


def test_oracle_two_qubit_cz():
    u = dense_unitary(build_oracle(MarkedSet.of(["11"])), 2)
    assert equal_up_to_phase(u, np.diag([1, 1, 1, -1]).astype(complex))
    u = dense_unitary(build_oracle(MarkedSet.of(["00"])), 2)
    assert equal_up_to_phase(u, np.diag([-1, 1, 1, 1]).astype(complex))


@pytest.mark.parametrize("n", [2, 3])
def test_oracle_exhaustive_small(n):
    states = [format(i, f"0{n}b") for i in range(2**n)]
    for size in (1, 2, 3):
        for combo in itertools.combinations(states, size):
            if size >= 2**n:
                continue
            marked = MarkedSet.of(combo)
            u = dense_unitary(build_oracle(marked), n)
            assert equal_up_to_phase(u, np.diag(oracle_diagonal(marked)).astype(complex))


@pytest.mark.parametrize("n", [4, 5])
def test_oracle_random_marked_sets(n, rng):
    for _ in range(3):
        m = int(rng.integers(1, 4))
        picks = rng.choice(2**n, size=m, replace=False)
        marked = MarkedSet.of(format(int(i), f"0{n}b") for i in picks)
        u = dense_unitary(build_oracle(marked), n)
        assert only_basis(build_oracle(marked))
        assert equal_up_to_phase(u, np.diag(oracle_diagonal(marked)).astype(complex))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_diffuser_matrix(n):
    s = np.full(2**n, 2 ** (-n / 2))
    target = 2 * np.outer(s, s) - np.eye(2**n)
    u = dense_unitary(build_diffuser(n), n)
    assert equal_up_to_phase(u, target.astype(complex), tol=1e-10)
    # |s> is a +1 eigenvector of 2|s><s| - I, so the fragment maps it to itself up to phase.
    assert equal_up_to_phase((u @ s)[:, None], s[:, None].astype(complex), tol=1e-10)


def test_two_qubit_single_iteration_is_exact():
    c = grover_circuit(["10"])
    assert c.iterations == 1
    psi = statevector(c.gates, 2)
    assert abs(psi[int("10", 2)]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_five_qubit_circuit_reaches_peak():
    c = grover_circuit(["11010"])
    assert c.iterations == 4 and c.meta.t_opt == 4
    psi = statevector(c.gates, 5)
    assert abs(psi[int("11010", 2)]) ** 2 >= 0.999


def test_iterations_override():
    c = build_amplification_circuit(GroverSpec(5, MarkedSet.of(["11010"]), iterations_override=7))
    assert c.iterations == 7 and c.meta.t_opt == 4


def test_fully_lowered():
    c = grover_circuit(["101", "011"])
    assert only_basis(c.gates)


@pytest.mark.parametrize(
    "marked",
    [["01"], ["110"], ["000", "101"], ["1011"], ["0000", "1111", "0110"], ["10110"], ["00000", "11111", "10101"]],
)
def test_success_follows_sine_law(marked):
    c = grover_circuit(marked)
    n = len(marked[0])
    theta = amplitude_angle(len(marked), n)
    idx = [int(s, 2) for s in marked]
    psi = statevector(c.preamble_gates(), n)
    for t in range(c.iterations + 1):
        if t:
            start, end = c.segments[t - 1]
            psi = dense_unitary(c.gates[start:end], n) @ psi
        success = float(np.sum(np.abs(psi[idx]) ** 2))
        assert success == pytest.approx(math.sin((2 * t + 1) * theta) ** 2, abs=1e-9)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_gate_counts_linear_in_iterations(n):
    marked = MarkedSet.of(["1" * n])
    sizes = [len(build_amplification_circuit(GroverSpec(n, marked, t)).gates) for t in (1, 2, 3, 6)]
    pre = sizes[0] - (sizes[1] - sizes[0])
    per = sizes[1] - sizes[0]
    assert sizes == [pre + t * per for t in (1, 2, 3, 6)]
    assert pre == 3 * n


def test_spec_validation():
    with pytest.raises(ValueError):
        GroverSpec(1, MarkedSet.of(["1"]))
    with pytest.raises(ValueError):
        GroverSpec(3, MarkedSet.of(["11"]))
