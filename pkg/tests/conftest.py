"""Independent dense-matrix oracles.

Nothing here reuses the package's tensor kernels: gates are embedded into
full 2^n x 2^n matrices bit by bit, and channels are written out as Pauli sums.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from ampopt.ir import GateKind

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = [I2, PX, PY, PZ]


def rz_matrix(a):
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


SX_MATRIX = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
CX_MATRIX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def embed(g_matrix, qubits, n):
    """Full-space matrix of a k-qubit gate; qubit 0 is the most significant bit."""
    k = len(qubits)
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        sub_in = int("".join(str(bits[q]) for q in qubits), 2) if k else 0
        for sub_out in range(2**k):
            new = list(bits)
            for j, q in enumerate(qubits):
                new[q] = (sub_out >> (k - 1 - j)) & 1
            row = int("".join(map(str, new)), 2)
            full[row, col] += g_matrix[sub_out, sub_in]
    return full


def gate_matrix(g, n):
    if g.kind is GateKind.RZ:
        return embed(rz_matrix(g.angle), g.qubits, n)
    if g.kind is GateKind.SX:
        return embed(SX_MATRIX, g.qubits, n)
    if g.kind is GateKind.H:
        return embed(H_MATRIX, g.qubits, n)
    if g.kind is GateKind.X:
        return embed(PX, g.qubits, n)
    if g.kind is GateKind.CX:
        return embed(CX_MATRIX, g.qubits, n)
    if g.kind is GateKind.MCPHASE:
        k = len(g.qubits)
        diag = np.ones(2**k, dtype=complex)
        diag[-1] = np.exp(1j * g.angle)
        return embed(np.diag(diag), g.qubits, n)
    raise AssertionError(g.kind)


def dense_unitary(gates, n):
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = gate_matrix(g, n) @ u
    return u


def statevector(gates, n):
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    for g in gates:
        psi = gate_matrix(g, n) @ psi
    return psi


def equal_up_to_phase(a, b, tol=1e-9):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[idx]) < 1e-12:
        return False
    phase = b[idx] / a[idx]
    return abs(abs(phase) - 1) < tol and np.allclose(a * phase, b, atol=tol, rtol=0)


def pauli_channel(rho, qubits, p, n):
    """(1 - P) rho + P/(4^k - 1) * sum of non-identity Pauli conjugations."""
    k = len(qubits)
    out = (1 - p) * rho
    for combo in itertools.product(range(4), repeat=k):
        if not any(combo):
            continue
        full = np.eye(2**n, dtype=complex)
        for q, c in zip(qubits, combo):
            full = embed(PAULIS[c], (q,), n) @ full
        out = out + p / (4**k - 1) * full @ rho @ full.conj().T
    return out


def random_density(n, rng, rank=None):
    dim = 2**n
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion for the run summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
