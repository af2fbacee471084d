"""Reader and writer for the ``.aaq`` OpenQASM-2 subset.

Iteration structure travels in comment pragmas, so files stay loadable by
tools that know nothing about them::

    // @ampopt amplification_begin theta=0.17771... m=1 t_opt=4
    // @ampopt iteration_begin
    ...
    // @ampopt iteration_end
    // @ampopt amplification_end
"""

from __future__ import annotations

import math
import re

from .ir import AmplificationMeta, Circuit, GateKind, GateOp, validate

PRAGMA = "// @ampopt"
HEADER = "OPENQASM 2.0;"
INCLUDE = 'include "qelib1.inc";'

_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_ANGLE = re.compile(
    rf"^\s*(?P<sign>[-+]?)\s*(?:(?P<coef>{_NUMBER})\s*\*\s*)?(?P<base>pi|{_NUMBER})"
    rf"(?:\s*/\s*(?P<den>{_NUMBER}))?\s*$"
)
_QREG = re.compile(r"^qreg\s+(?P<name>[A-Za-z_]\w*)\s*\[\s*(?P<size>\d+)\s*\]\s*;$")
_GATE = re.compile(r"^(?P<name>[A-Za-z_]\w*)\s*(?:\((?P<arg>[^)]*)\))?\s*(?P<operands>[^;]*);$")
_HEADER = re.compile(r"OPENQASM\s+2(\.0)?\s*;")
_INCLUDE = re.compile(r'include\s+"[^"]*"\s*;')
_OPERAND = re.compile(r"^\s*(?P<reg>[A-Za-z_]\w*)\s*\[\s*(?P<index>\d+)\s*\]\s*$")

_ARITY = {GateKind.RZ: 1, GateKind.SX: 1, GateKind.X: 1, GateKind.H: 1, GateKind.CX: 2}
_KINDS = {kind.value: kind for kind in _ARITY}


class QasmError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def format_angle(value: float) -> str:
    return f"{value:.17g}"


def parse_angle(text: str) -> float:
    """Decimal literal or pi expression such as ``-3*pi/4`` or ``pi/2``."""
    m = _ANGLE.match(text)
    if not m:
        raise ValueError(f"unsupported angle expression {text.strip()!r}")
    base = math.pi if m["base"] == "pi" else float(m["base"])
    if m["coef"] is not None:
        if m["base"] != "pi":
            raise ValueError(f"unsupported angle expression {text.strip()!r}")
        base *= float(m["coef"])
    if m["den"] is not None:
        base /= float(m["den"])
    return -base if m["sign"] == "-" else base


def emit(c: Circuit) -> str:
    """Canonical text for ``c``: one statement per line, trailing newline."""
    problems = validate(c)
    if problems:
        raise ValueError("cannot emit invalid circuit: " + "; ".join(problems))
    if any(g.kind is GateKind.MCPHASE for g in c.gates):
        raise ValueError("lower mcphase gates before emitting")
    lines = [HEADER, INCLUDE, f"qreg q[{c.n}];"]
    lines += [_gate_line(g) for g in c.preamble_gates()]
    if c.meta is not None:
        begin = f"{PRAGMA} amplification_begin theta={format_angle(c.meta.theta)}"
        if c.meta.m is not None:
            begin += f" m={c.meta.m}"
        if c.meta.t_opt is not None:
            begin += f" t_opt={c.meta.t_opt}"
        lines.append(begin)
        for start, end in c.segments:
            lines.append(f"{PRAGMA} iteration_begin")
            lines += [_gate_line(g) for g in c.gates[start:end]]
            lines.append(f"{PRAGMA} iteration_end")
        lines.append(f"{PRAGMA} amplification_end")
    return "\n".join(lines) + "\n"


def _gate_line(g: GateOp) -> str:
    operands = ",".join(f"q[{q}]" for q in g.qubits)
    if g.kind is GateKind.RZ:
        return f"rz({format_angle(g.angle)}) {operands};"
    return f"{g.kind.value} {operands};"


class _Parser:
    def __init__(self):
        self.n: int | None = None
        self.reg: str | None = None
        self.gates: list[GateOp] = []
        self.meta: AmplificationMeta | None = None
        self.segments: list[tuple[int, int]] = []
        self.state = "preamble"  # preamble -> amplification <-> iteration -> done
        self.seen_header = False
        self.iteration_start = 0

    def line(self, lineno: int, raw: str) -> None:
        stripped = raw.strip()
        col = len(raw) - len(raw.lstrip()) + 1
        if stripped.startswith(PRAGMA):
            self.pragma(lineno, col, stripped[len(PRAGMA):].split())
            return
        code = stripped.split("//", 1)[0].strip() if "//" in stripped else stripped
        if not code:
            return
        if code.count(";") == 1 and code.endswith(";"):
            self.statement(lineno, col, code)
            return
        for statement in _split_statements(code, lineno, col):
            self.statement(lineno, col, statement)

    def statement(self, lineno: int, col: int, text: str) -> None:
        if not self.seen_header:
            if _HEADER.fullmatch(text):
                self.seen_header = True
                return
            raise QasmError("expected 'OPENQASM 2.0;' header", lineno, col)
        m = _GATE.match(text)
        if m and m["name"] not in ("qreg", "include"):  # the common case first
            self.gate(lineno, col, m)
            return
        if _INCLUDE.fullmatch(text):
            return
        if text.startswith("qreg"):
            m = _QREG.match(text)
            if not m:
                raise QasmError("malformed qreg declaration", lineno, col)
            if self.n is not None:
                raise QasmError("only one quantum register is supported", lineno, col)
            if self.gates or self.state != "preamble":
                raise QasmError("qreg must precede all gates", lineno, col)
            self.n, self.reg = int(m["size"]), m["name"]
            if self.n < 1:
                raise QasmError("register size must be positive", lineno, col)
            return
        raise QasmError(f"syntax error in {text!r}", lineno, col)

    def gate(self, lineno: int, col: int, m: re.Match) -> None:
        kind = _KINDS.get(m["name"])
        if kind is None:
            raise QasmError(f"unknown gate {m['name']!r}", lineno, col)
        arity = _ARITY[kind]
        if self.n is None:
            raise QasmError("gate before qreg declaration", lineno, col)
        if self.state == "amplification":
            raise QasmError("gate inside amplification block but outside an iteration", lineno, col)
        if self.state == "done":
            raise QasmError("gate after amplification_end", lineno, col)
        angle = None
        if kind is GateKind.RZ:
            if m["arg"] is None:
                raise QasmError("rz needs an angle", lineno, col + m.start("operands"))
            try:
                angle = parse_angle(m["arg"])
            except ValueError as exc:
                raise QasmError(str(exc), lineno, col + m.start("arg")) from None
        elif m["arg"] is not None:
            raise QasmError(f"{kind.value} takes no parameter", lineno, col + m.start("arg"))
        operands = m["operands"].split(",")
        if len(operands) != arity:
            raise QasmError(f"{kind.value} expects {arity} operand(s)", lineno, col + m.start("operands"))
        qubits = []
        for op in operands:
            om = _OPERAND.match(op)
            if not om:
                raise QasmError(f"bad operand {op.strip()!r}", lineno, col + m.start("operands"))
            if om["reg"] != self.reg:
                raise QasmError(f"unknown register {om['reg']!r}", lineno, col + m.start("operands"))
            q = int(om["index"])
            if q >= self.n:
                raise QasmError(f"qubit index {q} out of range for qreg of size {self.n}", lineno,
                                col + m.start("operands"))
            qubits.append(q)
        if len(set(qubits)) != len(qubits):
            raise QasmError("duplicate qubit operand", lineno, col + m.start("operands"))
        self.gates.append(GateOp(kind, tuple(qubits), angle))

    def pragma(self, lineno: int, col: int, words: list[str]) -> None:
        if not words:
            raise QasmError("empty @ampopt pragma", lineno, col)
        name, args = words[0], words[1:]
        expected = {
            "amplification_begin": "preamble",
            "iteration_begin": "amplification",
            "iteration_end": "iteration",
            "amplification_end": "amplification",
        }.get(name)
        if expected is None:
            raise QasmError(f"unknown intrinsic {name!r}", lineno, col)
        if self.state != expected:
            raise QasmError(f"unbalanced intrinsic {name}", lineno, col)
        if self.n is None:
            raise QasmError("intrinsic before qreg declaration", lineno, col)
        if name != "amplification_begin" and args:
            raise QasmError(f"{name} takes no arguments", lineno, col)
        if name == "amplification_begin":
            self.meta = self._meta(lineno, col, args)
            self.state = "amplification"
        elif name == "iteration_begin":
            self.iteration_start = len(self.gates)
            self.state = "iteration"
        elif name == "iteration_end":
            self.segments.append((self.iteration_start, len(self.gates)))
            self.state = "amplification"
        else:
            self.state = "done"

    def _meta(self, lineno: int, col: int, args: list[str]) -> AmplificationMeta:
        fields: dict[str, str] = {}
        for arg in args:
            key, sep, value = arg.partition("=")
            if not sep or key not in ("theta", "m", "t_opt") or key in fields:
                raise QasmError(f"bad amplification_begin argument {arg!r}", lineno, col)
            fields[key] = value
        if "theta" not in fields:
            raise QasmError("amplification_begin needs theta=<angle>", lineno, col)
        try:
            theta = parse_angle(fields["theta"])
            m = int(fields["m"]) if "m" in fields else None
            t_opt = int(fields["t_opt"]) if "t_opt" in fields else None
        except ValueError as exc:
            raise QasmError(f"bad amplification_begin argument: {exc}", lineno, col) from None
        meta = AmplificationMeta(theta=theta, n=self.n, m=m, t_opt=t_opt)
        problems = meta.problems()
        if problems:
            raise QasmError("; ".join(problems), lineno, col)
        return meta

    def finish(self, lineno: int) -> Circuit:
        if not self.seen_header:
            raise QasmError("missing 'OPENQASM 2.0;' header", lineno)
        if self.n is None:
            raise QasmError("missing qreg declaration", lineno)
        if self.state in ("amplification", "iteration"):
            raise QasmError("unbalanced intrinsic: amplification block not closed", lineno)
        return Circuit(self.n, tuple(self.gates), self.meta, tuple(self.segments))


def _split_statements(code: str, lineno: int, col: int) -> list[str]:
    parts = [p.strip() for p in code.split(";")]
    if parts[-1]:
        raise QasmError(f"missing ';' after {parts[-1]!r}", lineno, col)
    return [p + ";" for p in parts[:-1] if p]


def parse(text: str) -> Circuit:
    """Read ``.aaq`` text into a Circuit; raises QasmError with 1-based positions."""
    parser = _Parser()
    lines = text.split("\n")
    for lineno, raw in enumerate(lines, start=1):
        parser.line(lineno, raw)
    return parser.finish(len(lines))
