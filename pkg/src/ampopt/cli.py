"""Command-line entry point: ``ampopt {synth,predict,optimize,simulate}``."""

from __future__ import annotations

import argparse
import io
import sys
from collections import Counter
from pathlib import Path

from . import qasm
from .ir import AmplificationMeta, Circuit, CircuitError, MarkedSet, instrumented, validate
from .noise import NoiseProfile, ProfileError, load_profile, synthetic_segment
from .predict import CRITERIA, LITERAL, PEAK, PredictionCurve, find_inflection, optimize_circuit, predict_curve
from .sim import success_probability, sweep, trajectory_sample
from .synth import GroverSpec, build_amplification_circuit, grover_params

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4

HEADER = ["t", "amplification", "cumulative_noise", "estimated_success"]


class InputError(Exception):
    pass


class InvariantError(Exception):
    pass


def _num(value: float) -> str:
    return f"{value:.12g}"


def parse_marked(text: str, n: int) -> MarkedSet:
    """Comma-separated states, each an n-bit binary string or a 0x-prefixed hex value."""
    states = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        if item.lower().startswith("0x"):
            try:
                value = int(item, 16)
            except ValueError:
                raise InputError(f"bad hex marked state {item!r}") from None
            if value >= 2**n:
                raise InputError(f"marked state {item} does not fit in {n} qubits")
            item = format(value, f"0{n}b")
        elif len(item) != n or set(item) - {"0", "1"}:
            raise InputError(f"marked state {item!r} is not a {n}-bit binary string")
        states.append(item)
    if len(set(states)) != len(states):
        raise InputError("duplicate marked states")
    try:
        return MarkedSet(n, frozenset(states))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _read_circuit(path: str) -> Circuit:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    c = qasm.parse(text)
    problems = validate(c)
    if problems:
        raise InputError(f"{path}: " + "; ".join(problems))
    return c


def _profile(args) -> NoiseProfile:
    if args.uniform is not None:
        values = _floats(args.uniform, "--uniform")
        if len(values) not in (2, 3):
            raise InputError("--uniform takes sx,cx or sx,cx,rz")
        return NoiseProfile.uniform(*values)
    try:
        return load_profile(Path(args.profile).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {args.profile}: {exc}") from None


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"{flag} expects comma-separated numbers") from None


def _table_circuit(args) -> Circuit:
    # Synthetic circuit whose iterations carry exactly the given per-iteration
    # counts; gate identities are irrelevant to the noise model.
    try:
        rz_count, sx_count, cx_count = (int(v) for v in args.counts_from_table.split(","))
    except ValueError:
        raise InputError("--counts-from-table expects rz,sx,cx integer counts") from None
    if args.n is None:
        raise InputError("--counts-from-table needs --n")
    theta, t_opt = grover_params(args.m, args.n)
    body = synthetic_segment({"rz": rz_count, "sx": sx_count, "cx": cx_count}, n=args.n).gates
    meta = AmplificationMeta(theta=theta, n=args.n, m=args.m, t_opt=t_opt)
    return instrumented(args.n, [], [body] * (args.iterations or t_opt), meta)


def curve_rows(curve: PredictionCurve, observed: list[float] | None = None) -> str:
    buf = io.StringIO()
    header = HEADER + (["observed_success"] if observed is not None else [])
    buf.write(",".join(header) + "\n")
    for t in range(len(curve.points) + 1):
        p = curve.at(t)
        row = [str(t), _num(p.amplification), _num(p.cumulative_noise), _num(p.estimated_success)]
        if observed is not None:
            row.append(_num(observed[t]))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None


def _literal_note(curve: PredictionCurve) -> None:
    if curve.criterion == LITERAL:
        peak = find_inflection(curve, PEAK)
        if peak != curve.inflection:
            print(f"warning: literal halting rule stops at t={curve.inflection}; estimated peak is t={peak}",
                  file=sys.stderr)


def cmd_synth(args) -> int:
    marked = parse_marked(args.marked, args.n)
    circuit = build_amplification_circuit(GroverSpec(args.n, marked, args.iterations))
    _write(args.out, qasm.emit(circuit))
    meta = circuit.meta
    report = sys.stdout if args.out not in (None, "-") else sys.stderr
    print(f"theta={meta.theta:.17g}", file=report)
    print(f"t_opt={meta.t_opt}", file=report)
    print(f"iterations={circuit.iterations}", file=report)
    pre = Counter(g.kind.value for g in circuit.preamble_gates())
    print("preamble " + " ".join(f"{k}={pre.get(k, 0)}" for k in ("rz", "sx", "cx")), file=report)
    if circuit.segments:
        start, end = circuit.segments[0]
        per = Counter(g.kind.value for g in circuit.gates[start:end])
        print("per_iteration " + " ".join(f"{k}={per.get(k, 0)}" for k in ("rz", "sx", "cx")), file=report)
    return EXIT_OK


def _load_for_prediction(args) -> Circuit:
    if args.counts_from_table:
        if args.circuit:
            raise InputError("give either a circuit file or --counts-from-table, not both")
        return _table_circuit(args)
    if not args.circuit:
        raise InputError("a circuit file is required unless --counts-from-table is given")
    return _instrumented(_read_circuit(args.circuit))


def _instrumented(c: Circuit) -> Circuit:
    if c.meta is None or not c.segments:
        raise InputError("circuit has no amplification iterations to analyse")
    return c


def cmd_predict(args) -> int:
    circuit = _load_for_prediction(args)
    curve = predict_curve(circuit, _profile(args), include_preamble=args.include_preamble_noise,
                          criterion=args.criterion)
    _write(args.out, curve_rows(curve))
    report = sys.stdout if args.out not in (None, "-") else sys.stderr
    print(f"inflection={curve.inflection}", file=report)
    _literal_note(curve)
    return EXIT_OK


def cmd_optimize(args) -> int:
    circuit = _instrumented(_read_circuit(args.circuit))
    optimized, curve = optimize_circuit(circuit, _profile(args), include_preamble=args.include_preamble_noise,
                                        criterion=args.criterion)
    if validate(optimized):
        raise InvariantError("truncated circuit failed validation")
    _write(args.out, qasm.emit(optimized))
    sidecar = args.curve or str(Path(args.out).with_suffix(".csv"))
    _write(sidecar, curve_rows(curve))
    print(f"inflection={curve.inflection}")
    _literal_note(curve)
    return EXIT_OK


def cmd_simulate(args) -> int:
    circuit = _read_circuit(args.circuit)
    if circuit.meta is None:
        raise InputError("simulation needs an instrumented circuit")
    marked = parse_marked(args.marked, circuit.n)
    if circuit.meta.m is not None and circuit.meta.m != marked.m:
        raise InputError(f"circuit was built for {circuit.meta.m} marked state(s), got {marked.m}")
    profile = _profile(args)
    if args.shots is None:
        observed = [p for _, p in sweep(circuit, profile, marked)]
    else:
        observed = [
            success_probability(trajectory_sample(circuit, profile, args.shots, args.seed, upto=t), marked)
            for t in range(circuit.iterations + 1)
        ]
    if circuit.segments:
        curve = predict_curve(circuit, profile, include_preamble=args.include_preamble_noise)
        _write(args.out, curve_rows(curve, observed))
    else:
        _write(args.out, ",".join(["t", "observed_success"]) + f"\n0,{_num(observed[0])}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ampopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_profile(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--profile", help="noise profile JSON")
        group.add_argument("--uniform", metavar="SX,CX[,RZ]", help="uniform depolarizing parameters")

    def add_prediction_flags(p):
        p.add_argument("--criterion", choices=CRITERIA, default=PEAK)
        p.add_argument("--include-preamble-noise", action="store_true")

    p = sub.add_parser("synth", help="build an instrumented Grover circuit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--marked", required=True, help="comma-separated binary or 0x-hex states")
    p.add_argument("--iterations", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("predict", help="predict per-iteration accuracy and the inflection point")
    p.add_argument("circuit", nargs="?")
    add_profile(p)
    add_prediction_flags(p)
    p.add_argument("--counts-from-table", metavar="RZ,SX,CX",
                   help="synthetic iterations with these per-iteration gate counts")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--iterations", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("optimize", help="truncate a circuit at its predicted inflection point")
    p.add_argument("circuit")
    add_profile(p)
    add_prediction_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--curve", help="sidecar CSV path (default: OUT with .csv suffix)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="observed success per iteration under noise")
    p.add_argument("circuit")
    add_profile(p)
    p.add_argument("--marked", required=True)
    p.add_argument("--shots", type=int, help="use Pauli trajectories instead of exact evolution")
    p.add_argument("--seed", type=int)
    p.add_argument("--include-preamble-noise", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate":
        if args.seed is not None and args.shots is None:
            parser.error("--seed only applies with --shots")
        if args.shots is not None:
            if args.shots < 1:
                parser.error("--shots must be positive")
            if args.seed is None:
                args.seed = 0
    if getattr(args, "iterations", None) is not None and args.iterations < 1:
        parser.error("--iterations must be positive")
    try:
        return args.func(args)
    except (InputError, qasm.QasmError, ProfileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantError, CircuitError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
