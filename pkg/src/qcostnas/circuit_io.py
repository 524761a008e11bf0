"""Text serialization of circuits and import/export of a small QASM 2 subset.

Line format (``#`` starts a comment)::

    qubits 4
    params 8          # optional, inferred otherwise
    inputs 4          # optional, inferred otherwise
    ry 0 in[0]
    rz 1 p[3]+3.141592653589793
    cnot 0 1
    measure 0

Angles are ``p[i]`` (trainable), ``in[i]`` (data), either of those followed by
``+c`` / ``-c``, or a constant expression using numbers, ``pi`` and ``+-*/``.
See ``docs/formats.md`` for the full grammar.
"""

from __future__ import annotations

import ast
import operator
import re
from pathlib import Path

from .circuits import Angle, Circuit, Gate, GateKind
from .errors import CircuitFormatError, InvalidInput, UnsupportedGate

HEADER = "# qcostnas circuit v1"

_BOUND = re.compile(r"^(p|in)\[(\d+)\]\s*(?:([+-])\s*(.+))?$")
_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _const(expr: str) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return 3.141592653589793
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise CircuitFormatError(f"unsupported angle expression {expr!r}")

    try:
        return ev(ast.parse(expr.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise CircuitFormatError(f"bad angle expression {expr!r}: {exc}") from None


def parse_angle(text: str) -> Angle:
    text = text.strip()
    m = _BOUND.match(text)
    if m:
        source = "param" if m.group(1) == "p" else "input"
        offset = 0.0
        if m.group(3):
            offset = _const(m.group(4))
            offset = -offset if m.group(3) == "-" else offset
        return Angle(source, int(m.group(2)), offset)
    return Angle.const(_const(text))


def format_angle(angle: Angle) -> str:
    if angle.source == "const":
        return repr(float(angle.offset))
    head = f"{'p' if angle.source == 'param' else 'in'}[{angle.index}]"
    if angle.offset == 0.0:
        return head
    sign = "+" if angle.offset > 0 else "-"
    return f"{head}{sign}{abs(angle.offset)!r}"


def dumps(circuit: Circuit) -> str:
    lines = [HEADER, f"qubits {circuit.n_qubits}", f"params {circuit.n_params}", f"inputs {circuit.n_inputs}"]
    for g in circuit.gates:
        parts = [g.kind.value, *map(str, g.qubits)]
        if g.angle is not None:
            parts.append(format_angle(g.angle))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    n_qubits = n_params = n_inputs = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        key = head.lower()
        try:
            if key in ("qubits", "params", "inputs"):
                if len(rest) != 1:
                    raise CircuitFormatError(f"{key} takes one integer")
                value = int(rest[0])
                if key == "qubits":
                    n_qubits = value
                elif key == "params":
                    n_params = value
                else:
                    n_inputs = value
                continue
            kind = GateKind.parse(key)
            qubits = tuple(int(q) for q in rest[: kind.arity])
            tail = " ".join(rest[kind.arity:])
            angle = parse_angle(tail) if tail else None
            gates.append(Gate(kind, qubits, angle))
        except (InvalidInput, ValueError) as exc:
            raise CircuitFormatError(f"line {lineno}: {exc}") from None
    if n_qubits is None:
        raise CircuitFormatError("missing 'qubits' declaration")
    try:
        return Circuit(n_qubits, tuple(gates), n_params, n_inputs)
    except InvalidInput as exc:
        raise CircuitFormatError(str(exc)) from None


def save(circuit: Circuit, path: str | Path) -> None:
    Path(path).write_text(dumps(circuit))


def load(path: str | Path) -> Circuit:
    """Read a circuit file; ``.qasm`` files go through the QASM importer."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".qasm" or text.lstrip().upper().startswith("OPENQASM"):
        return from_qasm(text)
    return loads(text)


_QASM_GATES = {
    "rx": GateKind.RX, "ry": GateKind.RY, "rz": GateKind.RZ, "sx": GateKind.SX, "x": GateKind.X,
    "cx": GateKind.CNOT, "cnot": GateKind.CNOT, "cz": GateKind.CZ, "ecr": GateKind.ECR, "swap": GateKind.SWAP,
}
_QASM_STMT = re.compile(r"^([a-z_]+)\s*(?:\((.*)\))?\s+(.+)$", re.IGNORECASE)
_QASM_QUBIT = re.compile(r"^\s*(\w+)\[(\d+)\]\s*$")


def from_qasm(text: str) -> Circuit:
    """Import the OPENQASM 2 subset covering the IR gate set.

    One quantum register; ``barrier`` is ignored.  Angles may use ``p[i]`` and
    ``in[i]`` bindings in addition to constant expressions.
    """
    text = re.sub(r"//[^\n]*", "", text)
    n_qubits = None
    qreg = None
    gates: list[Gate] = []
    for stmt in (s.strip() for s in text.split(";")):
        if not stmt:
            continue
        low = stmt.lower()
        if low.startswith("openqasm") or low.startswith("include") or low.startswith("creg") or low.startswith("barrier"):
            continue
        if low.startswith("qreg"):
            if qreg is not None:
                raise CircuitFormatError("only one quantum register is supported")
            m = _QASM_QUBIT.match(stmt[4:])
            if not m:
                raise CircuitFormatError(f"bad register declaration {stmt!r}")
            qreg, n_qubits = m.group(1), int(m.group(2))
            continue
        if low.startswith("measure"):
            target = stmt[len("measure"):].split("->")[0]
            gates.append(Gate(GateKind.MEASURE, (_qasm_qubit(target, qreg),)))
            continue
        m = _QASM_STMT.match(stmt)
        if not m:
            raise CircuitFormatError(f"cannot parse statement {stmt!r}")
        name, args, operands = m.group(1).lower(), m.group(2), m.group(3)
        if name not in _QASM_GATES:
            raise UnsupportedGate(f"gate {name!r} is outside the supported subset")
        kind = _QASM_GATES[name]
        qubits = tuple(_qasm_qubit(o, qreg) for o in operands.split(","))
        angle = parse_angle(args) if args else None
        try:
            gates.append(Gate(kind, qubits, angle))
        except InvalidInput as exc:
            raise CircuitFormatError(str(exc)) from None
    if n_qubits is None:
        raise CircuitFormatError("no qreg declared")
    try:
        return Circuit(n_qubits, tuple(gates))
    except InvalidInput as exc:
        raise CircuitFormatError(str(exc)) from None


def _qasm_qubit(text: str, qreg: str | None) -> int:
    m = _QASM_QUBIT.match(text)
    if not m or qreg is None or m.group(1) != qreg:
        raise CircuitFormatError(f"bad qubit operand {text!r}")
    return int(m.group(2))


def to_qasm(circuit: Circuit) -> str:
    names = {GateKind.CNOT: "cx"}
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n_qubits}];", f"creg c[{circuit.n_qubits}];"]
    for g in circuit.gates:
        if g.kind is GateKind.MEASURE:
            lines.append(f"measure q[{g.qubits[0]}] -> c[{g.qubits[0]}];")
            continue
        name = names.get(g.kind, g.kind.value)
        arg = f"({format_angle(g.angle)})" if g.angle is not None else ""
        lines.append(f"{name}{arg} " + ",".join(f"q[{q}]" for q in g.qubits) + ";")
    return "\n".join(lines) + "\n"
