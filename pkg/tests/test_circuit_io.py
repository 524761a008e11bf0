import numpy as np
import pytest

from qcostnas.circuit_io import dumps, format_angle, from_qasm, load, loads, parse_angle, save, to_qasm
from qcostnas.circuits import Angle, build_ansatz, hybrid_circuit, random_circuit
from qcostnas.errors import CircuitFormatError, UnsupportedGate


def test_text_round_trip(tmp_path):
    c = hybrid_circuit(3, 2, ["rx", "ry"], "cz", "circular")
    assert loads(dumps(c)) == c
    save(c, tmp_path / "c.txt")
    assert load(tmp_path / "c.txt") == c


def test_random_round_trip_is_exact():
    c = random_circuit(4, 12, np.random.default_rng(3), trainable=True)
    assert loads(dumps(c)) == c


def test_qasm_round_trip(tmp_path):
    c = build_ansatz(3, 2, ["rz"], "cnot", "full")
    text = to_qasm(c)
    assert from_qasm(text) == c
    (tmp_path / "c.qasm").write_text(text)
    assert load(tmp_path / "c.qasm") == c


def test_angle_grammar():
    assert parse_angle("p[3]") == Angle.param(3)
    assert parse_angle("in[1] - pi/2") == Angle.input(1, -np.pi / 2)
    assert parse_angle("2*pi/4").offset == pytest.approx(np.pi / 2)
    assert parse_angle(format_angle(Angle.param(2, -0.1))) == Angle.param(2, -0.1)
    with pytest.raises(CircuitFormatError):
        parse_angle("__import__('os')")


def test_format_errors():
    with pytest.raises(CircuitFormatError):
        loads("cnot 0 1\n")
    with pytest.raises(CircuitFormatError):
        loads("qubits 2\nfoo 0\n")
    with pytest.raises(CircuitFormatError):
        loads("qubits 2\ncnot 0 5\n")
    with pytest.raises(UnsupportedGate):
        from_qasm('OPENQASM 2.0;\nqreg q[2];\nh q[0];\n')
