"""Dense statevector simulation with exact expectations and two gradient methods.

States are arrays of ``2**n`` complex amplitudes in little-endian order
(qubit ``q`` is bit ``q`` of the index).  Internally every routine works on a
batch of states shaped ``(B, 2**n)``; the public functions accept a 1-D
``inputs`` vector for a single evaluation or a 2-D ``(B, n_inputs)`` array for
a batch.

Gates are applied as amplitude-pair updates; consecutive non-parametric
permutation gates (CNOT, CZ, SWAP, X) are fused into a single gather with a
phase vector.  Dense matrices are never formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import Angle, Circuit, GateKind, MAX_QUBITS
from .errors import CapacityError, DimensionMismatch, UnsupportedGradient

_SQ2 = 1.0 / np.sqrt(2.0)
SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
# local two-qubit ordering: index 2*a + b for qubits (a, b); a is the control
ECR = _SQ2 * (np.kron([[0, 1], [1, 0]], np.eye(2)) - np.kron([[0, -1j], [1j, 0]], [[0, 1], [1, 0]]))
_AXIS = {GateKind.RX: "X", GateKind.RY: "Y", GateKind.RZ: "Z"}
_PERMUTATION_GATES = frozenset({GateKind.CNOT, GateKind.CZ, GateKind.SWAP, GateKind.X})


@dataclass
class GradientResult:
    """Jacobian of the per-qubit ``<Z>`` readout w.r.t. the trainable parameters.

    ``n_executions`` counts circuit evaluations spent on the gradient itself:
    two per parameter for the shift rule, one forward sweep for adjoint.
    """

    jacobian: np.ndarray
    n_executions: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.jacobian.shape


@dataclass(frozen=True)
class _Rot:
    qubit: int
    axis: str
    angle: Angle


@dataclass(frozen=True)
class _Mat1:
    qubit: int
    matrix: np.ndarray


@dataclass(frozen=True)
class _Mat2:
    a: int
    b: int
    matrix: np.ndarray


@dataclass(frozen=True)
class _Perm:
    src: np.ndarray
    inv: np.ndarray
    phase: np.ndarray | None


class _Program:
    def __init__(self, circuit: Circuit):
        n = circuit.n_qubits
        if n > MAX_QUBITS:
            raise CapacityError(f"{n} qubits exceeds the simulator limit of {MAX_QUBITS}")
        self.n_qubits = n
        self.dim = 1 << n
        self.n_params = circuit.n_params
        self.n_inputs = circuit.n_inputs
        self.ops: list = []
        self.param_op: dict[int, int] = {}
        idx = np.arange(self.dim)
        src, phase = None, None

        def flush():
            nonlocal src, phase
            if src is not None:
                inv = np.empty_like(src)
                inv[src] = idx
                self.ops.append(_Perm(src, inv, phase))
            src, phase = None, None

        for g in circuit.gates:
            k = g.kind
            if k is GateKind.MEASURE:
                continue
            if k in _PERMUTATION_GATES:
                s, ph = _monomial(k, g.qubits, idx)
                # compose: new[i] = ph[i] * old[s[i]] after the running (src, phase)
                if src is None:
                    src, phase = s, ph
                else:
                    new_phase = None
                    if phase is not None:
                        new_phase = phase[s]
                    if ph is not None:
                        new_phase = ph if new_phase is None else ph * new_phase
                    src, phase = src[s], new_phase
                continue
            flush()
            if k.is_rotation:
                if g.angle.is_trainable:
                    self.param_op[g.angle.index] = len(self.ops)
                self.ops.append(_Rot(g.qubits[0], _AXIS[k], g.angle))
            elif k is GateKind.SX:
                self.ops.append(_Mat1(g.qubits[0], SX))
            elif k is GateKind.ECR:
                self.ops.append(_Mat2(g.qubits[0], g.qubits[1], ECR))
            else:  # pragma: no cover - every GateKind is handled above
                raise UnsupportedGradient(f"cannot simulate {k.value}")
        flush()
        self.signs = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)


def _monomial(kind: GateKind, qubits: tuple[int, ...], idx: np.ndarray):
    if kind is GateKind.X:
        return idx ^ (1 << qubits[0]), None
    a, b = qubits
    bit_a, bit_b = (idx >> a) & 1, (idx >> b) & 1
    if kind is GateKind.CNOT:
        return idx ^ (bit_a << b), None
    if kind is GateKind.CZ:
        return idx, np.where(bit_a & bit_b, -1.0, 1.0).astype(complex)
    # SWAP
    differ = bit_a ^ bit_b
    return idx ^ ((differ << a) | (differ << b)), None


@lru_cache(maxsize=128)
def _compile(circuit: Circuit) -> _Program:
    return _Program(circuit)


def _angle_array(angle: Angle, params, inputs, shift: float = 0.0):
    value = angle.value(params, inputs) + shift
    if np.ndim(value):
        return np.asarray(value, dtype=float)[:, None, None]
    return float(value)


def _apply_rot(psi: np.ndarray, q: int, axis: str, theta, sign: float = 1.0) -> np.ndarray:
    lead = psi.shape[0]
    v = psi.reshape(lead, -1, 2, 1 << q)
    a0, a1 = v[:, :, 0, :], v[:, :, 1, :]
    half = np.multiply(theta, 0.5 * sign)
    out = np.empty_like(v)
    if axis == "Z":
        ph = np.exp(-1j * half)
        out[:, :, 0, :] = ph * a0
        out[:, :, 1, :] = np.conj(ph) * a1
    else:
        c, s = np.cos(half), np.sin(half)
        if axis == "X":
            out[:, :, 0, :] = c * a0 - 1j * s * a1
            out[:, :, 1, :] = -1j * s * a0 + c * a1
        else:
            out[:, :, 0, :] = c * a0 - s * a1
            out[:, :, 1, :] = s * a0 + c * a1
    return out.reshape(psi.shape)


def _apply_pauli(psi: np.ndarray, q: int, axis: str) -> np.ndarray:
    lead = psi.shape[0]
    v = psi.reshape(lead, -1, 2, 1 << q)
    out = np.empty_like(v)
    if axis == "X":
        out[:, :, 0, :] = v[:, :, 1, :]
        out[:, :, 1, :] = v[:, :, 0, :]
    elif axis == "Y":
        out[:, :, 0, :] = -1j * v[:, :, 1, :]
        out[:, :, 1, :] = 1j * v[:, :, 0, :]
    else:
        out[:, :, 0, :] = v[:, :, 0, :]
        out[:, :, 1, :] = -v[:, :, 1, :]
    return out.reshape(psi.shape)


def _apply_mat1(psi: np.ndarray, q: int, m: np.ndarray) -> np.ndarray:
    lead = psi.shape[0]
    v = psi.reshape(lead, -1, 2, 1 << q)
    a0, a1 = v[:, :, 0, :], v[:, :, 1, :]
    out = np.empty_like(v)
    out[:, :, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    out[:, :, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return out.reshape(psi.shape)


def _apply_mat2(psi: np.ndarray, n: int, a: int, b: int, m: np.ndarray) -> np.ndarray:
    lead = psi.shape[0]
    t = psi.reshape((lead,) + (2,) * n)
    ax_a, ax_b = n - a, n - b
    res = np.tensordot(t, m.reshape(2, 2, 2, 2), axes=([ax_a, ax_b], [2, 3]))
    res = np.moveaxis(res, [-2, -1], [ax_a, ax_b])
    return np.ascontiguousarray(res).reshape(psi.shape)


def _apply(prog: _Program, op, psi, params, inputs, shift: float = 0.0, inverse: bool = False):
    if isinstance(op, _Rot):
        theta = _angle_array(op.angle, params, inputs, shift)
        return _apply_rot(psi, op.qubit, op.axis, theta, -1.0 if inverse else 1.0)
    if isinstance(op, _Perm):
        if inverse:
            x = psi if op.phase is None else psi * np.conj(op.phase)
            return x[:, op.inv]
        x = psi[:, op.src]
        return x if op.phase is None else x * op.phase
    if isinstance(op, _Mat1):
        return _apply_mat1(psi, op.qubit, op.matrix.conj().T if inverse else op.matrix)
    return _apply_mat2(psi, prog.n_qubits, op.a, op.b, op.matrix.conj().T if inverse else op.matrix)


def _prepare(circuit: Circuit, params, inputs):
    prog = _compile(circuit)
    params = np.zeros(0) if params is None else np.asarray(params, dtype=float)
    if params.shape != (circuit.n_params,):
        raise DimensionMismatch(f"expected {circuit.n_params} parameters, got shape {params.shape}")
    if inputs is None:
        inputs = np.zeros((1, circuit.n_inputs))
        single = True
    else:
        inputs = np.asarray(inputs, dtype=float)
        single = inputs.ndim == 1
        inputs = np.atleast_2d(inputs)
    if inputs.shape[1] != circuit.n_inputs:
        raise DimensionMismatch(f"expected {circuit.n_inputs} inputs, got shape {inputs.shape}")
    return prog, params, inputs, single


def _forward(prog: _Program, params, inputs, shift_op: int = -1, shift: float = 0.0) -> np.ndarray:
    psi = np.zeros((inputs.shape[0], prog.dim), dtype=complex)
    psi[:, 0] = 1.0
    for i, op in enumerate(prog.ops):
        psi = _apply(prog, op, psi, params, inputs, shift if i == shift_op else 0.0)
    return psi


def run(circuit: Circuit, params=None, inputs=None) -> np.ndarray:
    """Evolve ``|0...0>`` through ``circuit``; measurements are ignored."""
    prog, params, inputs, single = _prepare(circuit, params, inputs)
    psi = _forward(prog, params, inputs)
    return psi[0] if single else psi


def expect_z(state: np.ndarray) -> np.ndarray:
    """Per-qubit ``<Z>`` of a state (or a batch of states along axis 0)."""
    state = np.asarray(state)
    n = int(state.shape[-1]).bit_length() - 1
    if 1 << n != state.shape[-1]:
        raise DimensionMismatch(f"state length {state.shape[-1]} is not a power of two")
    idx = np.arange(1 << n)
    signs = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)
    return (np.abs(state) ** 2) @ signs


def expectation(circuit: Circuit, params=None, inputs=None) -> np.ndarray:
    prog, params, inputs, single = _prepare(circuit, params, inputs)
    ev = (np.abs(_forward(prog, params, inputs)) ** 2) @ prog.signs
    return ev[0] if single else ev


def _check_trainable(circuit: Circuit) -> None:
    for i in circuit.trainable_gates:
        if not circuit.gates[i].kind.is_rotation:  # pragma: no cover - Circuit forbids it
            raise UnsupportedGradient(f"trainable gate {circuit.gates[i].kind.value} is not a rotation")


def grad_parameter_shift(circuit: Circuit, params=None, inputs=None) -> GradientResult:
    """Two shifted evaluations per parameter, ``(f(t + pi/2) - f(t - pi/2)) / 2``."""
    _check_trainable(circuit)
    prog, params, inputs, single = _prepare(circuit, params, inputs)
    if not single:
        raise DimensionMismatch("gradients are computed for one input vector at a time")
    jac = np.zeros((circuit.n_qubits, circuit.n_params))
    runs = 0
    for p in range(circuit.n_params):
        op = prog.param_op[p]
        plus = (np.abs(_forward(prog, params, inputs, op, np.pi / 2)) ** 2) @ prog.signs
        minus = (np.abs(_forward(prog, params, inputs, op, -np.pi / 2)) ** 2) @ prog.signs
        jac[:, p] = (plus[0] - minus[0]) / 2
        runs += 2
    return GradientResult(jac, runs)


def _adjoint_sweep(prog: _Program, params, inputs, psi: np.ndarray, lam: np.ndarray):
    """Walk the ops backwards, un-applying each one to ``psi`` and ``lam``.

    Returns the per-op overlaps ``Im <lam|P psi>`` for rotation ops, which are
    the derivatives of ``<psi|O|psi>`` w.r.t. each rotation angle when
    ``lam = O psi`` at the start.
    """
    grads: dict[int, np.ndarray] = {}
    for i in range(len(prog.ops) - 1, -1, -1):
        op = prog.ops[i]
        if isinstance(op, _Rot) and op.angle.source != "const":
            mu = _apply_pauli(psi, op.qubit, op.axis)
            grads[i] = np.imag(np.sum(np.conj(lam) * mu, axis=1))
        psi = _apply(prog, op, psi, params, inputs, inverse=True)
        lam = _apply(prog, op, lam, params, inputs, inverse=True)
    return grads


def grad_adjoint(circuit: Circuit, params=None, inputs=None) -> GradientResult:
    """Adjoint-method Jacobian: one forward pass, one backward sweep carrying all outputs."""
    _check_trainable(circuit)
    prog, params, inputs, single = _prepare(circuit, params, inputs)
    if not single:
        raise DimensionMismatch("gradients are computed for one input vector at a time")
    psi = _forward(prog, params, inputs)
    lam = prog.signs.T * psi  # row q is Z_q |psi>
    grads = _adjoint_sweep(prog, params, inputs, psi, lam)
    jac = np.zeros((circuit.n_qubits, circuit.n_params))
    for p, op in prog.param_op.items():
        jac[:, p] = grads[op]
    return GradientResult(jac, 1)


def adjoint_vjp(circuit: Circuit, params, inputs, cotangent, state: np.ndarray | None = None):
    """Vector-Jacobian product of the batched ``<Z>`` readout.

    ``cotangent`` has shape ``(B, n_qubits)``.  Returns ``(d_params, d_inputs)``
    where ``d_params`` is summed over the batch and ``d_inputs`` has shape
    ``(B, n_inputs)``.  Pass the final ``state`` from a previous :func:`run`
    to skip the forward pass.
    """
    prog, params, inputs, _ = _prepare(circuit, params, inputs)
    psi = _forward(prog, params, inputs) if state is None else np.atleast_2d(state)
    cot = np.atleast_2d(np.asarray(cotangent, dtype=float))
    lam = psi * (cot @ prog.signs.T)
    grads = _adjoint_sweep(prog, params, inputs, psi, lam)
    d_params = np.zeros(circuit.n_params)
    d_inputs = np.zeros((psi.shape[0], circuit.n_inputs))
    for i, g in grads.items():
        angle = prog.ops[i].angle
        if angle.source == "param":
            d_params[angle.index] += g.sum()
        else:
            d_inputs[:, angle.index] += g
    return d_params, d_inputs
