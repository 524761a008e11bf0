"""Logical-to-physical compilation: basis decomposition, SWAP routing, ASAP scheduling.

Decomposition uses a fixed rule table (all identities hold up to global phase;
``H`` abbreviates ``rz(pi/2) sx rz(pi/2)``):

============  ==========  ====================================================
gate          basis       native sequence (time order)
============  ==========  ====================================================
rz(a)         any         rz(a)
ry(a)         any         sx, rz(a+pi), sx, rz(pi)
rx(a)         any         rz(pi/2), sx, rz(a+pi), sx, rz(pi/2)
sx, x         any         unchanged
cnot(c,t)     cnot        cnot(c,t)
cnot(c,t)     cz          H(t), cz(c,t), H(t)
cnot(c,t)     ecr         x(c), ecr(c,t), sx(t), rz(pi/2)(c)
cz(a,b)       cz          cz(a,b)
cz(a,b)       cnot, ecr   H(b), cnot(a,b) rule, H(b)
swap(a,b)     any         cnot(a,b), cnot(b,a), cnot(a,b), each by its rule
ecr(a,b)      ecr         ecr(a,b); other bases have no rule
============  ==========  ====================================================

A SWAP therefore always costs exactly three native two-qubit gates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backend import BackendModel, Calibration, CouplingMap
from .circuits import Angle, Circuit, Gate, GateCounts, GateKind, gate_counts
from .errors import InvalidInput, UnsupportedGate

_PI = np.pi
_HALF_PI = np.pi / 2


def _rz(q: int, value: float) -> Gate:
    return Gate(GateKind.RZ, (q,), Angle.const(value))


def _h(q: int) -> list[Gate]:
    return [_rz(q, _HALF_PI), Gate(GateKind.SX, (q,)), _rz(q, _HALF_PI)]


def _cnot(c: int, t: int, two_qubit: str) -> list[Gate]:
    if two_qubit == "cnot":
        return [Gate(GateKind.CNOT, (c, t))]
    if two_qubit == "cz":
        return [*_h(t), Gate(GateKind.CZ, (c, t)), *_h(t)]
    return [Gate(GateKind.X, (c,)), Gate(GateKind.ECR, (c, t)), Gate(GateKind.SX, (t,)), _rz(c, _HALF_PI)]


def decompose_gate(gate: Gate, two_qubit: str) -> list[Gate]:
    """Rewrite one gate into the native basis ``{rz, sx, x, <two_qubit>}``."""
    k, qs = gate.kind, gate.qubits
    if k in (GateKind.RZ, GateKind.SX, GateKind.X, GateKind.MEASURE):
        return [gate]
    if k is GateKind.RY:
        q = qs[0]
        return [Gate(GateKind.SX, (q,)), Gate(GateKind.RZ, (q,), gate.angle.shifted(_PI)), Gate(GateKind.SX, (q,)), _rz(q, _PI)]
    if k is GateKind.RX:
        q = qs[0]
        return [
            _rz(q, _HALF_PI), Gate(GateKind.SX, (q,)), Gate(GateKind.RZ, (q,), gate.angle.shifted(_PI)),
            Gate(GateKind.SX, (q,)), _rz(q, _HALF_PI),
        ]
    if k is GateKind.CNOT:
        return _cnot(qs[0], qs[1], two_qubit)
    if k is GateKind.CZ:
        if two_qubit == "cz":
            return [gate]
        a, b = qs
        return [*_h(b), *_cnot(a, b, two_qubit), *_h(b)]
    if k is GateKind.SWAP:
        a, b = qs
        return _cnot(a, b, two_qubit) + _cnot(b, a, two_qubit) + _cnot(a, b, two_qubit)
    if k is GateKind.ECR and two_qubit == "ecr":
        return [gate]
    raise UnsupportedGate(f"no rewrite rule for {k.value} on a {two_qubit}-basis backend")


def decompose_to_basis(circuit: Circuit, backend: BackendModel | str) -> Circuit:
    """Rewrite every gate into the backend's native basis; bindings are preserved."""
    two_qubit = backend if isinstance(backend, str) else backend.basis.two_qubit
    out: list[Gate] = []
    for g in circuit.gates:
        out.extend(decompose_gate(g, two_qubit))
    return circuit.with_gates(out)


@dataclass(frozen=True)
class RoutedCircuit:
    circuit: Circuit
    initial_layout: tuple[int, ...]
    final_layout: tuple[int, ...]
    n_swaps: int


def route(circuit: Circuit, coupling_map: CouplingMap, layout: Sequence[int] | None = None) -> RoutedCircuit:
    """Greedy SWAP insertion on shortest paths.

    ``layout[i]`` is the physical qubit holding logical qubit ``i`` (identity
    by default).  When a two-qubit gate's operands are not adjacent, the first
    operand is swapped along the shortest path until it neighbours the
    second.  The output acts on ``coupling_map.n_physical`` qubits;
    ``final_layout`` gives where each logical qubit ended up.
    """
    n_phys = coupling_map.n_physical
    if circuit.n_qubits > n_phys:
        raise InvalidInput(f"{circuit.n_qubits}-qubit circuit does not fit a {n_phys}-qubit device")
    l2p = list(range(circuit.n_qubits)) if layout is None else [int(p) for p in layout]
    if len(l2p) != circuit.n_qubits or len(set(l2p)) != len(l2p) or any(not 0 <= p < n_phys for p in l2p):
        raise InvalidInput(f"invalid layout {layout!r}")
    initial = tuple(l2p)
    p2l = [-1] * n_phys
    for lq, pq in enumerate(l2p):
        p2l[pq] = lq
    out: list[Gate] = []
    n_swaps = 0
    for g in circuit.gates:
        if not g.kind.is_two_qubit:
            out.append(Gate(g.kind, (l2p[g.qubits[0]],), g.angle))
            continue
        a, b = g.qubits
        pa, pb = l2p[a], l2p[b]
        if not coupling_map.adjacent(pa, pb):
            path = coupling_map.shortest_path(pa, pb)
            for u, v in zip(path[:-2], path[1:-1]):
                out.append(Gate(GateKind.SWAP, (u, v)))
                n_swaps += 1
                lu, lv = p2l[u], p2l[v]
                p2l[u], p2l[v] = lv, lu
                if lu >= 0:
                    l2p[lu] = v
                if lv >= 0:
                    l2p[lv] = u
        out.append(Gate(g.kind, (l2p[a], l2p[b]), g.angle))
    routed = Circuit(n_phys, tuple(out), circuit.n_params, circuit.n_inputs)
    return RoutedCircuit(routed, initial, tuple(l2p), n_swaps)


@dataclass(frozen=True)
class TranspiledCircuit:
    physical: Circuit
    logical_counts: GateCounts
    physical_counts: GateCounts
    initial_layout: tuple[int, ...]
    final_layout: tuple[int, ...]
    n_swaps: int
    backend: str = ""

    def delta_2q(self) -> dict[str, int]:
        """Excess native two-qubit gates per type, clamped at zero."""
        names = set(self.logical_counts.by_gate) | set(self.physical_counts.by_gate)
        return {
            g: max(0, self.physical_counts.by_gate.get(g, 0) - self.logical_counts.by_gate.get(g, 0))
            for g in sorted(names)
        }

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "logical_counts": self.logical_counts.to_dict(),
            "physical_counts": self.physical_counts.to_dict(),
            "n_swaps": self.n_swaps,
            "initial_layout": list(self.initial_layout),
            "final_layout": list(self.final_layout),
        }


def transpile(circuit: Circuit, backend: BackendModel, layout: Sequence[int] | None = None) -> TranspiledCircuit:
    """Route then decompose.

    Logical counts come from decomposing the unrouted circuit (all-to-all
    connectivity), so the two-qubit difference isolates routing overhead.
    The pipeline has no randomness: equal inputs give equal outputs.
    """
    logical = decompose_to_basis(circuit, backend)
    routed = route(circuit, backend.coupling, layout)
    physical = decompose_to_basis(routed.circuit, backend)
    return TranspiledCircuit(
        physical=physical,
        logical_counts=gate_counts(logical),
        physical_counts=gate_counts(physical),
        initial_layout=routed.initial_layout,
        final_layout=routed.final_layout,
        n_swaps=routed.n_swaps,
        backend=backend.name,
    )


def gate_duration(gate: Gate, calibration: Calibration, zero_rz: bool = False) -> float:
    if gate.kind.is_measurement:
        return calibration.t_meas
    if gate.kind.is_two_qubit:
        return calibration.two_qubit_time(gate.kind.value)
    if zero_rz and gate.kind is GateKind.RZ:
        return 0.0
    return calibration.t_1q


def asap_schedule(circuit: Circuit, calibration: Calibration, zero_rz: bool = False) -> float:
    """Makespan of the as-soon-as-possible list schedule, in seconds.

    Each gate starts once all of its qubits are free.  ``zero_rz`` treats
    ``rz`` as a zero-duration frame change, as pulse-level schedulers do.
    """
    free = [0.0] * circuit.n_qubits
    makespan = 0.0
    for g in circuit.gates:
        start = max(free[q] for q in g.qubits)
        end = start + gate_duration(g, calibration, zero_rz)
        for q in g.qubits:
            free[q] = end
        makespan = max(makespan, end)
    return makespan
