"""Gate-level IR for parameterized circuits and the ansatz family used by the search.

Qubit ordering is little-endian everywhere: qubit ``q`` is bit ``q`` of a
basis-state index.  Two-qubit gates list their qubits as ``(control, target)``
where the distinction matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidInput, InvalidQubitCount, InvalidSearchPoint

MAX_QUBITS = 12
MAX_DEPTH = 15


class GateKind(Enum):
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    SX = "sx"
    X = "x"
    CNOT = "cnot"
    CZ = "cz"
    ECR = "ecr"
    SWAP = "swap"
    MEASURE = "measure"

    @property
    def arity(self) -> int:
        if self in _TWO_QUBIT:
            return 2
        return 1

    @property
    def is_rotation(self) -> bool:
        return self in ROTATIONS

    @property
    def is_two_qubit(self) -> bool:
        return self in _TWO_QUBIT

    @property
    def is_measurement(self) -> bool:
        return self is GateKind.MEASURE

    @property
    def is_one_qubit(self) -> bool:
        return not (self.is_two_qubit or self.is_measurement)

    @classmethod
    def parse(cls, name: str) -> "GateKind":
        key = name.strip().lower()
        key = _ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidInput(f"unknown gate kind {name!r}") from None


ROTATIONS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ})
ENTANGLERS = (GateKind.CNOT, GateKind.CZ)
_TWO_QUBIT = frozenset({GateKind.CNOT, GateKind.CZ, GateKind.ECR, GateKind.SWAP})
_ALIASES = {"cx": "cnot"}
_ROTATION_ORDER = (GateKind.RX, GateKind.RY, GateKind.RZ)


class Topology(Enum):
    LINEAR = "linear"
    CIRCULAR = "circular"
    FULL = "full"
    STAR = "star"
    GRID = "grid"


@dataclass(frozen=True)
class Angle:
    """Rotation angle ``offset + value(source, index)``.

    ``source`` is ``"param"`` (trainable weight), ``"input"`` (data feature)
    or ``"const"``.  Transpilation only ever adds constant offsets, so an
    affine binding with unit slope is all the IR needs.
    """

    source: str = "const"
    index: int = -1
    offset: float = 0.0

    def __post_init__(self):
        if self.source not in ("const", "param", "input"):
            raise InvalidInput(f"unknown angle source {self.source!r}")
        if self.source != "const" and self.index < 0:
            raise InvalidInput("bound angles need a non-negative index")

    @classmethod
    def param(cls, index: int, offset: float = 0.0) -> "Angle":
        return cls("param", index, offset)

    @classmethod
    def input(cls, index: int, offset: float = 0.0) -> "Angle":
        return cls("input", index, offset)

    @classmethod
    def const(cls, value: float) -> "Angle":
        return cls("const", -1, float(value))

    @property
    def is_trainable(self) -> bool:
        return self.source == "param"

    def shifted(self, delta: float) -> "Angle":
        return Angle(self.source, self.index, self.offset + delta)

    def value(self, params=None, inputs=None):
        if self.source == "param":
            return params[self.index] + self.offset
        if self.source == "input":
            return inputs[..., self.index] + self.offset
        return self.offset


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: Angle | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.kind.arity:
            raise InvalidInput(f"{self.kind.value} acts on {self.kind.arity} qubit(s), got {self.qubits}")
        if self.kind.is_two_qubit and self.qubits[0] == self.qubits[1]:
            raise InvalidInput(f"{self.kind.value} needs two distinct qubits, got {self.qubits}")
        if self.kind.is_rotation and self.angle is None:
            raise InvalidInput(f"{self.kind.value} needs an angle")
        if not self.kind.is_rotation and self.angle is not None:
            raise InvalidInput(f"{self.kind.value} takes no angle")


@dataclass(frozen=True)
class GateCounts:
    """Gate tallies by class; ``by_gate`` splits the two-qubit count per gate name."""

    n_1q: int = 0
    n_2q: int = 0
    n_meas: int = 0
    by_gate: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if min(self.n_1q, self.n_2q, self.n_meas) < 0 or any(v < 0 for v in self.by_gate.values()):
            raise InvalidInput("gate counts must be non-negative")
        if self.by_gate and sum(self.by_gate.values()) != self.n_2q:
            raise InvalidInput("typed two-qubit counts must sum to n_2q")

    def __iter__(self) -> Iterator[int]:
        return iter((self.n_1q, self.n_2q, self.n_meas))

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_1q, self.n_2q, self.n_meas)

    def to_dict(self) -> dict:
        return {"n_1q": self.n_1q, "n_2q": self.n_2q, "n_meas": self.n_meas, "by_gate": dict(sorted(self.by_gate.items()))}


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list on ``n_qubits`` qubits.

    ``n_params`` and ``n_inputs`` are inferred from the bindings when not
    given.  Every trainable slot must be bound to exactly one rotation, so
    ``n_params`` is also the number of trainable gates.
    """

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_params: int | None = None
    n_inputs: int | None = None

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if self.n_qubits < 0:
            raise InvalidQubitCount(f"negative qubit count {self.n_qubits}")
        param_uses: dict[int, int] = {}
        max_input = -1
        for g in gates:
            if any(q < 0 or q >= self.n_qubits for q in g.qubits):
                raise InvalidInput(f"gate {g.kind.value}{g.qubits} outside a {self.n_qubits}-qubit register")
            if g.angle is not None and g.angle.source == "param":
                param_uses[g.angle.index] = param_uses.get(g.angle.index, 0) + 1
            elif g.angle is not None and g.angle.source == "input":
                max_input = max(max_input, g.angle.index)
        n_params = len(param_uses) if self.n_params is None else self.n_params
        if sorted(param_uses) != list(range(n_params)) or any(v != 1 for v in param_uses.values()):
            raise InvalidInput("trainable slots must be 0..n_params-1, each bound to exactly one rotation")
        n_inputs = max_input + 1 if self.n_inputs is None else self.n_inputs
        if max_input >= n_inputs:
            raise InvalidInput("input binding index exceeds n_inputs")
        object.__setattr__(self, "n_params", n_params)
        object.__setattr__(self, "n_inputs", n_inputs)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def with_gates(self, gates: Iterable[Gate], n_qubits: int | None = None) -> "Circuit":
        return Circuit(self.n_qubits if n_qubits is None else n_qubits, tuple(gates), self.n_params, self.n_inputs)

    @property
    def trainable_gates(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.angle is not None and g.angle.is_trainable]


def topology_edges(topology: Topology | str, n: int) -> list[tuple[int, int]]:
    """Entangler pairs for ``topology`` on ``n`` qubits, in a fixed order."""
    topology = Topology(topology)
    if n < 2:
        raise InvalidQubitCount(f"topologies need at least 2 qubits, got {n}")
    if topology is Topology.LINEAR:
        edges = [(i, i + 1) for i in range(n - 1)]
    elif topology is Topology.CIRCULAR:
        edges = [(i, i + 1) for i in range(n - 1)] + [(n - 1, 0)]
    elif topology is Topology.FULL:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif topology is Topology.STAR:
        edges = [(0, i) for i in range(1, n)]
    else:
        rows, cols = grid_shape(n)
        edges = []
        for i in range(n):
            if (i + 1) % cols and i + 1 < n:
                edges.append((i, i + 1))
            if i + cols < n:
                edges.append((i, i + cols))
        edges.sort()
    seen: set[frozenset[int]] = set()
    unique = []
    for e in edges:
        key = frozenset(e)
        if key not in seen:
            seen.add(key)
            unique.append(e)
    return unique


def grid_shape(n: int) -> tuple[int, int]:
    """Near-square ``rows x cols`` lattice holding ``n`` qubits row-major; the last row may be short."""
    rows = max(1, math.isqrt(n))
    return rows, -(-n // rows)


def _check_search_point(n_qubits: int, depth: int) -> None:
    if not 2 <= n_qubits <= MAX_QUBITS:
        raise InvalidSearchPoint(f"n_qubits={n_qubits} outside [2, {MAX_QUBITS}]")
    if not 1 <= depth <= MAX_DEPTH:
        raise InvalidSearchPoint(f"depth={depth} outside [1, {MAX_DEPTH}]")


def _rotation_cycle(rotation_kinds: Iterable[GateKind | str]) -> list[GateKind]:
    kinds = {GateKind.parse(k) if isinstance(k, str) else k for k in rotation_kinds}
    if not kinds:
        raise InvalidSearchPoint("rotation_kinds must be non-empty")
    if not kinds <= ROTATIONS:
        raise InvalidSearchPoint(f"rotation kinds must be drawn from RX/RY/RZ, got {sorted(k.value for k in kinds)}")
    return [k for k in _ROTATION_ORDER if k in kinds]


def build_ansatz(
    n_qubits: int,
    depth: int,
    rotation_kinds: Iterable[GateKind | str],
    entangler: GateKind | str,
    topology: Topology | str,
    measure: bool = True,
) -> Circuit:
    """Layered ansatz: a trainable rotation on every qubit, then entanglers on the topology edges.

    With several rotation kinds, layer ``l`` uses kind ``l mod k`` (in RX, RY, RZ
    order), so ``n_params == n_qubits * depth`` regardless of the selection.
    """
    _check_search_point(n_qubits, depth)
    cycle = _rotation_cycle(rotation_kinds)
    entangler = GateKind.parse(entangler) if isinstance(entangler, str) else entangler
    if entangler not in ENTANGLERS:
        raise InvalidSearchPoint(f"entangler must be CNOT or CZ, got {entangler.value}")
    edges = topology_edges(topology, n_qubits)
    gates: list[Gate] = []
    for layer in range(depth):
        kind = cycle[layer % len(cycle)]
        for q in range(n_qubits):
            gates.append(Gate(kind, (q,), Angle.param(layer * n_qubits + q)))
        gates.extend(Gate(entangler, e) for e in edges)
    if measure:
        gates.extend(Gate(GateKind.MEASURE, (q,)) for q in range(n_qubits))
    return Circuit(n_qubits, tuple(gates), n_params=n_qubits * depth, n_inputs=0)


def angle_embedding(n_features: int, kind: GateKind | str = GateKind.RY) -> tuple[Gate, ...]:
    """One data-bound rotation per feature, feature ``i`` on qubit ``i``."""
    kind = GateKind.parse(kind) if isinstance(kind, str) else kind
    if n_features < 1:
        raise DimensionMismatch("angle embedding needs at least one feature")
    if kind not in ROTATIONS:
        raise InvalidInput(f"embedding gate must be a rotation, got {kind.value}")
    return tuple(Gate(kind, (i,), Angle.input(i)) for i in range(n_features))


def embed(circuit: Circuit, n_features: int | None = None, kind: GateKind | str = GateKind.RY) -> Circuit:
    """Prepend an angle embedding to ``circuit``."""
    n_features = circuit.n_qubits if n_features is None else n_features
    if n_features != circuit.n_qubits:
        raise DimensionMismatch(f"{n_features} features cannot be angle-embedded into {circuit.n_qubits} qubits")
    if circuit.n_inputs:
        raise DimensionMismatch("circuit already consumes data inputs")
    gates = angle_embedding(n_features, kind) + circuit.gates
    return Circuit(circuit.n_qubits, gates, circuit.n_params, n_features)


def hybrid_circuit(n_qubits, depth, rotation_kinds, entangler, topology) -> Circuit:
    """Embedding plus ansatz: the quantum layer of a hybrid model."""
    return embed(build_ansatz(n_qubits, depth, rotation_kinds, entangler, topology))


def gate_counts(circuit: Circuit | Sequence[Gate]) -> GateCounts:
    gates = circuit.gates if isinstance(circuit, Circuit) else circuit
    n1 = n2 = nm = 0
    by_gate: dict[str, int] = {}
    for g in gates:
        if g.kind.is_measurement:
            nm += 1
        elif g.kind.is_two_qubit:
            n2 += 1
            by_gate[g.kind.value] = by_gate.get(g.kind.value, 0) + 1
        else:
            n1 += 1
    return GateCounts(n1, n2, nm, by_gate)


def random_circuit(
    n_qubits: int,
    depth: int,
    rng: np.random.Generator,
    two_qubit_prob: float = 0.5,
    measure: bool = True,
    trainable: bool = False,
) -> Circuit:
    """Random logical circuit of ``depth`` layers.

    Each layer pairs qubits by a random permutation; every pair receives a
    CNOT or CZ with probability ``two_qubit_prob`` and otherwise each qubit of
    the pair (and any unpaired qubit) gets a random rotation.  With
    ``trainable`` the rotations are bound to fresh parameter slots, otherwise
    they carry random constant angles.
    """
    if n_qubits < 1:
        raise InvalidQubitCount("random circuits need at least one qubit")
    gates: list[Gate] = []
    slot = 0

    def rotation(q: int) -> Gate:
        nonlocal slot
        kind = _ROTATION_ORDER[int(rng.integers(3))]
        theta = float(rng.uniform(-np.pi, np.pi))
        if trainable:
            slot += 1
            return Gate(kind, (q,), Angle.param(slot - 1, theta))
        return Gate(kind, (q,), Angle.const(theta))

    for _ in range(depth):
        order = [int(q) for q in rng.permutation(n_qubits)]
        for i in range(0, n_qubits - 1, 2):
            a, b = order[i], order[i + 1]
            if rng.random() < two_qubit_prob:
                gates.append(Gate(ENTANGLERS[int(rng.integers(2))], (a, b)))
            else:
                gates.extend((rotation(a), rotation(b)))
        if n_qubits % 2:
            gates.append(rotation(order[-1]))
    if measure:
        gates.extend(Gate(GateKind.MEASURE, (q,)) for q in range(n_qubits))
    return Circuit(n_qubits, tuple(gates))
