"""Device models: coupling map, native basis and calibration, loaded from JSON.

Durations are stored in seconds.  Files may give a duration as a bare number
(seconds), a string such as ``"300 ns"``, or ``{"value": 300, "unit": "ns"}``.
Three presets ship with the package: ``fake_linear7``, ``fake_heavyhex27`` and
``fake_grid16``.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from statistics import median
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import CalibrationFormatError, InvalidBackend

SCHEMA_VERSION = 1
PRESETS = ("fake_linear7", "fake_heavyhex27", "fake_grid16")
TWO_QUBIT_NATIVE = ("ecr", "cz", "cnot")
ONE_QUBIT_NATIVE = ("rz", "sx", "x")

# divisors rather than factors: x / 1e9 rounds correctly, x * 1e-9 does not
_UNITS = {"s": 1.0, "ms": 1e3, "us": 1e6, "µs": 1e6, "ns": 1e9}
_DURATION = re.compile(r"^\s*([0-9.eE+-]+)\s*([a-zµ]+)\s*$")
_QUBIT_FIELDS = ("t_1q", "eps_1q", "t_meas", "eps_meas", "T2")


@dataclass(frozen=True)
class CouplingMap:
    n_physical: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = sorted({(min(a, b), max(a, b)) for a, b in self.edges})
        for a, b in norm:
            if a == b or a < 0 or b >= self.n_physical:
                raise InvalidBackend(f"bad coupling edge ({a}, {b}) for {self.n_physical} qubits")
        object.__setattr__(self, "edges", tuple(norm))

    @cached_property
    def _adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_physical)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(n) for n in adj]

    def neighbors(self, q: int) -> list[int]:
        return self._adjacency[q]

    def adjacent(self, a: int, b: int) -> bool:
        return b in self._adjacency[a]

    def is_connected(self) -> bool:
        if self.n_physical == 0:
            return False
        return len(self._bfs_parents(0)) == self.n_physical

    def _bfs_parents(self, source: int) -> dict[int, int]:
        parents = {source: -1}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self._adjacency[u]:
                if v not in parents:
                    parents[v] = u
                    queue.append(v)
        return parents

    def shortest_path(self, a: int, b: int) -> list[int]:
        """BFS path from ``a`` to ``b``; among equal-length paths the one found
        by expanding lower-index neighbours first wins."""
        parents = self._bfs_parents(a)
        if b not in parents:
            raise InvalidBackend(f"no path between physical qubits {a} and {b}")
        path = [b]
        while path[-1] != a:
            path.append(parents[path[-1]])
        return path[::-1]

    @cached_property
    def distances(self) -> np.ndarray:
        dist = np.full((self.n_physical, self.n_physical), -1, dtype=int)
        for s in range(self.n_physical):
            dist[s, s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in self._adjacency[u]:
                    if dist[s, v] < 0:
                        dist[s, v] = dist[s, u] + 1
                        queue.append(v)
        return dist


@dataclass(frozen=True)
class Calibration:
    """Scalar calibration consumed by the quantum cost model (seconds, probabilities)."""

    t_1q: float
    t_2q_by_gate: Mapping[str, float]
    t_meas: float
    eps_1q: float
    eps_2q: float
    eps_meas: float
    T2: float
    T1: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "t_2q_by_gate", dict(sorted(self.t_2q_by_gate.items())))
        if not self.t_2q_by_gate:
            raise CalibrationFormatError("calibration needs at least one two-qubit gate duration")
        durations = [self.t_1q, self.t_meas, *self.t_2q_by_gate.values()]
        if not all(np.isfinite(d) and d > 0 for d in durations):
            raise CalibrationFormatError("gate durations must be positive and finite")
        for name in ("eps_1q", "eps_2q", "eps_meas"):
            value = getattr(self, name)
            if not (np.isfinite(value) and 0.0 <= value < 1.0):
                raise CalibrationFormatError(f"{name}={value!r} is not a probability in [0, 1)")
        if not (np.isfinite(self.T2) and self.T2 > 0):
            raise CalibrationFormatError("T2 must be positive")
        if self.T1 is not None and not self.T1 > 0:
            raise CalibrationFormatError("T1 must be positive")

    @property
    def t_2q(self) -> float:
        """Scalar two-qubit duration; the median across gate types when there are several."""
        return float(median(self.t_2q_by_gate.values()))

    def two_qubit_time(self, gate: str) -> float:
        return self.t_2q_by_gate.get(gate, self.t_2q)

    def to_dict(self) -> dict:
        out = {
            "t_1q": self.t_1q,
            "t_2q": dict(self.t_2q_by_gate),
            "t_meas": self.t_meas,
            "eps_1q": self.eps_1q,
            "eps_2q": self.eps_2q,
            "eps_meas": self.eps_meas,
            "T2": self.T2,
        }
        if self.T1 is not None:
            out["T1"] = self.T1
        return out


@dataclass(frozen=True)
class NativeBasis:
    one_qubit: tuple[str, ...] = ONE_QUBIT_NATIVE
    two_qubit: str = "ecr"

    def __post_init__(self):
        object.__setattr__(self, "one_qubit", tuple(self.one_qubit))
        two = "cnot" if self.two_qubit == "cx" else self.two_qubit
        object.__setattr__(self, "two_qubit", two)
        if two not in TWO_QUBIT_NATIVE:
            raise CalibrationFormatError(f"unsupported native two-qubit gate {self.two_qubit!r}")
        if set(self.one_qubit) != set(ONE_QUBIT_NATIVE):
            raise CalibrationFormatError(f"one-qubit basis must be {list(ONE_QUBIT_NATIVE)}")


@dataclass(frozen=True)
class BackendModel:
    name: str
    coupling: CouplingMap
    basis: NativeBasis
    calibration: Calibration
    raw: Mapping[str, Any] | None = field(default=None, compare=True)

    def __post_init__(self):
        if not self.coupling.is_connected():
            raise InvalidBackend(f"coupling map of {self.name!r} is not connected")
        extra = set(self.calibration.t_2q_by_gate) - {self.basis.two_qubit}
        if extra:
            raise CalibrationFormatError(f"durations given for non-native two-qubit gates {sorted(extra)}")

    @property
    def n_qubits(self) -> int:
        return self.coupling.n_physical


def parse_duration(value: Any) -> float:
    """Normalize a duration to seconds."""
    if isinstance(value, bool):
        raise CalibrationFormatError(f"bad duration {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, Mapping):
        if set(value) != {"value", "unit"}:
            raise CalibrationFormatError(f"duration objects need 'value' and 'unit', got {sorted(value)}")
        number, unit = value["value"], value["unit"]
    elif isinstance(value, str):
        m = _DURATION.match(value)
        if not m:
            raise CalibrationFormatError(f"bad duration {value!r}")
        number, unit = m.group(1), m.group(2)
    else:
        raise CalibrationFormatError(f"bad duration {value!r}")
    if unit not in _UNITS:
        raise CalibrationFormatError(f"unknown time unit {unit!r}")
    try:
        return float(number) / _UNITS[unit]
    except (TypeError, ValueError):
        raise CalibrationFormatError(f"bad duration {value!r}") from None


def _probability(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CalibrationFormatError(f"{name} must be a number, got {value!r}")
    return float(value)


def aggregate_calibration(raw: Mapping[str, Sequence[Mapping[str, Any]]]) -> Calibration:
    """Reduce per-qubit and per-edge tables to one scalar per quantity (median).

    ``raw["qubits"]`` rows carry ``t_1q, eps_1q, t_meas, eps_meas, T2`` and
    optionally ``T1``; ``raw["edges"]`` rows carry ``gate, t_2q, eps_2q``.
    Two-qubit durations are aggregated per gate name.
    """
    qubits = raw.get("qubits") or []
    edges = raw.get("edges") or []
    if not qubits or not edges:
        raise CalibrationFormatError("calibration tables must contain at least one qubit row and one edge row")
    try:
        agg = {f: float(median(parse_duration(r[f]) if f.startswith("t_") or f == "T2" else _probability(r[f], f) for r in qubits))
               for f in _QUBIT_FIELDS}
        t1_rows = [parse_duration(r["T1"]) for r in qubits if "T1" in r]
        by_gate: dict[str, list[float]] = {}
        for r in edges:
            gate = "cnot" if r["gate"] == "cx" else r["gate"]
            by_gate.setdefault(gate, []).append(parse_duration(r["t_2q"]))
        eps_2q = float(median(_probability(r["eps_2q"], "eps_2q") for r in edges))
    except KeyError as exc:
        raise CalibrationFormatError(f"calibration table row missing field {exc}") from None
    return Calibration(
        t_1q=agg["t_1q"],
        t_2q_by_gate={g: float(median(v)) for g, v in by_gate.items()},
        t_meas=agg["t_meas"],
        eps_1q=agg["eps_1q"],
        eps_2q=eps_2q,
        eps_meas=agg["eps_meas"],
        T2=agg["T2"],
        T1=float(median(t1_rows)) if t1_rows else None,
    )


def _calibration_from_dict(d: Mapping[str, Any]) -> Calibration:
    required = {"t_1q", "t_2q", "t_meas", "eps_1q", "eps_2q", "eps_meas", "T2"}
    missing = required - set(d)
    if missing:
        raise CalibrationFormatError(f"calibration missing {sorted(missing)}")
    unknown = set(d) - required - {"T1"}
    if unknown:
        raise CalibrationFormatError(f"unknown calibration keys {sorted(unknown)}")
    t_2q = d["t_2q"]
    if not isinstance(t_2q, Mapping):
        raise CalibrationFormatError("'t_2q' must map native gate names to durations")
    return Calibration(
        t_1q=parse_duration(d["t_1q"]),
        t_2q_by_gate={("cnot" if k == "cx" else k): parse_duration(v) for k, v in t_2q.items()},
        t_meas=parse_duration(d["t_meas"]),
        eps_1q=_probability(d["eps_1q"], "eps_1q"),
        eps_2q=_probability(d["eps_2q"], "eps_2q"),
        eps_meas=_probability(d["eps_meas"], "eps_meas"),
        T2=parse_duration(d["T2"]),
        T1=parse_duration(d["T1"]) if "T1" in d else None,
    )


def backend_from_dict(doc: Mapping[str, Any]) -> BackendModel:
    if not isinstance(doc, Mapping):
        raise CalibrationFormatError("backend document must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise CalibrationFormatError(f"unsupported schema_version {version!r}")
    for key in ("name", "n_qubits", "coupling_map", "basis"):
        if key not in doc:
            raise CalibrationFormatError(f"backend document missing {key!r}")
    if "calibration" not in doc and "raw" not in doc:
        raise CalibrationFormatError("backend document needs 'calibration' or 'raw' tables")
    try:
        n = int(doc["n_qubits"])
        edges = tuple((int(a), int(b)) for a, b in doc["coupling_map"])
        basis_doc = doc["basis"]
        basis = NativeBasis(tuple(basis_doc.get("one_qubit", ONE_QUBIT_NATIVE)), basis_doc["two_qubit"])
    except (TypeError, ValueError, KeyError, AttributeError) as exc:
        raise CalibrationFormatError(f"malformed backend document: {exc}") from None
    raw = doc.get("raw")
    calibration = _calibration_from_dict(doc["calibration"]) if "calibration" in doc else aggregate_calibration(raw)
    return BackendModel(str(doc["name"]), CouplingMap(n, edges), basis, calibration, raw)


def backend_to_dict(backend: BackendModel) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": backend.name,
        "n_qubits": backend.n_qubits,
        "coupling_map": [list(e) for e in backend.coupling.edges],
        "basis": {"one_qubit": list(backend.basis.one_qubit), "two_qubit": backend.basis.two_qubit},
        "calibration": backend.calibration.to_dict(),
    }
    if backend.raw is not None:
        doc["raw"] = backend.raw
    return doc


def store_backend(backend: BackendModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(backend_to_dict(backend), indent=2, sort_keys=True) + "\n")


def load_backend(path_or_name: str | Path) -> BackendModel:
    """Load a backend from a JSON file or a bundled preset name."""
    text = None
    if str(path_or_name) in PRESETS:
        text = resources.files("qcostnas.presets").joinpath(f"{path_or_name}.json").read_text()
    else:
        path = Path(path_or_name)
        if not path.is_file():
            raise InvalidBackend(f"no backend file or preset named {str(path_or_name)!r}")
        text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CalibrationFormatError(f"backend file is not valid JSON: {exc}") from None
    return backend_from_dict(doc)
