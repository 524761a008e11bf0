"""Independent reference implementations used by the tests.

None of these import the code they check: the simulator builds dense
unitaries, the cost oracle is a straight-line transcription of the
quantum cost recipe, and the Pareto helpers are brute force.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
ECR = (np.kron(X, I2) - np.kron(Y, X)) / math.sqrt(2)


def rot(axis: str, theta: float) -> np.ndarray:
    p = {"rx": X, "ry": Y, "rz": Z}[axis]
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * p


def angle_value(angle, params, inputs) -> float:
    base = 0.0
    if angle.source == "param":
        base = params[angle.index]
    elif angle.source == "input":
        base = inputs[angle.index]
    return base + angle.offset


def gate_matrix(gate, params, inputs) -> np.ndarray:
    name = gate.kind.value
    if name in ("rx", "ry", "rz"):
        return rot(name, angle_value(gate.angle, params, inputs))
    return {"sx": SX, "x": X, "cnot": CNOT, "cz": CZ, "swap": SWAP, "ecr": ECR}[name]


def embed_operator(m: np.ndarray, qubits, n: int) -> np.ndarray:
    """Full 2^n matrix; qubit q is bit q of the index, the first listed qubit is the high local bit."""
    dim = 1 << n
    k = len(qubits)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        local_in = 0
        for q in qubits:
            local_in = (local_in << 1) | ((col >> q) & 1)
        for local_out in range(1 << k):
            amp = m[local_out, local_in]
            if amp == 0:
                continue
            row = col
            for pos, q in enumerate(qubits):
                bit = (local_out >> (k - 1 - pos)) & 1
                row = (row & ~(1 << q)) | (bit << q)
            full[row, col] += amp
    return full


def dense_state(circuit, params=None, inputs=None) -> np.ndarray:
    n = circuit.n_qubits
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1
    for g in circuit.gates:
        if g.kind.value == "measure":
            continue
        psi = embed_operator(gate_matrix(g, params, inputs), g.qubits, n) @ psi
    return psi


def dense_expect_z(psi: np.ndarray) -> np.ndarray:
    n = int(math.log2(len(psi)))
    return np.array([np.real(np.vdot(psi, embed_operator(Z, (q,), n) @ psi)) for q in range(n)])


def fidelity_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    return abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))


def place_state(logical: np.ndarray, n_phys: int, layout) -> np.ndarray:
    """Embed a logical state into n_phys qubits, logical qubit i on physical layout[i], the rest in |0>."""
    n = int(math.log2(len(logical)))
    out = np.zeros(1 << n_phys, dtype=complex)
    for i, amp in enumerate(logical):
        j = 0
        for q in range(n):
            if (i >> q) & 1:
                j |= 1 << layout[q]
        out[j] = amp
    return out


# ------------------------------------------------------- cost oracles


def quantum_cost_oracle(phys, logi, cal, n_params, n_steps):
    """Straight-line quantum cost.

    ``phys``/``logi`` are dicts with n_1q, n_meas and a per-gate two-qubit
    dict ``two``; ``cal`` is a dict of plain floats with ``t_2q`` per gate.
    """
    t2 = cal["t_2q"]
    n2 = sum(phys["two"].values())
    T_gate = phys["n_1q"] * cal["t_1q"] + phys["n_meas"] * cal["t_meas"]
    for g, n in phys["two"].items():
        T_gate += n * t2[g]
    T_routing = 0.0
    for g in sorted(set(phys["two"]) | set(logi["two"])):
        dn = phys["two"].get(g, 0) - logi["two"].get(g, 0)
        if dn > 0:
            T_routing += dn * t2[g]
    T_logical = T_gate - T_routing
    success = (1 - cal["eps_1q"]) ** phys["n_1q"] * (1 - cal["eps_2q"]) ** n2 * (1 - cal["eps_meas"]) ** phys["n_meas"]
    p_gate = 1 - success
    p_decoh = 1 - math.exp(-T_gate / cal["T2"])
    p_fail = 1 - (1 - p_gate) * (1 - p_decoh)
    T_eff = (T_logical + T_routing) / (1 - p_fail)
    N_eval = 2 * n_params
    T_quantum = T_eff * N_eval
    return {
        "T_gate": T_gate, "T_routing": T_routing, "T_logical": T_logical, "p_gate": p_gate, "p_decoh": p_decoh,
        "p_fail": p_fail, "T_eff": T_eff, "N_eval": N_eval, "T_quantum": T_quantum,
        "T_quantum_total": T_quantum * n_steps, "reliability_penalty": T_eff - (T_logical + T_routing),
    }


# ------------------------------------------------------- Pareto oracles


def brute_dominates(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def brute_fronts(points) -> list[set[int]]:
    remaining = set(range(len(points)))
    fronts = []
    while remaining:
        front = {i for i in remaining if not any(brute_dominates(points[j], points[i]) for j in remaining if j != i)}
        fronts.append(front)
        remaining -= front
    return fronts


def brute_crowding(points) -> list[float]:
    n, m = len(points), len(points[0])
    dist = [0.0] * n
    for k in range(m):
        order = sorted(range(n), key=lambda i: points[i][k])
        lo, hi = points[order[0]][k], points[order[-1]][k]
        if hi == lo:
            continue
        dist[order[0]] = dist[order[-1]] = math.inf
        for pos in range(1, n - 1):
            dist[order[pos]] += (points[order[pos + 1]][k] - points[order[pos - 1]][k]) / (hi - lo)
    return dist


def grid_hypervolume(points, ref) -> float:
    """Volume by coordinate compression: sum every grid cell covered by some point."""
    pts = np.asarray(points, dtype=float)
    ref = np.asarray(ref, dtype=float)
    axes = [np.unique(np.append(pts[:, k], ref[k])) for k in range(len(ref))]
    vol = 0.0
    for cell in itertools.product(*(range(len(a) - 1) for a in axes)):
        lower = np.array([axes[k][c] for k, c in enumerate(cell)])
        upper = np.array([axes[k][c + 1] for k, c in enumerate(cell)])
        if np.any(np.all(pts <= lower, axis=1)):
            vol += float(np.prod(upper - lower))
    return vol
