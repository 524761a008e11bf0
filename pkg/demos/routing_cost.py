"""How connectivity turns into time.

The same four-qubit ansatz is compiled for three emulated devices.  On a
line of qubits a ring or all-to-all entangler needs SWAPs, and every SWAP
is three extra native two-qubit gates; the cost breakdown shows where
that time goes and how much the failure probability inflates it.

    python3 demos/routing_cost.py
"""

from __future__ import annotations

from qcostnas.backend import load_backend
from qcostnas.circuits import hybrid_circuit
from qcostnas.qcost import TrainingPlan, quantum_training_cost
from qcostnas.transpiler import transpile

STEPS = 100


def main() -> None:
    backends = [load_backend(name) for name in ("fake_linear7", "fake_grid16", "fake_heavyhex27")]
    print(f"{'topology':<9} {'backend':<16} {'2q log':>6} {'2q phys':>7} {'T_logical':>10} {'T_routing':>10} "
          f"{'penalty':>10} {'p_fail':>7}")
    for topology in ("linear", "circular", "full"):
        circuit = hybrid_circuit(4, 3, ("ry", "rz"), "cnot", topology)
        for backend in backends:
            t = transpile(circuit, backend)
            q = quantum_training_cost(t, backend.calibration, TrainingPlan(circuit.n_params, STEPS))
            print(f"{topology:<9} {backend.name:<16} {t.logical_counts.n_2q:>6} {t.physical_counts.n_2q:>7} "
                  f"{q.T_logical * 1e6:>8.2f}us {q.T_routing * 1e6:>8.2f}us "
                  f"{q.reliability_penalty * 1e6:>8.2f}us {q.p_fail:>7.3f}")

    # Deep circuits eventually fail almost surely; the model refuses to price them
    # unless asked to clamp.
    deep = hybrid_circuit(7, 15, ("rx", "ry", "rz"), "cnot", "full")
    backend = backends[0]
    t = transpile(deep, backend)
    q = quantum_training_cost(t, backend.calibration, TrainingPlan(deep.n_params, STEPS), on_saturation="clamp")
    print(f"\n7 qubits, depth 15, full: {t.physical_counts.n_2q} native 2q gates, "
          f"p_fail={q.p_fail:.12f}, saturated={q.saturated}")


if __name__ == "__main__":
    main()
