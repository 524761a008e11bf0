"""Three ways to differentiate a quantum layer.

Parameter shift is what hardware would do: two extra circuit runs per
parameter.  The adjoint method gets the same numbers from one forward and
one backward sweep of the statevector, which is what training uses.
Central finite differences are the sanity check for both.

    python3 demos/gradients.py
"""

from __future__ import annotations

import time

import numpy as np

from qcostnas import simkernel
from qcostnas.circuits import hybrid_circuit


def main() -> None:
    rng = np.random.default_rng(3)
    for n, depth in ((3, 2), (5, 4), (8, 6)):
        circuit = hybrid_circuit(n, depth, ("rx", "ry"), "cz", "circular")
        w = rng.uniform(-np.pi, np.pi, circuit.n_params)
        x = rng.uniform(-1, 1, circuit.n_inputs)

        t0 = time.perf_counter()
        shift = simkernel.grad_parameter_shift(circuit, w, x).jacobian
        t1 = time.perf_counter()
        adjoint = simkernel.grad_adjoint(circuit, w, x).jacobian
        t2 = time.perf_counter()

        h = 1e-6
        fd = np.empty_like(shift)
        for p in range(circuit.n_params):
            e = np.zeros_like(w)
            e[p] = h
            fd[:, p] = (simkernel.expectation(circuit, w + e, x) - simkernel.expectation(circuit, w - e, x)) / (2 * h)

        print(f"{n} qubits, {circuit.n_params:>2} params: "
              f"|shift-adjoint| {np.abs(shift - adjoint).max():.1e}, |adjoint-fd| {np.abs(adjoint - fd).max():.1e}, "
              f"shift {1e3 * (t1 - t0):.1f} ms vs adjoint {1e3 * (t2 - t1):.1f} ms")


if __name__ == "__main__":
    main()
