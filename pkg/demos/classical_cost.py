"""Counting FLOPs and converting them to seconds.

A candidate's classical cost is its exact training-step FLOP count
divided by a device throughput.  The throughput comes from timing one
reference network, so only the reference is ever measured; every
candidate after that is priced by arithmetic.

    python3 demos/classical_cost.py
"""

from __future__ import annotations

from qcostnas.ccost import Conv, classical_cost, count_flops, count_params, output_shape, training_step_flops
from qcostnas.hybrid import REFERENCE_STACK, measure_reference

INPUT = (1, 8, 8)
BATCH = 32
STEPS = 100

STACKS = {
    "reference": REFERENCE_STACK,
    "two small convs": (
        Conv(1, 8, 3, padding="same", activation="tanh", pooling="max"),
        Conv(8, 16, 3, padding="same", activation="relu"),
    ),
    "wide, 7x7": (Conv(1, 64, 7, padding="same", activation="silu", pooling="avg", dropout=0.1),),
}


def main() -> None:
    print("timing the reference network (a few seconds)...")
    tp = measure_reference(batch_size=BATCH, n_steps=5, warmup=2)
    print(f"measured throughput: {tp.Phi / 1e9:.2f} GFLOP/s over {tp.F_reference:.3g} FLOPs per step\n")
    for name, stack in STACKS.items():
        forward = count_flops(stack, INPUT)
        step = training_step_flops(forward, BATCH)
        cost = classical_cost(step, tp.Phi, STEPS)
        print(f"{name:<16} out {output_shape(stack, INPUT)!s:<12} params {count_params(stack, INPUT):>6} "
              f"forward {forward:>9} FLOPs  {STEPS} steps -> {cost.T_classical_total * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
