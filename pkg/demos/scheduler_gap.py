"""Is summing gate durations a fair stand-in for real circuit time?

Adding up every gate's duration ignores parallelism, so it can only
overestimate an as-soon-as-possible schedule.  This script measures by
how much on random circuits, and shows that treating rz as a free frame
change (as IBM-style hardware does) widens the gap further.

    python3 demos/scheduler_gap.py
"""

from __future__ import annotations

import numpy as np

from qcostnas.backend import load_backend
from qcostnas.reports import cmd_validate_scheduler


def main() -> None:
    report = cmd_validate_scheduler(load_backend("fake_linear7"), 100, (2, 5), (50, 600), seed=7)
    s = report.summary()
    gaps = np.array([r["gap"] for r in report.rows])
    print(f"{s['n_circuits']} circuits, every sum >= makespan: {s['all_bounded']}")
    print(f"relative gap: mean {gaps.mean():.3f}, min {gaps.min():.3f}, max {gaps.max():.3f}")
    print(f"with zero-duration rz the mean gap becomes {s['mean_gap_zero_rz']:.3f}")
    widest = max(report.rows, key=lambda r: r["gap"])
    print(f"widest gap: {widest['n_qubits']} qubits, {widest['n_gates']} gates, "
          f"sum {widest['T_gate'] * 1e6:.1f}us vs makespan {widest['makespan'] * 1e6:.1f}us")


if __name__ == "__main__":
    main()
