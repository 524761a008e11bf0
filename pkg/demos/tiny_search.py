"""A small end-to-end architecture search.

Three generations of four candidates in variable mode, on a reduced
dataset, so the whole run takes seconds.  Each candidate is
trained, transpiled and priced; NSGA-II keeps the trade-offs between
error, quantum time, classical time and size.  The archive is then
decomposed per architecture and exported as CSV, JSON and SVG.

    python3 demos/tiny_search.py [output-dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

from qcostnas.nas import SearchConfig, run_search
from qcostnas.reports import archive_hypervolumes, cmd_ablate, cmd_export_pareto


def main(out: Path) -> None:
    config = SearchConfig(mode="variable", seed=1, generations=3, population=4,
                          qubits=(2, 4), depth=(1, 4), samples_per_class=30, epochs=3)
    archive = run_search(config, progress=print)
    hv = archive_hypervolumes(archive)
    print(f"\nhypervolume: generation 0 {hv['generation0']:.4f}, final {hv['final']:.4f}")

    print("\nfinal front:")
    for ev in sorted(archive.front(), key=lambda e: e.objectives):
        err, tq, tc, size = ev.objectives
        print(f"  {ev.genome.label():<40} error {err:.3f}  quantum {tq * 1e3:8.3f}ms  classical {tc * 1e3:7.2f}ms  {size:.0f} params")

    print("\nper-step quantum time split:")
    for row in cmd_ablate(archive).rows:
        print(f"  {row['label']:<40} logical {row['T_logical'] * 1e6:7.2f}us  routing {row['T_routing'] * 1e6:7.2f}us  "
              f"penalty {row['reliability_penalty'] * 1e6:7.2f}us")

    out.mkdir(parents=True, exist_ok=True)
    archive.save(out / "archive.json")
    for path in cmd_export_pareto(archive, out, ("csv", "json", "svg")):
        print("wrote", path)


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "tiny_search_out"))
