"""Experiment drivers behind the CLI: scheduler validation, ablation, exports, hypervolume."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .backend import BackendModel
from .circuits import random_circuit
from .errors import InvalidInput, UsageError
from .nas import OBJECTIVE_NAMES, ParetoArchive, fast_nondominated_sort
from .qcost import gate_execution_time
from .transpiler import asap_schedule, transpile

CSV_SCHEMA = "# schema: qcostnas-pareto v1"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(rows: Sequence[dict], columns: Sequence[str], header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


# -------------------------------------------------------------- hypervolume


def _hv(points: np.ndarray, ref: np.ndarray) -> float:
    if len(points) == 0:
        return 0.0
    if points.shape[1] == 1:
        return float(ref[0] - points[:, 0].min())
    if points.shape[1] == 2:
        pts = points[np.lexsort((points[:, 1], points[:, 0]))]
        vol, best_y = 0.0, ref[1]
        for x, y in pts:
            if y < best_y:
                vol += (ref[0] - x) * (best_y - y)
                best_y = y
        return float(vol)
    order = np.argsort(points[:, -1], kind="stable")
    pts = points[order]
    vol = 0.0
    for i in range(len(pts)):
        top = pts[i + 1, -1] if i + 1 < len(pts) else ref[-1]
        height = top - pts[i, -1]
        if height > 0:
            slab = pts[: i + 1, :-1]
            keep = fast_nondominated_sort(slab)[0]
            vol += _hv(slab[keep], ref[:-1]) * height
    return float(vol)


def hypervolume(points: Iterable[Sequence[float]], reference: Sequence[float]) -> float:
    """Exact dominated volume (minimization) by slicing along the last objective."""
    ref = np.asarray(reference, dtype=float)
    pts = np.asarray(list(points), dtype=float).reshape(-1, len(ref))
    if len(pts) and np.any(pts > ref):
        raise InvalidInput("every point must lie inside the reference box")
    if len(pts) == 0:
        return 0.0
    return _hv(pts[fast_nondominated_sort(pts)[0]], ref)


def reference_point(points: Iterable[Sequence[float]], margin: float = 1.1) -> np.ndarray:
    """``margin`` times the per-objective maximum (1.0 where the maximum is 0)."""
    pts = np.asarray(list(points), dtype=float)
    top = pts.max(axis=0)
    return np.where(top > 0, top * margin, 1.0)


def normalized_hypervolume(points: Iterable[Sequence[float]], reference: Sequence[float]) -> float:
    """Hypervolume after scaling every objective so the reference point becomes all ones."""
    ref = np.asarray(reference, dtype=float)
    pts = np.asarray(list(points), dtype=float).reshape(-1, len(ref))
    return hypervolume(pts / ref, np.ones_like(ref))


def archive_hypervolumes(archive: ParetoArchive) -> dict:
    """Normalized hypervolume of generation 0's front and of the final front on a shared reference."""
    all_pts = np.array([e.objectives for e in archive.evaluations.values()])
    ref = reference_point(all_pts)
    gen0 = archive.generation_points(0)
    gen0_front = gen0[fast_nondominated_sort(gen0)[0]]
    final = np.array([e.objectives for e in archive.front()])
    per_gen = []
    for i in range(len(archive.generations)):
        pts = archive.generation_points(i)
        per_gen.append(normalized_hypervolume(pts[fast_nondominated_sort(pts)[0]], ref))
    return {
        "reference": ref.tolist(),
        "generation0": normalized_hypervolume(gen0_front, ref),
        "final": normalized_hypervolume(final, ref),
        "per_generation": per_gen,
    }


# ----------------------------------------------------- scheduler validation


@dataclass
class ValidationReport:
    backend: str
    seed: int
    rows: list[dict]

    COLUMNS = ("index", "n_qubits", "depth", "n_gates", "T_gate", "makespan", "gap", "makespan_zero_rz", "gap_zero_rz")

    def summary(self) -> dict:
        gaps = np.array([r["gap"] for r in self.rows])
        gaps_z = np.array([r["gap_zero_rz"] for r in self.rows])
        return {
            "n_circuits": len(self.rows),
            "mean_gap": float(gaps.mean()) if len(gaps) else 0.0,
            "max_gap": float(gaps.max()) if len(gaps) else 0.0,
            "mean_gap_zero_rz": float(gaps_z.mean()) if len(gaps_z) else 0.0,
            "all_bounded": bool(all(r["T_gate"] >= r["makespan"] for r in self.rows)),
        }

    def to_csv(self) -> str:
        return _write_csv(self.rows, self.COLUMNS)

    def to_dict(self) -> dict:
        return {"backend": self.backend, "seed": self.seed, "summary": self.summary(), "rows": self.rows}


def _gap(T_gate: float, makespan: float) -> float:
    return 0.0 if T_gate == 0 else (T_gate - makespan) / T_gate


def cmd_validate_scheduler(
    backend: BackendModel,
    n_circuits: int = 100,
    qubits: tuple[int, int] = (2, 5),
    depth: tuple[int, int] = (50, 600),
    seed: int = 0,
) -> ValidationReport:
    """Compare the serial gate-time sum with the ASAP makespan on random transpiled circuits.

    Both makespans are reported: with every native gate timed, and with
    ``rz`` treated as a zero-duration frame change.
    """
    if qubits[1] > backend.n_qubits:
        raise InvalidInput(f"backend {backend.name} has only {backend.n_qubits} qubits")
    rng = np.random.default_rng(seed)
    cal = backend.calibration
    rows = []
    for i in range(n_circuits):
        n = int(rng.integers(qubits[0], qubits[1] + 1))
        d = int(rng.integers(depth[0], depth[1] + 1))
        t = transpile(random_circuit(n, d, rng), backend)
        T_gate = gate_execution_time(t.physical_counts, cal)
        ms = asap_schedule(t.physical, cal)
        ms_z = asap_schedule(t.physical, cal, zero_rz=True)
        rows.append({
            "index": i, "n_qubits": n, "depth": d, "n_gates": len(t.physical.gates), "T_gate": T_gate,
            "makespan": ms, "gap": _gap(T_gate, ms), "makespan_zero_rz": ms_z, "gap_zero_rz": _gap(T_gate, ms_z),
        })
    return ValidationReport(backend.name, seed, rows)


# ----------------------------------------------------------------- ablation


@dataclass
class AblationReport:
    backend: str
    rows: list[dict] = field(default_factory=list)

    COLUMNS = ("digest", "label", "n_qubits", "depth", "topology", "T_logical", "T_routing", "reliability_penalty", "T_eff", "p_fail")

    def to_csv(self) -> str:
        return _write_csv(self.rows, self.COLUMNS)

    def to_dict(self) -> dict:
        return {"backend": self.backend, "rows": self.rows}


def cmd_ablate(archive: ParetoArchive, scope: str = "front") -> AblationReport:
    """Per-step quantum time split into logical, routing and reliability parts.

    The gradient-evaluation multiplier is left out because it scales all
    architectures alike.  ``scope`` is ``front`` or ``all`` evaluated genomes.
    Rows are sorted by ``T_eff`` descending, then by digest.
    """
    if scope == "front":
        evals = archive.front()
    elif scope == "all":
        evals = list(archive.evaluations.values())
    else:
        raise UsageError(f"unknown ablation scope {scope!r}")
    rows = []
    for ev in evals:
        q, g = ev.quantum, ev.genome
        rows.append({
            "digest": g.digest(), "label": g.label(), "n_qubits": g.n_qubits, "depth": g.depth, "topology": g.topology,
            "T_logical": q["T_logical"], "T_routing": q["T_routing"], "reliability_penalty": q["reliability_penalty"],
            "T_eff": q["T_eff"], "p_fail": q["p_fail"],
        })
    rows.sort(key=lambda r: (-r["T_eff"], r["digest"]))
    return AblationReport(archive.config.backend, rows)


# ------------------------------------------------------------------- export

EXPORT_FORMATS = ("csv", "json", "svg")
_GEN_COLUMNS = ("generation", "digest", "label", "rank", "crowding", "accuracy", *OBJECTIVE_NAMES, "saturated", "final_front")
_FRONT_COLUMNS = ("digest", "label", "accuracy", *OBJECTIVE_NAMES, "n_steps", "T_eff", "T_routing", "p_fail")
_PALETTE = ("#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725")
_SVG_PAIRS = (
    ("T_quantum_total", "error"),
    ("T_classical_total", "error"),
    ("params_total", "error"),
    ("T_quantum_total", "params_total"),
)


def generation_rows(archive: ParetoArchive) -> list[dict]:
    front = set(archive.final_front)
    rows = []
    for rec in archive.generations:
        for key, rank, crowd in zip(rec.population, rec.rank, rec.crowding):
            ev = archive.evaluations[key]
            row = {
                "generation": rec.index, "digest": key, "label": ev.genome.label(), "rank": rank,
                "crowding": crowd, "accuracy": ev.accuracy, "saturated": ev.saturated, "final_front": key in front,
            }
            row.update(zip(OBJECTIVE_NAMES, ev.objectives))
            rows.append(row)
    return rows


def front_rows(archive: ParetoArchive) -> list[dict]:
    rows = []
    for ev in archive.front():
        row = {"digest": ev.genome.digest(), "label": ev.genome.label(), "accuracy": ev.accuracy, "n_steps": ev.n_steps,
               "T_eff": ev.quantum["T_eff"], "T_routing": ev.quantum["T_routing"], "p_fail": ev.quantum["p_fail"]}
        row.update(zip(OBJECTIVE_NAMES, ev.objectives))
        rows.append(row)
    return rows


def scatter_svg(rows: Sequence[dict], x: str, y: str, width: int = 480, height: int = 360) -> str:
    """Plain SVG scatter of two columns, coloured by generation."""
    pad = 50
    xs = np.array([r[x] for r in rows], dtype=float)
    ys = np.array([r[y] for r in rows], dtype=float)
    n_gen = max((r["generation"] for r in rows), default=0) + 1

    def scale(v, lo, hi, a, b):
        return (a + b) / 2 if hi == lo else a + (v - lo) / (hi - lo) * (b - a)

    x0, x1 = (xs.min(), xs.max()) if len(xs) else (0.0, 1.0)
    y0, y1 = (ys.min(), ys.max()) if len(ys) else (0.0, 1.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad / 2}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad / 2}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle">{x} [{x0:.3g}, {x1:.3g}]</text>',
        f'<text x="14" y="{height / 2}" text-anchor="middle" transform="rotate(-90 14 {height / 2})">{y} [{y0:.3g}, {y1:.3g}]</text>',
    ]
    for r, xv, yv in zip(rows, xs, ys):
        cx = scale(xv, x0, x1, pad + 5, width - pad / 2 - 5)
        cy = scale(yv, y0, y1, height - pad - 5, pad / 2 + 5)
        colour = _PALETTE[min(len(_PALETTE) - 1, r["generation"] * len(_PALETTE) // max(n_gen, 1))]
        ring = ' stroke="red" stroke-width="1.5"' if r.get("final_front") else ""
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="{colour}" fill-opacity="0.8"{ring}/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_export_pareto(archive: ParetoArchive, out_dir: str | Path, formats: Iterable[str] = ("csv", "json")) -> list[Path]:
    """Write generation history and the final front; returns the written paths."""
    formats = list(formats)
    bad = [f for f in formats if f not in EXPORT_FORMATS]
    if bad:
        raise UsageError(f"unknown export format(s) {bad}; choose from {EXPORT_FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gen_rows = generation_rows(archive)
    written = []
    if "csv" in formats:
        header = f"{CSV_SCHEMA}\n# cost_steps: {archive.config.cost_steps}"
        (out / "generations.csv").write_text(_write_csv(gen_rows, _GEN_COLUMNS, header))
        (out / "front.csv").write_text(_write_csv(front_rows(archive), _FRONT_COLUMNS, header))
        written += [out / "generations.csv", out / "front.csv"]
    if "json" in formats:
        doc = {"cost_steps": archive.config.cost_steps, "generations": gen_rows, "front": front_rows(archive), "hypervolume": archive_hypervolumes(archive)}
        (out / "pareto.json").write_text(json.dumps(doc, indent=1, sort_keys=True, default=_json_default) + "\n")
        written.append(out / "pareto.json")
    if "svg" in formats:
        for x, y in _SVG_PAIRS:
            path = out / f"{y}_vs_{x}.svg"
            path.write_text(scatter_svg(gen_rows, x, y))
            written.append(path)
    return written


def _json_default(o):
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    raise TypeError(type(o).__name__)
