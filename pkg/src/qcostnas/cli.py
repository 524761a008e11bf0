"""Command-line interface.

Exit codes: 0 success, 2 usage, 3 backend/calibration, 4 invalid input,
5 reliability saturated, 6 unsupported gate/gradient, 7 capacity,
8 training diverged, 1 anything else raised by the library.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import QCostNASError, UsageError

log = logging.getLogger("qcostnas")

DEFAULT_BACKEND = "fake_linear7"


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out in (None, "-", "json"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _out_dir(args, default: str) -> Path:
    path = Path(args.out or default)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_estimate(args) -> int:
    from .backend import load_backend
    from .circuit_io import load
    from .qcost import TrainingPlan, quantum_training_cost
    from .transpiler import transpile

    backend = load_backend(args.backend or DEFAULT_BACKEND)
    circuit = load(args.circuit)
    n_params = circuit.n_params if args.params is None else args.params
    t = transpile(circuit, backend)
    q = quantum_training_cost(t, backend.calibration, TrainingPlan(n_params, args.steps), args.on_saturation)
    _emit({"backend": backend.name, "n_params": n_params, "n_steps": args.steps, "transpile": t.to_dict(), "breakdown": q.to_dict()}, args.out)
    return 0


def cmd_transpile(args) -> int:
    from .backend import load_backend
    from .circuit_io import dumps, load, to_qasm
    from .transpiler import transpile

    backend = load_backend(args.backend or DEFAULT_BACKEND)
    t = transpile(load(args.circuit), backend)
    text = to_qasm(t.physical) if args.qasm else dumps(t.physical)
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
        sys.stdout.write(json.dumps(t.to_dict(), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    return 0


def cmd_calibrate(args) -> int:
    from .hybrid import measure_reference

    if args.reference != "fixed-cnn":
        raise UsageError(f"unknown reference model {args.reference!r}")
    tp = measure_reference(n_steps=args.steps, seed=args.seed or 0)
    out = args.out or "throughput.json"
    if out in ("-", "json"):
        _emit(tp.to_dict(), out)
    else:
        tp.save(out)
        print(f"Phi = {tp.Phi:.4g} FLOP/s written to {out}")
    return 0


def _load_config(args):
    from .nas import SearchConfig

    config = SearchConfig.load(args.config) if getattr(args, "config", None) else SearchConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.backend is not None:
        overrides["backend"] = args.backend
    if getattr(args, "mode", None):
        overrides["mode"] = args.mode
    if getattr(args, "workers", None):
        overrides["workers"] = args.workers
    return replace(config, **overrides) if overrides else config


def cmd_train_one(args) -> int:
    from .nas import Evaluator, Genome

    text = args.genome
    if not text.lstrip().startswith("{"):
        text = Path(text).read_text()
    try:
        genome = Genome.from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise UsageError(f"--genome is neither a JSON object nor a JSON file: {exc}") from None
    config = replace(_load_config(args), mode=genome.mode)
    ev = Evaluator(config, cache_dir="").compute(genome)
    _emit(ev.to_dict(), args.out)
    return 0


def cmd_search(args) -> int:
    from .nas import run_search
    from .reports import archive_hypervolumes, cmd_export_pareto

    config = _load_config(args)
    out = _out_dir(args, "search_out")
    archive = run_search(config, progress=log.info)
    archive.save(out / "archive.json")
    cmd_export_pareto(archive, out, ("csv", "json"))
    hv = archive_hypervolumes(archive)
    print(f"{len(archive.evaluations)} genomes evaluated, {len(archive.final_front)} on the final front")
    print(f"hypervolume: generation 0 {hv['generation0']:.6g}, final {hv['final']:.6g}")
    return 0


def cmd_validate(args) -> int:
    from .backend import load_backend
    from .reports import cmd_validate_scheduler

    backend = load_backend(args.backend or DEFAULT_BACKEND)
    report = cmd_validate_scheduler(
        backend, args.n_circuits, (args.min_qubits, args.max_qubits), (args.min_depth, args.max_depth), args.seed or 0
    )
    out = _out_dir(args, "validation_out")
    (out / "validation.csv").write_text(report.to_csv())
    (out / "summary.json").write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
    s = report.summary()
    print(f"{s['n_circuits']} circuits: mean gap {s['mean_gap']:.4f}, with zero-duration rz {s['mean_gap_zero_rz']:.4f}, bounded={s['all_bounded']}")
    return 0


def cmd_ablate_cli(args) -> int:
    from .nas import ParetoArchive
    from .reports import cmd_ablate

    report = cmd_ablate(ParetoArchive.load(args.archive), args.scope)
    out = _out_dir(args, "ablation_out")
    (out / "ablation.csv").write_text(report.to_csv())
    (out / "ablation.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    print(f"{len(report.rows)} rows written to {out}")
    return 0


def cmd_export(args) -> int:
    from .nas import ParetoArchive
    from .reports import EXPORT_FORMATS, cmd_export_pareto

    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    bad = [f for f in formats if f not in EXPORT_FORMATS]
    if bad:
        raise UsageError(f"unknown export format(s) {bad}; choose from {EXPORT_FORMATS}")
    paths = cmd_export_pareto(ParetoArchive.load(args.archive), _out_dir(args, "export_out"), formats)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--backend", default=argparse.SUPPRESS, help="preset name or backend JSON file")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="qcostnas", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("estimate", parents=[common], help="quantum training cost of a circuit file")
    s.add_argument("--circuit", required=True)
    s.add_argument("--params", type=int, default=None, help="trainable parameters (default: from the circuit)")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--on-saturation", choices=("raise", "clamp"), default="raise")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("transpile", parents=[common], help="route and decompose a circuit file")
    s.add_argument("--circuit", required=True)
    s.add_argument("--qasm", action="store_true", help="write OPENQASM instead of the native text format")
    s.set_defaults(func=cmd_transpile)

    s = sub.add_parser("calibrate-classical", parents=[common], help="measure classical FLOP throughput")
    s.add_argument("--reference", default="fixed-cnn")
    s.add_argument("--steps", type=int, default=10)
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("train-one", parents=[common], help="train and cost a single genome")
    s.add_argument("--genome", required=True, help="genome JSON object or file")
    s.add_argument("--config", help="search config supplying dataset and training settings")
    s.set_defaults(func=cmd_train_one)

    s = sub.add_parser("search", parents=[common], help="run the NSGA-II architecture search")
    s.add_argument("--config")
    s.add_argument("--mode", choices=("fixed", "variable"))
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("validate-scheduler", parents=[common], help="compare analytical gate time with ASAP makespan")
    s.add_argument("--n-circuits", type=int, default=100)
    s.add_argument("--min-qubits", type=int, default=2)
    s.add_argument("--max-qubits", type=int, default=5)
    s.add_argument("--min-depth", type=int, default=50)
    s.add_argument("--max-depth", type=int, default=600)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("ablate", parents=[common], help="decompose per-step quantum time of archived architectures")
    s.add_argument("--archive", required=True)
    s.add_argument("--scope", choices=("front", "all"), default="front")
    s.set_defaults(func=cmd_ablate_cli)

    s = sub.add_parser("export", parents=[common], help="export an archive as CSV, JSON and SVG")
    s.add_argument("--archive", required=True)
    s.add_argument("--format", default="csv,json")
    s.set_defaults(func=cmd_export)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("seed", "backend", "out"):
        if not hasattr(args, name):
            setattr(args, name, None)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except QCostNASError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
