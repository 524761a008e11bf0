"""NSGA-II search over hybrid architectures with four minimized objectives.

Objectives are ``(1 - accuracy, T_quantum_total, T_classical_total, params)``.
A genome always carries the quantum genes; in ``variable`` mode it also
carries one to three convolution layers, while ``fixed`` mode uses the
reference CNN for every candidate.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .backend import load_backend
from .ccost import ACTIVATIONS, CHANNELS, KERNELS, Conv, Throughput, classical_cost, count_flops, training_step_flops
from .circuits import MAX_DEPTH, MAX_QUBITS, Topology, hybrid_circuit
from .errors import InvalidInput
from .qcost import TrainingPlan, quantum_training_cost
from .transpiler import transpile

log = logging.getLogger(__name__)

MODES = ("fixed", "variable")
ROTATION_SETS = tuple(
    tuple(c) for r in (1, 2, 3) for c in combinations(("rx", "ry", "rz"), r)
)
ENTANGLER_NAMES = ("cnot", "cz")
TOPOLOGY_NAMES = tuple(t.value for t in Topology)
MAX_CONV = 3
DROPOUT_RATE = 0.1
OBJECTIVE_NAMES = ("error", "T_quantum_total", "T_classical_total", "params_total")


# ------------------------------------------------------------------ genomes


@dataclass(frozen=True)
class ConvGene:
    out_ch: int
    kernel: int
    activation: str
    pooling: bool
    dropout: bool

    def to_spec(self, in_ch: int) -> Conv:
        return Conv(
            in_ch, self.out_ch, self.kernel, padding="same", activation=self.activation,
            pooling="max" if self.pooling else None, dropout=DROPOUT_RATE if self.dropout else 0.0,
        )


@dataclass(frozen=True)
class SearchSpace:
    qubits: tuple[int, int] = (2, MAX_QUBITS)
    depth: tuple[int, int] = (1, MAX_DEPTH)
    n_conv: tuple[int, int] = (1, MAX_CONV)

    def __post_init__(self):
        for name, (lo, hi), (blo, bhi) in (
            ("qubits", self.qubits, (2, MAX_QUBITS)),
            ("depth", self.depth, (1, MAX_DEPTH)),
            ("n_conv", self.n_conv, (1, MAX_CONV)),
        ):
            if not blo <= lo <= hi <= bhi:
                raise InvalidInput(f"{name} range {lo}..{hi} lies outside {blo}..{bhi}")


@dataclass(frozen=True)
class Genome:
    mode: str
    n_qubits: int
    depth: int
    rotations: tuple[str, ...]
    entangler: str
    topology: str
    convs: tuple[ConvGene, ...] = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInput(f"mode must be one of {MODES}")
        if self.mode == "fixed" and self.convs:
            raise InvalidInput("fixed-mode genomes carry no classical genes")
        if self.mode == "variable" and not 1 <= len(self.convs) <= MAX_CONV:
            raise InvalidInput("variable-mode genomes need 1 to 3 conv layers")

    def key(self) -> str:
        """Canonical JSON used for caching and deduplication."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.key().encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rotations"] = list(self.rotations)
        d["convs"] = [asdict(c) for c in self.convs]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Genome":
        try:
            return cls(
                d["mode"], int(d["n_qubits"]), int(d["depth"]), tuple(d["rotations"]), d["entangler"],
                d["topology"], tuple(ConvGene(**c) for c in d.get("convs", ())),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed genome: {exc}") from None

    def conv_specs(self, fixed_stack: Sequence[Conv] = ()) -> tuple[Conv, ...]:
        if self.mode == "fixed":
            return tuple(fixed_stack)
        specs, in_ch = [], 1
        for gene in self.convs:
            specs.append(gene.to_spec(in_ch))
            in_ch = gene.out_ch
        return tuple(specs)

    def label(self) -> str:
        q = f"q{self.n_qubits}d{self.depth}-{'+'.join(self.rotations)}-{self.entangler}-{self.topology}"
        if not self.convs:
            return q
        return q + "|" + ",".join(f"{c.out_ch}k{c.kernel}{c.activation[0]}{'p' if c.pooling else ''}" for c in self.convs)


def _randint(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def _choice(rng: np.random.Generator, options: Sequence):
    return options[int(rng.integers(len(options)))]


def random_conv_gene(rng: np.random.Generator) -> ConvGene:
    return ConvGene(
        _choice(rng, CHANNELS), _choice(rng, KERNELS), _choice(rng, ACTIVATIONS),
        bool(rng.integers(2)), bool(rng.integers(2)),
    )


def random_genome(mode: str, rng: np.random.Generator, space: SearchSpace = SearchSpace()) -> Genome:
    convs: tuple[ConvGene, ...] = ()
    if mode == "variable":
        convs = tuple(random_conv_gene(rng) for _ in range(_randint(rng, space.n_conv)))
    return Genome(
        mode, _randint(rng, space.qubits), _randint(rng, space.depth), _choice(rng, ROTATION_SETS),
        _choice(rng, ENTANGLER_NAMES), _choice(rng, TOPOLOGY_NAMES), convs,
    )


def crossover(a: Genome, b: Genome, rng: np.random.Generator) -> Genome:
    """Uniform crossover; conv layer ``i`` mixes field-wise when both parents have it."""
    if a.mode != b.mode:
        raise InvalidInput("cannot cross genomes from different modes")

    def pick(x, y):
        return x if rng.random() < 0.5 else y

    n_conv = pick(len(a.convs), len(b.convs))
    convs = []
    for i in range(n_conv):
        if i < len(a.convs) and i < len(b.convs):
            ga, gb = a.convs[i], b.convs[i]
            convs.append(ConvGene(*(pick(getattr(ga, f), getattr(gb, f)) for f in ConvGene.__dataclass_fields__)))
        else:
            convs.append(a.convs[i] if i < len(a.convs) else b.convs[i])
    return Genome(
        a.mode, pick(a.n_qubits, b.n_qubits), pick(a.depth, b.depth), pick(a.rotations, b.rotations),
        pick(a.entangler, b.entangler), pick(a.topology, b.topology), tuple(convs),
    )


def _step(value: int, bounds: tuple[int, int], rng: np.random.Generator) -> int:
    lo, hi = bounds
    if lo == hi:
        return lo
    delta = 1 if rng.random() < 0.5 else -1
    new = value + delta
    if new < lo or new > hi:
        new = value - delta
    return min(max(new, lo), hi)


def _step_in(value, options: Sequence, rng: np.random.Generator):
    return options[_step(options.index(value), (0, len(options) - 1), rng)]


def mutate(g: Genome, rng: np.random.Generator, p_m: float = 0.4, space: SearchSpace = SearchSpace()) -> Genome:
    """Each gene independently changes with probability ``p_m``.

    Ordinal genes step by one position (reflecting at the bounds);
    categorical genes are resampled uniformly.  Values are clamped to
    ``space`` afterwards.
    """

    def hit() -> bool:
        return rng.random() < p_m

    n_qubits = min(max(g.n_qubits, space.qubits[0]), space.qubits[1])
    depth = min(max(g.depth, space.depth[0]), space.depth[1])
    n_qubits = _step(n_qubits, space.qubits, rng) if hit() else n_qubits
    depth = _step(depth, space.depth, rng) if hit() else depth
    rotations = _choice(rng, ROTATION_SETS) if hit() else g.rotations
    entangler = _choice(rng, ENTANGLER_NAMES) if hit() else g.entangler
    topology = _choice(rng, TOPOLOGY_NAMES) if hit() else g.topology
    convs = list(g.convs)
    if g.mode == "variable":
        if hit():
            n = _step(len(convs), space.n_conv, rng)
            convs = convs[:n] + [random_conv_gene(rng) for _ in range(n - len(convs))]
        for i, c in enumerate(convs):
            convs[i] = ConvGene(
                _step_in(c.out_ch, CHANNELS, rng) if hit() else c.out_ch,
                _step_in(c.kernel, KERNELS, rng) if hit() else c.kernel,
                _choice(rng, ACTIVATIONS) if hit() else c.activation,
                bool(rng.integers(2)) if hit() else c.pooling,
                bool(rng.integers(2)) if hit() else c.dropout,
            )
    return Genome(g.mode, n_qubits, depth, rotations, entangler, topology, tuple(convs))


# ------------------------------------------------------------------ NSGA-II


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    return bool(np.all(a <= b) and np.any(a < b))


def fast_nondominated_sort(points: Sequence[Sequence[float]]) -> list[list[int]]:
    """Indices grouped into fronts, best first; each front is sorted ascending."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n == 0:
        return []
    le = np.all(pts[:, None, :] <= pts[None, :, :], axis=2)
    lt = np.any(pts[:, None, :] < pts[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    fronts: list[list[int]] = []
    current = [i for i in range(n) if count[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in np.flatnonzero(dom[i]):
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(int(j))
        current = sorted(nxt)
    return fronts


def crowding_distance(points: Sequence[Sequence[float]]) -> np.ndarray:
    """Sum over objectives of the normalized gap between sorted neighbours.

    The first and last point of every objective's ordering get infinity,
    unless that objective has zero range, in which case it contributes
    nothing to any point.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    dist = np.zeros(n)
    if n == 0:
        return dist
    for m in range(pts.shape[1]):
        order = np.argsort(pts[:, m], kind="stable")
        lo, hi = pts[order[0], m], pts[order[-1], m]
        span = hi - lo
        if span == 0:
            continue
        dist[order[0]] = dist[order[-1]] = math.inf
        for k in range(1, n - 1):
            dist[order[k]] += (pts[order[k + 1], m] - pts[order[k - 1], m]) / span
    return dist


def rank_and_crowding(points: Sequence[Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    n = len(points)
    rank = np.zeros(n, dtype=int)
    crowd = np.zeros(n)
    pts = np.asarray(points, dtype=float)
    for r, front in enumerate(fast_nondominated_sort(pts), start=1):
        rank[front] = r
        crowd[front] = crowding_distance(pts[front])
    return rank, crowd


def select_survivors(points: Sequence[Sequence[float]], size: int) -> list[int]:
    """Fill by whole fronts, then truncate the split front by descending crowding."""
    pts = np.asarray(points, dtype=float)
    chosen: list[int] = []
    for front in fast_nondominated_sort(pts):
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
            continue
        crowd = crowding_distance(pts[front])
        order = sorted(range(len(front)), key=lambda i: (-crowd[i], front[i]))
        chosen.extend(front[i] for i in order[: size - len(chosen)])
        break
    return chosen


def tournament(rank: np.ndarray, crowd: np.ndarray, rng: np.random.Generator) -> int:
    """Binary tournament with replacement on (lower rank, larger crowding)."""
    i, j = (int(v) for v in rng.integers(len(rank), size=2))
    if (rank[j], -crowd[j]) < (rank[i], -crowd[i]):
        return j
    return i


def make_offspring(
    population: Sequence[Genome],
    objectives: Sequence[Sequence[float]],
    rng: np.random.Generator,
    p_m: float = 0.4,
    space: SearchSpace = SearchSpace(),
) -> list[Genome]:
    rank, crowd = rank_and_crowding(objectives)
    out = []
    for _ in range(len(population)):
        a = population[tournament(rank, crowd, rng)]
        b = population[tournament(rank, crowd, rng)]
        out.append(mutate(crossover(a, b, rng), rng, p_m, space))
    return out


def next_generation(
    parents: Sequence[Genome],
    parent_objectives: Sequence[Sequence[float]],
    evaluate: Callable[[Sequence[Genome]], list[Sequence[float]]],
    rng: np.random.Generator,
    p_m: float = 0.4,
    space: SearchSpace = SearchSpace(),
):
    """One NSGA-II step.

    Returns ``(survivors, survivor_objectives, offspring, offspring_objectives)``;
    the population size is preserved.
    """
    offspring = make_offspring(parents, parent_objectives, rng, p_m, space)
    off_obj = [tuple(o) for o in evaluate(offspring)]
    merged = list(parents) + offspring
    merged_obj = [tuple(o) for o in parent_objectives] + off_obj
    keep = select_survivors(merged_obj, len(parents))
    return [merged[i] for i in keep], [merged_obj[i] for i in keep], offspring, off_obj


# --------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class SearchConfig:
    mode: str = "fixed"
    backend: str = "fake_linear7"
    seed: int = 0
    generations: int = 8
    population: int = 12
    p_m: float = 0.4
    qubits: tuple[int, int] = (2, MAX_QUBITS)
    depth: tuple[int, int] = (1, MAX_DEPTH)
    n_conv: tuple[int, int] = (1, MAX_CONV)
    fixed_cnn: tuple[Conv, ...] = ()
    n_classes: int = 4
    samples_per_class: int = 100
    data_seed: int = 1
    epochs: int = 10
    lr: float = 0.01
    batch_size: int = 32
    throughput: float | str | None = None
    cost_steps: str = "planned"
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInput(f"mode must be one of {MODES}")
        if self.generations < 1 or self.population < 2:
            raise InvalidInput("need at least one generation and a population of two")
        if self.cost_steps not in ("planned", "executed"):
            raise InvalidInput("cost_steps must be 'planned' or 'executed'")
        if not 0.0 <= self.p_m <= 1.0:
            raise InvalidInput("p_m must be a probability")
        if not self.fixed_cnn:
            from .hybrid import REFERENCE_STACK

            object.__setattr__(self, "fixed_cnn", REFERENCE_STACK)
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "depth", tuple(self.depth))
        object.__setattr__(self, "n_conv", tuple(self.n_conv))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fixed_cnn"] = [asdict(c) for c in self.fixed_cnn]
        for k in ("qubits", "depth", "n_conv"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "fixed_cnn" in d:
            d["fixed_cnn"] = tuple(Conv(**c) for c in d["fixed_cnn"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidInput(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "SearchConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read config {path}: {exc}") from None


@dataclass
class Evaluation:
    genome: Genome
    accuracy: float
    objectives: tuple[float, float, float, float]
    quantum: dict
    classical: dict
    transpile: dict
    params_total: int
    n_steps: int
    executed_steps: int
    saturated: bool = False
    diverged: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["genome"] = self.genome.to_dict()
        d["objectives"] = list(self.objectives)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Evaluation":
        d = dict(d)
        d["genome"] = Genome.from_dict(d["genome"])
        d["objectives"] = tuple(float(v) for v in d["objectives"])
        return cls(**d)


def _resolve_throughput(spec: float | str | None) -> Throughput:
    if spec is None:
        return Throughput.nominal()
    if isinstance(spec, (int, float)):
        return Throughput(float(spec), float(spec), 1.0, "config")
    return Throughput.load(spec)


class Evaluator:
    """Builds, trains and costs genomes; results are memoized per genome."""

    def __init__(self, config: SearchConfig, cache_dir: str | Path | None = None):
        from .hybrid import TrainConfig, make_dataset

        self.config = config
        self.backend = load_backend(config.backend)
        self.throughput = _resolve_throughput(config.throughput)
        self.dataset = make_dataset(config.n_classes, config.samples_per_class, config.data_seed)
        self.train_config = TrainConfig(epochs=config.epochs, lr=config.lr, batch_size=config.batch_size)
        self.cache: dict[str, Evaluation] = {}
        cache_dir = cache_dir if cache_dir is not None else os.environ.get("QCOSTNAS_CACHE_DIR")
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir is not None:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    def fingerprint(self) -> str:
        c = self.config.to_dict()
        relevant = {k: c[k] for k in ("backend", "fixed_cnn", "n_classes", "samples_per_class", "data_seed",
                                      "epochs", "lr", "batch_size", "cost_steps", "seed")}
        relevant["Phi"] = self.throughput.Phi
        return hashlib.sha256(json.dumps(relevant, sort_keys=True).encode()).hexdigest()[:16]

    def _disk_path(self, genome: Genome) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / f"{self.fingerprint()}-{genome.digest()}.json"

    def lookup(self, genome: Genome) -> Evaluation | None:
        key = genome.key()
        if key in self.cache:
            return self.cache[key]
        path = self._disk_path(genome)
        if path is not None and path.exists():
            ev = Evaluation.from_dict(json.loads(path.read_text()))
            self.cache[key] = ev
            return ev
        return None

    def store(self, ev: Evaluation) -> None:
        self.cache[ev.genome.key()] = ev
        path = self._disk_path(ev.genome)
        if path is not None:
            path.write_text(json.dumps(ev.to_dict(), sort_keys=True))

    def evaluate(self, genome: Genome) -> Evaluation:
        cached = self.lookup(genome)
        if cached is not None:
            return cached
        ev = self.compute(genome)
        self.store(ev)
        return ev

    def compute(self, genome: Genome) -> Evaluation:
        from .hybrid import HybridModel, count_all_parameters, planned_steps, train

        cfg = self.config
        circuit = hybrid_circuit(genome.n_qubits, genome.depth, genome.rotations, genome.entangler, genome.topology)
        convs = genome.conv_specs(cfg.fixed_cnn)
        model = HybridModel((1, 8, 8), convs, circuit, cfg.n_classes)
        params_total = count_all_parameters(model)
        transpiled = transpile(circuit, self.backend)
        planned = planned_steps(self.dataset.n_train, self.train_config)

        probe = quantum_training_cost(transpiled, self.backend.calibration, TrainingPlan(circuit.n_params, planned), "clamp")
        saturated = probe.saturated
        diverged = False
        if saturated:
            # an unusable circuit; training it would only burn time
            accuracy, executed = 0.0, 0
        else:
            result = train(model, self.dataset, self.train_config, seed=cfg.seed)
            accuracy, executed, diverged = result.accuracy, result.steps, result.diverged
        n_steps = planned if cfg.cost_steps == "planned" else executed
        q = quantum_training_cost(transpiled, self.backend.calibration, TrainingPlan(circuit.n_params, n_steps), "clamp")
        f_step = training_step_flops(count_flops(convs, (1, 8, 8)), cfg.batch_size)
        c = classical_cost(f_step, self.throughput.Phi, n_steps)
        objectives = (1.0 - accuracy, q.T_quantum_total, c.T_classical_total, float(params_total))
        return Evaluation(
            genome, accuracy, objectives, q.to_dict(), c.to_dict(), transpiled.to_dict(),
            params_total, n_steps, executed, saturated, diverged,
        )


_WORKER: Evaluator | None = None


def _init_worker(config_dict: dict) -> None:
    global _WORKER
    import torch

    torch.set_num_threads(1)
    _WORKER = Evaluator(SearchConfig.from_dict(config_dict))


def _work(genome_dict: dict) -> dict:
    assert _WORKER is not None
    return _WORKER.compute(Genome.from_dict(genome_dict)).to_dict()


# ------------------------------------------------------------------ archive


@dataclass
class GenerationRecord:
    index: int
    population: list[str]
    rank: list[int]
    crowding: list[float]
    offspring: list[str] = field(default_factory=list)


@dataclass
class ParetoArchive:
    config: SearchConfig
    evaluations: dict[str, Evaluation]
    generations: list[GenerationRecord]
    final_front: list[str]

    def evaluation(self, key: str) -> Evaluation:
        return self.evaluations[key]

    def front(self) -> list[Evaluation]:
        return [self.evaluations[k] for k in self.final_front]

    def generation_points(self, index: int) -> np.ndarray:
        return np.array([self.evaluations[k].objectives for k in self.generations[index].population])

    def to_dict(self) -> dict:
        return {
            "format": "qcostnas-archive v1",
            "config": self.config.to_dict(),
            "evaluations": {k: self.evaluations[k].to_dict() for k in sorted(self.evaluations)},
            "generations": [asdict(g) for g in self.generations],
            "final_front": list(self.final_front),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParetoArchive":
        return cls(
            SearchConfig.from_dict(d["config"]),
            {k: Evaluation.from_dict(v) for k, v in d["evaluations"].items()},
            [GenerationRecord(**g) for g in d["generations"]],
            list(d["final_front"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ParetoArchive":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise InvalidInput(f"cannot read archive {path}: {exc}") from None


def nondominated_keys(evaluations: dict[str, Evaluation]) -> list[str]:
    keys = sorted(evaluations)
    if not keys:
        return []
    pts = [evaluations[k].objectives for k in keys]
    return [keys[i] for i in fast_nondominated_sort(pts)[0]]


def run_search(config: SearchConfig, progress: Callable[[str], None] | None = None) -> ParetoArchive:
    """Generation-synchronous NSGA-II; evaluations may run in a process pool."""
    evaluator = Evaluator(config)  # loads the backend first, so a bad name fails fast
    n_max = evaluator.backend.n_qubits
    space = SearchSpace(
        (min(config.qubits[0], n_max), min(config.qubits[1], n_max)), config.depth, config.n_conv
    )
    rng = np.random.default_rng(config.seed)
    pool = None
    if config.workers > 1:
        pool = ProcessPoolExecutor(config.workers, initializer=_init_worker, initargs=(config.to_dict(),))

    def evaluate(genomes: Sequence[Genome]) -> list[tuple]:
        todo = {}
        for g in genomes:
            if evaluator.lookup(g) is None:
                todo.setdefault(g.key(), g)
        if pool is not None and len(todo) > 1:
            for ev_dict in pool.map(_work, [g.to_dict() for g in todo.values()]):
                evaluator.store(Evaluation.from_dict(ev_dict))
        else:
            for g in todo.values():
                evaluator.store(evaluator.compute(g))
        return [evaluator.evaluate(g).objectives for g in genomes]

    try:
        population = [random_genome(config.mode, rng, space) for _ in range(config.population)]
        objectives = evaluate(population)
        records = []

        def record(index: int, pop, objs, offspring=()):
            rank, crowd = rank_and_crowding(objs)
            records.append(GenerationRecord(
                index, [g.digest() for g in pop], [int(r) for r in rank], [float(c) for c in crowd],
                [g.digest() for g in offspring],
            ))
            if progress:
                progress(f"generation {index}: {len(evaluator.cache)} genomes evaluated")

        record(0, population, objectives)
        for gen in range(1, config.generations):
            population, objectives, offspring, _ = next_generation(
                population, objectives, evaluate, rng, config.p_m, space
            )
            record(gen, population, objectives, offspring)
    finally:
        if pool is not None:
            pool.shutdown()
    evaluations = {ev.genome.digest(): ev for ev in evaluator.cache.values()}
    evaluations = {k: evaluations[k] for k in sorted(evaluations)}
    return ParetoArchive(config, evaluations, records, nondominated_keys(evaluations))
