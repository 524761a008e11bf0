"""Hybrid CNN + variational-circuit classifiers and a synthetic 8x8 image task.

The quantum layer is simulated exactly with :mod:`qcostnas.simkernel`;
its backward pass uses the adjoint method.  All torch tensors are float64.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch import nn

from . import simkernel
from .ccost import Conv, Projection, Throughput, calibrate_throughput, count_flops, count_params, output_shape, training_step_flops
from .circuits import Circuit
from .errors import DimensionMismatch, InvalidArchitecture, InvalidInput, TrainingDiverged

IMAGE_SIZE = 8
REFERENCE_STACK = (Conv(1, 16, 3, padding="same", activation="relu", pooling="max", dropout=0.1),)
REFERENCE_QUBITS = 4

_ACT = {"relu": nn.ReLU, "silu": nn.SiLU, "tanh": nn.Tanh}
_POOL = {"max": nn.MaxPool2d, "avg": nn.AvgPool2d}


# --------------------------------------------------------------------- data


@dataclass
class Dataset:
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    n_classes: int
    seed: int | None = None

    @property
    def n_train(self) -> int:
        return len(self.y_train)

    def to_dict(self) -> dict:
        return {
            "format": "qcostnas-dataset v1",
            "n_classes": self.n_classes,
            "seed": self.seed,
            "x_train": self.x_train.tolist(),
            "y_train": self.y_train.tolist(),
            "x_val": self.x_val.tolist(),
            "y_val": self.y_val.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        return cls(
            np.asarray(d["x_train"], dtype=float),
            np.asarray(d["y_train"], dtype=np.int64),
            np.asarray(d["x_val"], dtype=float),
            np.asarray(d["y_val"], dtype=np.int64),
            int(d["n_classes"]),
            d.get("seed"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "Dataset":
        return cls.from_dict(json.loads(Path(path).read_text()))


def class_templates(n_classes: int) -> np.ndarray:
    """Fixed smooth 8x8 patterns, one per class, independent of the data seed."""
    rng = np.random.default_rng(2024)
    yy, xx = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE] / (IMAGE_SIZE - 1)
    out = np.empty((n_classes, IMAGE_SIZE, IMAGE_SIZE))
    for c in range(n_classes):
        img = np.zeros_like(xx)
        for _ in range(3):
            cx, cy = rng.uniform(0.1, 0.9, size=2)
            width = rng.uniform(0.12, 0.3)
            img += np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * width**2))
        out[c] = img / img.max()
    return out


def make_dataset(n_classes: int = 4, samples_per_class: int = 100, seed: int = 0, noise: float = 0.35) -> Dataset:
    """Class templates plus Gaussian pixel noise, split 80/20 per class."""
    if not 2 <= n_classes <= 10:
        raise InvalidInput("n_classes must lie in [2, 10]")
    if samples_per_class < 20:
        raise InvalidInput("samples_per_class must be at least 20")
    rng = np.random.default_rng(seed)
    templates = class_templates(n_classes)
    n_val = samples_per_class // 5
    parts: dict[str, list] = {"xt": [], "yt": [], "xv": [], "yv": []}
    for c in range(n_classes):
        x = templates[c] + noise * rng.standard_normal((samples_per_class, IMAGE_SIZE, IMAGE_SIZE))
        x = x[rng.permutation(samples_per_class)]
        parts["xv"].append(x[:n_val])
        parts["xt"].append(x[n_val:])
        parts["yv"].append(np.full(n_val, c))
        parts["yt"].append(np.full(samples_per_class - n_val, c))
    xt, yt = np.concatenate(parts["xt"]), np.concatenate(parts["yt"])
    xv, yv = np.concatenate(parts["xv"]), np.concatenate(parts["yv"])
    pt, pv = rng.permutation(len(yt)), rng.permutation(len(yv))
    return Dataset(xt[pt, None], yt[pt].astype(np.int64), xv[pv, None], yv[pv].astype(np.int64), n_classes, seed)


# -------------------------------------------------------------------- model


class _QuantumFunction(torch.autograd.Function):
    @staticmethod
    def forward(ctx, angles, weights, circuit):
        a = angles.detach().numpy()
        w = weights.detach().numpy()
        state = simkernel.run(circuit, w, a)
        state = np.atleast_2d(state)
        ctx.circuit = circuit
        ctx.save_for_backward(angles, weights)
        ctx.state = state
        return torch.from_numpy(simkernel.expect_z(state))

    @staticmethod
    def backward(ctx, grad_out):
        angles, weights = ctx.saved_tensors
        d_w, d_a = simkernel.adjoint_vjp(
            ctx.circuit, weights.detach().numpy(), angles.detach().numpy(), grad_out.detach().numpy(), ctx.state
        )
        return torch.from_numpy(d_a), torch.from_numpy(d_w), None


def quantum_layer(angles: torch.Tensor, weights: torch.Tensor, circuit: Circuit) -> torch.Tensor:
    """Differentiable per-qubit ``<Z>`` readout of ``circuit`` for a batch of input angles."""
    return _QuantumFunction.apply(angles, weights, circuit)


class HybridModel(nn.Module):
    """CNN -> projection -> tanh*pi angles -> circuit <Z> -> linear head.

    Every stage is optional.  Without a conv stack the input is taken as a
    flat feature vector and a projection is added only if its width differs
    from the qubit count.  ``circuit`` must carry its own angle embedding
    (``n_inputs == n_qubits``).
    """

    def __init__(
        self,
        input_shape: Sequence[int] = (1, IMAGE_SIZE, IMAGE_SIZE),
        convs: Sequence[Conv] = (),
        circuit: Circuit | None = None,
        n_classes: int = 0,
    ):
        super().__init__()
        self.input_shape = tuple(int(s) for s in input_shape)
        self.convs = tuple(convs)
        self.circuit = circuit
        self.n_classes = int(n_classes)
        if circuit is not None and circuit.n_inputs != circuit.n_qubits:
            raise InvalidArchitecture("the circuit must angle-embed one input per qubit")
        feat = output_shape(self.convs, self.input_shape) if self.convs or self.input_shape else ()
        self.feature_dim = math.prod(feat) if feat else 0
        layers: list[nn.Module] = []
        for spec in self.convs:
            pad = spec.kernel // 2 if spec.padding == "same" else 0
            layers.append(nn.Conv2d(spec.in_ch, spec.out_ch, spec.kernel, spec.stride, pad, dtype=torch.float64))
            if spec.activation:
                layers.append(_ACT[spec.activation]())
            layers.append(_PoolIfFits(spec.pooling) if spec.pooling else nn.Identity())
            if spec.dropout > 0:
                layers.append(nn.Dropout(spec.dropout))
        self.features = nn.Sequential(*layers)
        self.projection_spec: Projection | None = None
        self.projection: nn.Module | None = None
        head_in = self.feature_dim
        if circuit is not None:
            q = circuit.n_qubits
            if self.convs or self.feature_dim != q:
                if self.feature_dim < 1:
                    raise InvalidArchitecture("nothing to project onto the qubits")
                self.projection_spec = Projection(self.feature_dim, q)
                self.projection = nn.Linear(self.feature_dim, q, dtype=torch.float64)
            self.weights = nn.Parameter(torch.zeros(circuit.n_params, dtype=torch.float64))
            head_in = q
        else:
            self.register_parameter("weights", None)
        self.head = nn.Linear(head_in, self.n_classes, dtype=torch.float64) if self.n_classes and head_in else None

    @property
    def n_qubits(self) -> int:
        return 0 if self.circuit is None else self.circuit.n_qubits

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = torch.as_tensor(x, dtype=torch.float64)
        if tuple(x.shape[1:]) != self.input_shape:
            raise InvalidArchitecture(f"expected inputs of shape (B, {self.input_shape}), got {tuple(x.shape)}")
        h = self.features(x).flatten(1)
        if self.circuit is not None:
            if self.projection is not None:
                h = self.projection(h)
            h = quantum_layer(torch.tanh(h) * math.pi, self.weights, self.circuit)
        if self.head is None:
            return h
        return self.head(h)

    def classical_flops(self) -> int:
        """Forward FLOPs of the CNN feature extractor for one sample."""
        return count_flops(self.convs, self.input_shape)


class _PoolIfFits(nn.Module):
    """2x2 stride-2 pooling, skipped when the map is already smaller than 2x2."""

    def __init__(self, kind: str):
        super().__init__()
        self.pool = _POOL[kind](2, 2)

    def forward(self, x):
        if x.shape[-1] < 2 or x.shape[-2] < 2:
            return x
        return self.pool(x)


def count_all_parameters(model: HybridModel) -> int:
    """CNN + projection + circuit + head parameters, computed from the specs."""
    total = count_params(model.convs, model.input_shape) if model.convs else 0
    if model.projection_spec is not None:
        total += count_params([model.projection_spec], (model.projection_spec.in_features,))
    if model.circuit is not None:
        total += model.circuit.n_params
    if model.head is not None:
        total += (model.head.in_features + 1) * model.head.out_features
    return total


# ----------------------------------------------------------------- training


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    lr: float = 0.01
    batch_size: int = 32
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    early_stop_epoch: int = 2
    early_stop_accuracy: float = 0.2
    init_scale: float = 0.1


@dataclass
class TrainingResult:
    accuracy: float
    model: HybridModel
    steps: int
    planned_steps: int
    epochs: int
    diverged: bool = False
    early_stopped: bool = False
    history: list[float] = field(default_factory=list)


def planned_steps(n_train: int, config: TrainConfig = TrainConfig()) -> int:
    return config.epochs * math.ceil(n_train / config.batch_size)


def accuracy(model: HybridModel, x: np.ndarray, y: np.ndarray) -> float:
    if len(y) == 0:
        return 0.0
    model.eval()
    with torch.no_grad():
        scores = model(torch.from_numpy(np.asarray(x, dtype=float)))
    model.train()
    return float((scores.argmax(1).numpy() == y).mean())


def train(model: HybridModel, dataset: Dataset, config: TrainConfig = TrainConfig(), seed: int = 0, strict: bool = False) -> TrainingResult:
    """Adam on cross-entropy; returns the best validation accuracy seen.

    Quantum weights start uniform in ``[-init_scale*pi, init_scale*pi]``.
    A non-finite loss ends training with accuracy 0 (or raises
    :class:`TrainingDiverged` when ``strict``).
    """
    if model.head is None:
        raise InvalidArchitecture("training needs a classification head")
    if model.n_classes < dataset.n_classes:
        raise DimensionMismatch(f"model has {model.n_classes} outputs for {dataset.n_classes} classes")
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    for m in model.modules():
        if hasattr(m, "reset_parameters") and m is not model:
            m.reset_parameters()
    if model.weights is not None:
        with torch.no_grad():
            model.weights.copy_(torch.from_numpy(rng.uniform(-1, 1, model.weights.shape[0]) * config.init_scale * math.pi))
    opt = torch.optim.Adam(model.parameters(), lr=config.lr, betas=config.betas, eps=config.eps)
    loss_fn = nn.CrossEntropyLoss()
    x_all = torch.from_numpy(np.asarray(dataset.x_train, dtype=float))
    y_all = torch.from_numpy(np.asarray(dataset.y_train, dtype=np.int64))
    n = len(y_all)
    best, steps, history = 0.0, 0, []
    planned = planned_steps(n, config)
    model.train()
    for epoch in range(1, config.epochs + 1):
        order = torch.from_numpy(rng.permutation(n))
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            opt.zero_grad()
            loss = loss_fn(model(x_all[idx]), y_all[idx])
            if not torch.isfinite(loss):
                if strict:
                    raise TrainingDiverged(f"non-finite loss at step {steps}")
                return TrainingResult(0.0, model, steps, planned, epoch, diverged=True, history=history)
            loss.backward()
            opt.step()
            steps += 1
        acc = accuracy(model, dataset.x_val, dataset.y_val)
        history.append(acc)
        best = max(best, acc)
        if epoch == config.early_stop_epoch and acc < config.early_stop_accuracy:
            return TrainingResult(best, model, steps, planned, epoch, early_stopped=True, history=history)
    return TrainingResult(best, model, steps, planned, config.epochs, history=history)


def model_snapshot(model: HybridModel) -> dict:
    """JSON-ready description and weights of a model."""
    from .circuit_io import dumps

    return {
        "format": "qcostnas-model v1",
        "input_shape": list(model.input_shape),
        "convs": [vars(c) for c in model.convs],
        "circuit": dumps(model.circuit) if model.circuit is not None else None,
        "n_classes": model.n_classes,
        "state": {k: v.detach().tolist() for k, v in model.state_dict().items()},
    }


# ------------------------------------------------------- reference timing


def reference_model() -> HybridModel:
    """The fixed CNN with a projection and head but no quantum layer, for timing."""
    return HybridModel((1, IMAGE_SIZE, IMAGE_SIZE), REFERENCE_STACK, None, REFERENCE_QUBITS)


def reference_flops(batch_size: int = 32) -> float:
    """Training-step FLOPs of :func:`reference_model` (conv stack plus linear head)."""
    feat = math.prod(output_shape(REFERENCE_STACK, (1, IMAGE_SIZE, IMAGE_SIZE)))
    fwd = count_flops(REFERENCE_STACK, (1, IMAGE_SIZE, IMAGE_SIZE)) + 2 * feat * REFERENCE_QUBITS
    return training_step_flops(fwd, batch_size)


def measure_reference(batch_size: int = 32, n_steps: int = 10, warmup: int = 3, seed: int = 0) -> Throughput:
    """Time training steps of the reference CNN; median of ``n_steps`` after ``warmup``."""
    torch.manual_seed(seed)
    model = reference_model()
    rng = np.random.default_rng(seed)
    x = torch.from_numpy(rng.standard_normal((batch_size, 1, IMAGE_SIZE, IMAGE_SIZE)))
    y = torch.from_numpy(rng.integers(0, REFERENCE_QUBITS, batch_size))
    opt = torch.optim.Adam(model.parameters(), lr=0.01)
    loss_fn = nn.CrossEntropyLoss()
    times = []
    for i in range(warmup + n_steps):
        t0 = time.perf_counter()
        opt.zero_grad()
        loss_fn(model(x), y).backward()
        opt.step()
        if i >= warmup:
            times.append(time.perf_counter() - t0)
    t = float(np.median(times))
    f = reference_flops(batch_size)
    return Throughput(calibrate_throughput(f, t), f, t, "fixed-cnn")
