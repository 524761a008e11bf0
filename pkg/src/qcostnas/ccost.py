"""Classical cost: FLOPs counting for the CNN search space and throughput-based time.

FLOPs convention: one multiply-accumulate is 2 FLOPs and biases are free.
Activations, pooling and dropout cost 1 FLOP per output element.  A
training step is taken to cost ``TRAIN_MULTIPLIER`` times the forward pass.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence, Union

from .errors import InvalidArchitecture, InvalidCalibration, InvalidInput

TRAIN_MULTIPLIER = 3
CHANNELS = (8, 16, 32, 64)
KERNELS = (3, 5, 7)
ACTIVATIONS = ("relu", "silu", "tanh")
POOLINGS = ("max", "avg")
NOMINAL_THROUGHPUT = 5e9


@dataclass(frozen=True)
class Conv:
    in_ch: int
    out_ch: int
    kernel: int
    stride: int = 1
    padding: str = "valid"
    activation: str | None = None
    pooling: str | None = None
    dropout: float = 0.0

    def __post_init__(self):
        if self.in_ch < 1 or self.out_ch < 1 or self.stride < 1 or self.kernel < 1:
            raise InvalidArchitecture(f"bad conv dimensions {self}")
        if self.padding not in ("valid", "same"):
            raise InvalidArchitecture(f"padding must be 'valid' or 'same', got {self.padding!r}")
        if self.activation is not None and self.activation not in ACTIVATIONS:
            raise InvalidArchitecture(f"unknown activation {self.activation!r}")
        if self.pooling is not None and self.pooling not in POOLINGS:
            raise InvalidArchitecture(f"unknown pooling {self.pooling!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidArchitecture("dropout rate must lie in [0, 1)")

    def conv_hw(self, h: int, w: int) -> tuple[int, int]:
        pad = self.kernel // 2 if self.padding == "same" else 0
        ho = (h + 2 * pad - self.kernel) // self.stride + 1
        wo = (w + 2 * pad - self.kernel) // self.stride + 1
        if ho < 1 or wo < 1:
            raise InvalidArchitecture(f"kernel {self.kernel} does not fit a {h}x{w} input")
        return ho, wo

    def pools(self, h: int, w: int) -> bool:
        return self.pooling is not None and h >= 2 and w >= 2


@dataclass(frozen=True)
class Linear:
    in_features: int
    out_features: int

    def __post_init__(self):
        if self.in_features < 1 or self.out_features < 1:
            raise InvalidArchitecture(f"bad linear dimensions {self}")


@dataclass(frozen=True)
class Projection(Linear):
    """Dense map from the flattened CNN output to one value per qubit."""


ClassicalLayerSpec = Union[Conv, Linear, Projection]
Shape = tuple[int, ...]


def _step(layer: ClassicalLayerSpec, shape: Shape) -> tuple[Shape, int, int]:
    """Return (output shape, forward FLOPs, parameter count) of one layer."""
    if isinstance(layer, Conv):
        if len(shape) != 3 or shape[0] != layer.in_ch:
            raise InvalidArchitecture(f"conv expects ({layer.in_ch}, H, W), got {shape}")
        ho, wo = layer.conv_hw(shape[1], shape[2])
        n_out = layer.out_ch * ho * wo
        flops = 2 * layer.kernel**2 * layer.in_ch * layer.out_ch * ho * wo
        if layer.activation is not None:
            flops += n_out
        if layer.pools(ho, wo):
            ho, wo = ho // 2, wo // 2
            n_out = layer.out_ch * ho * wo
            flops += n_out
        if layer.dropout > 0:
            flops += n_out
        params = layer.kernel**2 * layer.in_ch * layer.out_ch + layer.out_ch
        return (layer.out_ch, ho, wo), flops, params
    width = math.prod(shape)
    if width != layer.in_features:
        raise InvalidArchitecture(f"{type(layer).__name__} expects {layer.in_features} inputs, got {width}")
    return (layer.out_features,), 2 * layer.in_features * layer.out_features, (layer.in_features + 1) * layer.out_features


def _walk(stack: Sequence[ClassicalLayerSpec], input_shape: Sequence[int]) -> tuple[Shape, int, int]:
    shape = tuple(int(s) for s in input_shape)
    flops = params = 0
    for layer in stack:
        shape, f, p = _step(layer, shape)
        flops += f
        params += p
    return shape, flops, params


def output_shape(stack: Sequence[ClassicalLayerSpec], input_shape: Sequence[int]) -> Shape:
    return _walk(stack, input_shape)[0]


def count_flops(stack: Sequence[ClassicalLayerSpec], input_shape: Sequence[int]) -> int:
    """Forward-pass FLOPs for one sample."""
    return _walk(stack, input_shape)[1]


def count_params(stack: Sequence[ClassicalLayerSpec], input_shape: Sequence[int]) -> int:
    return _walk(stack, input_shape)[2]


def training_step_flops(forward_flops: float, batch_size: int = 1, multiplier: float = TRAIN_MULTIPLIER) -> float:
    return multiplier * forward_flops * batch_size


@dataclass(frozen=True)
class ClassicalCost:
    F_candidate: float
    Phi_device: float
    T_classical: float
    T_classical_total: float

    def to_dict(self) -> dict:
        return asdict(self)


def calibrate_throughput(F_reference: float, T_measured: float) -> float:
    if not (F_reference > 0 and T_measured > 0):
        raise InvalidCalibration("reference FLOPs and measured time must both be positive")
    return F_reference / T_measured


def classical_cost(F_candidate: float, Phi_device: float, N_steps: int) -> ClassicalCost:
    if not Phi_device > 0:
        raise InvalidCalibration("throughput must be positive")
    if F_candidate < 0 or N_steps < 0:
        raise InvalidInput("FLOPs and step count must be non-negative")
    per_step = F_candidate / Phi_device
    return ClassicalCost(F_candidate, Phi_device, per_step, per_step * N_steps)


def total_cost(classical: ClassicalCost, quantum) -> float:
    return classical.T_classical_total + quantum.T_quantum_total


@dataclass(frozen=True)
class Throughput:
    """Persisted result of a throughput calibration run."""

    Phi: float
    F_reference: float
    T_measured: float
    reference: str = "fixed-cnn"

    @classmethod
    def nominal(cls) -> "Throughput":
        return cls(NOMINAL_THROUGHPUT, NOMINAL_THROUGHPUT, 1.0, "nominal")

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Throughput":
        try:
            d = json.loads(Path(path).read_text())
            out = cls(float(d["Phi"]), float(d["F_reference"]), float(d["T_measured"]), str(d.get("reference", "")))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise InvalidCalibration(f"cannot read throughput file {path}: {exc}") from None
        if not out.Phi > 0:
            raise InvalidCalibration("throughput must be positive")
        return out
