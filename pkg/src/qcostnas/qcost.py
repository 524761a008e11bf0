"""Time-based cost of training a parameterized circuit on calibrated hardware.

All durations are seconds.  The pipeline per training step is:
gate time from physical counts, routing overhead from excess two-qubit
gates, failure probability from gate errors and dephasing, an effective
time that inflates by ``1 / (1 - p_fail)``, and finally two circuit
evaluations per trainable parameter.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping

from .backend import Calibration
from .circuits import GateCounts
from .errors import InvalidCalibration, InvalidInput, ReliabilitySaturated
from .transpiler import TranspiledCircuit

SATURATION_DELTA = 1e-9


@dataclass(frozen=True)
class TrainingPlan:
    n_params: int
    n_steps: int

    def __post_init__(self):
        if self.n_params < 0 or self.n_steps < 0:
            raise InvalidInput("n_params and n_steps must be non-negative")


@dataclass(frozen=True)
class QuantumCostBreakdown:
    T_gate: float
    T_routing: float
    T_logical: float
    p_gate: float
    p_decoh: float
    p_fail: float
    T_eff: float
    N_eval: int
    T_quantum: float
    T_quantum_total: float
    reliability_penalty: float
    saturated: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _typed(counts: GateCounts) -> Mapping[str, int]:
    return counts.by_gate if counts.by_gate else {}


def gate_execution_time(counts: GateCounts, calibration: Calibration) -> float:
    """Sum of per-gate durations.  Typed two-qubit counts use per-type times."""
    n_1q, n_2q, n_meas = counts
    if min(n_1q, n_2q, n_meas) < 0:
        raise InvalidInput("gate counts must be non-negative")
    typed = _typed(counts)
    if typed:
        t2 = sum(n * calibration.two_qubit_time(g) for g, n in typed.items())
    else:
        t2 = n_2q * calibration.t_2q
    return n_1q * calibration.t_1q + t2 + n_meas * calibration.t_meas


def routing_overhead_from_counts(logical: GateCounts, physical: GateCounts, calibration: Calibration) -> float:
    lt, pt = _typed(logical), _typed(physical)
    if not lt and not pt:
        return max(0, physical.n_2q - logical.n_2q) * calibration.t_2q
    names = set(lt) | set(pt)
    return sum(max(0, pt.get(g, 0) - lt.get(g, 0)) * calibration.two_qubit_time(g) for g in sorted(names))


def routing_overhead(transpiled: TranspiledCircuit, calibration: Calibration) -> float:
    return routing_overhead_from_counts(transpiled.logical_counts, transpiled.physical_counts, calibration)


def failure_probability(counts: GateCounts, calibration: Calibration, T_gate: float) -> tuple[float, float, float]:
    """Return ``(p_gate, p_decoh, p_fail)``."""
    for name in ("eps_1q", "eps_2q", "eps_meas"):
        eps = getattr(calibration, name)
        if not 0.0 <= eps < 1.0:
            raise InvalidCalibration(f"{name}={eps!r} must lie in [0, 1)")
    if not calibration.T2 > 0:
        raise InvalidCalibration("T2 must be positive")
    n_1q, n_2q, n_meas = counts
    success = (1.0 - calibration.eps_1q) ** n_1q * (1.0 - calibration.eps_2q) ** n_2q * (1.0 - calibration.eps_meas) ** n_meas
    p_gate = 1.0 - success
    p_decoh = 1.0 - math.exp(-T_gate / calibration.T2)
    p_fail = 1.0 - (1.0 - p_gate) * (1.0 - p_decoh)
    return p_gate, p_decoh, p_fail


def effective_time(T_logical: float, T_routing: float, p_fail: float, on_saturation: str = "raise") -> float:
    """Inflate the circuit time by the expected number of executions per valid sample.

    With ``on_saturation="clamp"`` a saturated ``p_fail`` is capped at
    ``1 - 1e-9`` instead of raising.
    """
    if not 0.0 <= p_fail <= 1.0:
        raise InvalidInput(f"p_fail={p_fail!r} is not a probability")
    if p_fail >= 1.0 - SATURATION_DELTA:
        if on_saturation != "clamp":
            raise ReliabilitySaturated(p_fail)
        p_fail = 1.0 - SATURATION_DELTA
    return (T_logical + T_routing) / (1.0 - p_fail)


def gradient_evaluations(n_params: int) -> int:
    if n_params < 0:
        raise InvalidInput("n_params must be non-negative")
    return 2 * int(n_params)


def breakdown_from_counts(
    logical: GateCounts,
    physical: GateCounts,
    calibration: Calibration,
    plan: TrainingPlan,
    on_saturation: str = "raise",
) -> QuantumCostBreakdown:
    T_gate = gate_execution_time(physical, calibration)
    T_routing = routing_overhead_from_counts(logical, physical, calibration)
    T_logical = T_gate - T_routing
    p_gate, p_decoh, p_fail = failure_probability(physical, calibration, T_gate)
    saturated = p_fail >= 1.0 - SATURATION_DELTA
    T_eff = effective_time(T_logical, T_routing, p_fail, on_saturation)
    N_eval = gradient_evaluations(plan.n_params)
    T_quantum = T_eff * N_eval
    return QuantumCostBreakdown(
        T_gate=T_gate,
        T_routing=T_routing,
        T_logical=T_logical,
        p_gate=p_gate,
        p_decoh=p_decoh,
        p_fail=p_fail,
        T_eff=T_eff,
        N_eval=N_eval,
        T_quantum=T_quantum,
        T_quantum_total=T_quantum * plan.n_steps,
        reliability_penalty=T_eff - (T_logical + T_routing),
        saturated=saturated,
    )


def quantum_training_cost(
    transpiled: TranspiledCircuit,
    calibration: Calibration,
    plan: TrainingPlan,
    on_saturation: str = "raise",
) -> QuantumCostBreakdown:
    return breakdown_from_counts(
        transpiled.logical_counts, transpiled.physical_counts, calibration, plan, on_saturation
    )
