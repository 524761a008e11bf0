"""Hardware-calibrated time costs for hybrid quantum-classical networks, and an NSGA-II search that uses them."""

from .backend import BackendModel, Calibration, CouplingMap, load_backend
from .ccost import ClassicalCost, Conv, Linear, Projection, calibrate_throughput, classical_cost, count_flops, total_cost
from .circuits import Angle, Circuit, Gate, GateCounts, GateKind, Topology, build_ansatz, gate_counts, hybrid_circuit
from .errors import QCostNASError, ReliabilitySaturated
from .qcost import QuantumCostBreakdown, TrainingPlan, quantum_training_cost
from .transpiler import TranspiledCircuit, asap_schedule, transpile

__version__ = "0.1.0"

__all__ = [
    "Angle", "BackendModel", "Calibration", "Circuit", "ClassicalCost", "Conv", "CouplingMap", "Gate",
    "GateCounts", "GateKind", "Linear", "Projection", "QCostNASError", "QuantumCostBreakdown",
    "ReliabilitySaturated", "Topology", "TrainingPlan", "TranspiledCircuit", "asap_schedule", "build_ansatz",
    "calibrate_throughput", "classical_cost", "count_flops", "gate_counts", "hybrid_circuit", "load_backend",
    "quantum_training_cost", "total_cost", "transpile",
]
