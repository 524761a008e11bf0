import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import quantum_cost_oracle
from qcostnas.backend import Calibration, load_backend
from qcostnas.circuits import GateCounts, build_ansatz, gate_counts, random_circuit
from qcostnas.errors import InvalidCalibration, InvalidInput, ReliabilitySaturated
from qcostnas.qcost import (
    QuantumCostBreakdown, TrainingPlan, breakdown_from_counts, effective_time, failure_probability,
    gate_execution_time, gradient_evaluations, quantum_training_cost, routing_overhead, routing_overhead_from_counts,
)
from qcostnas.transpiler import asap_schedule, transpile

CAL = Calibration(35e-9, {"ecr": 300e-9}, 1200e-9, 1e-3, 1e-2, 2e-2, 100e-6)


def test_gate_time_examples():
    assert gate_execution_time(GateCounts(0, 0, 0), CAL) == 0.0
    assert gate_execution_time(GateCounts(24, 7, 4), CAL) == pytest.approx(7740e-9, rel=1e-12)
    assert gate_execution_time(GateCounts(48, 14, 8), CAL) == pytest.approx(2 * 7740e-9, rel=1e-12)


def test_typed_and_scalar_paths_agree_for_single_gate():
    typed = GateCounts(24, 7, 4, {"ecr": 7})
    assert gate_execution_time(typed, CAL) == gate_execution_time(GateCounts(24, 7, 4), CAL)


def test_typed_durations():
    cal = Calibration(35e-9, {"ecr": 300e-9, "cz": 100e-9}, 1e-6, 0, 0, 0, 1e-4)
    assert gate_execution_time(GateCounts(0, 3, 0, {"ecr": 1, "cz": 2}), cal) == pytest.approx(500e-9)


def test_routing_examples():
    same = GateCounts(10, 5, 2, {"ecr": 5})
    assert routing_overhead_from_counts(same, same, CAL) == 0.0
    more = GateCounts(10, 8, 2, {"ecr": 8})
    assert routing_overhead_from_counts(same, more, CAL) == pytest.approx(900e-9)
    # excess is clamped at zero
    assert routing_overhead_from_counts(more, same, CAL) == 0.0


def test_routing_linear_vs_full_on_line():
    b = load_backend("fake_linear7")
    lin = transpile(build_ansatz(4, 2, ["ry"], "cnot", "linear"), b)
    full = transpile(build_ansatz(4, 2, ["ry"], "cnot", "full"), b)
    assert routing_overhead(lin, b.calibration) == 0.0
    assert routing_overhead(full, b.calibration) > 0.0


def test_failure_examples():
    noiseless = Calibration(35e-9, {"ecr": 3e-7}, 1e-6, 0.0, 0.0, 0.0, 1e-4)
    assert failure_probability(GateCounts(5, 5, 5), noiseless, 0.0) == (0.0, 0.0, 0.0)
    p_gate, _, _ = failure_probability(GateCounts(10, 5, 2), CAL, 0.0)
    assert p_gate == pytest.approx(1 - 0.999**10 * 0.99**5 * 0.98**2, rel=1e-12)
    assert p_gate == pytest.approx(0.0958, abs=5e-5)
    _, p_decoh, _ = failure_probability(GateCounts(), CAL, 10e-6)
    assert p_decoh == pytest.approx(1 - math.exp(-0.1), rel=1e-12)


def test_failure_rejects_bad_eps():
    class Fake:
        eps_1q, eps_2q, eps_meas, T2 = 1.0, 0.0, 0.0, 1e-4

    with pytest.raises(InvalidCalibration):
        failure_probability(GateCounts(1, 0, 0), Fake(), 0.0)


def test_effective_time():
    assert effective_time(5e-6, 2e-6, 0.0) == 5e-6 + 2e-6
    assert effective_time(7740e-9, 0.0, 0.145) == pytest.approx(9052.6e-9, rel=1e-5)
    # 90% success rate means about 1.11 executions per valid sample
    assert effective_time(1.0, 0.0, 0.1) == pytest.approx(1.11, abs=5e-3)
    with pytest.raises(ReliabilitySaturated):
        effective_time(1.0, 0.0, 1.0 - 1e-10)
    assert effective_time(1.0, 0.0, 1.0, on_saturation="clamp") == pytest.approx(1e9)


def test_gradient_evaluations():
    assert gradient_evaluations(0) == 0
    assert gradient_evaluations(30) == 60
    assert gradient_evaluations(build_ansatz(4, 3, ["ry"], "cnot", "linear").n_params) == 24
    with pytest.raises(InvalidInput):
        gradient_evaluations(-1)


def test_zero_params_cost_nothing():
    b = load_backend("fake_linear7")
    t = transpile(build_ansatz(6, 10, ["rx"], "cz", "full"), b)
    assert quantum_training_cost(t, b.calibration, TrainingPlan(0, 1000)).T_quantum_total == 0.0


def test_fig3_shaped_counts_match_oracle():
    # 8 logical two-qubit gates grow to 24 after routing; 4 qubits measured
    b = load_backend("fake_linear7")
    logical = GateCounts(40, 8, 4, {"ecr": 8})
    physical = GateCounts(64, 24, 4, {"ecr": 24})
    got = breakdown_from_counts(logical, physical, b.calibration, TrainingPlan(8, 100))
    cal = b.calibration
    ref = quantum_cost_oracle(
        {"n_1q": 64, "n_meas": 4, "two": {"ecr": 24}}, {"n_1q": 40, "n_meas": 4, "two": {"ecr": 8}},
        {"t_1q": cal.t_1q, "t_2q": cal.t_2q_by_gate, "t_meas": cal.t_meas, "eps_1q": cal.eps_1q,
         "eps_2q": cal.eps_2q, "eps_meas": cal.eps_meas, "T2": cal.T2}, 8, 100,
    )
    for k, v in ref.items():
        assert getattr(got, k) == pytest.approx(v, rel=1e-12, abs=0)


def test_doubling_steps_doubles_total():
    b = load_backend("fake_linear7")
    t = transpile(build_ansatz(3, 2, ["ry"], "cnot", "circular"), b)
    one = quantum_training_cost(t, b.calibration, TrainingPlan(6, 50))
    two = quantum_training_cost(t, b.calibration, TrainingPlan(6, 100))
    assert two.T_quantum_total == 2 * one.T_quantum_total


counts = st.builds(GateCounts, st.integers(0, 300), st.integers(0, 200), st.integers(0, 12))
cals = st.builds(
    lambda t1, t2, tm, e1, e2, em, T2: Calibration(t1, {"ecr": t2}, tm, e1, e2, em, T2),
    st.floats(1e-9, 1e-7), st.floats(5e-8, 1e-6), st.floats(1e-7, 5e-6),
    st.floats(0, 0.01), st.floats(0, 0.05), st.floats(0, 0.05), st.floats(1e-5, 1e-3),
)


@settings(max_examples=200, deadline=None)
@given(counts, cals, st.integers(0, 50), st.integers(0, 1000))
def test_breakdown_invariants(c, cal, n_params, n_steps):
    logical = GateCounts(c.n_1q, c.n_2q // 2, c.n_meas)
    try:
        q = breakdown_from_counts(logical, c, cal, TrainingPlan(n_params, n_steps))
    except ReliabilitySaturated:
        return
    assert q.T_logical >= 0 and q.T_routing >= 0
    assert 0 <= q.p_gate < 1 and 0 <= q.p_decoh < 1 and 0 <= q.p_fail < 1
    assert q.p_fail >= max(q.p_gate, q.p_decoh) - 1e-15
    assert q.T_eff >= q.T_gate * (1 - 1e-12) and q.reliability_penalty >= 0
    if q.N_eval:
        total = q.T_logical + q.T_routing + q.reliability_penalty
        assert q.T_quantum / q.N_eval == pytest.approx(total, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(counts, cals, st.sampled_from(["n_1q", "n_2q", "n_meas"]))
def test_p_gate_monotone_in_counts(c, cal, field):
    bigger = GateCounts(**{**{"n_1q": c.n_1q, "n_2q": c.n_2q, "n_meas": c.n_meas}, field: getattr(c, field) + 1})
    assert failure_probability(bigger, cal, 0.0)[0] >= failure_probability(c, cal, 0.0)[0]


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1e-3), st.floats(0, 1e-3), st.floats(1e-6, 1e-3), st.floats(1e-6, 1e-3))
def test_p_decoh_monotone(t_a, t_b, T2_a, T2_b):
    def cal(T2):
        return Calibration(1e-8, {"ecr": 1e-7}, 1e-6, 0, 0, 0, T2)

    lo, hi = sorted((t_a, t_b))
    assert failure_probability(GateCounts(), cal(T2_a), hi)[1] >= failure_probability(GateCounts(), cal(T2_a), lo)[1]
    s, l = sorted((T2_a, T2_b))
    assert failure_probability(GateCounts(), cal(l), t_a)[1] <= failure_probability(GateCounts(), cal(s), t_a)[1]


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 0.99), st.floats(0, 0.99))
def test_t_eff_monotone(p, r):
    lo, hi = sorted((p, r))
    assert effective_time(1e-6, 1e-7, hi) >= effective_time(1e-6, 1e-7, lo)


def test_gate_time_bounds_asap_makespan():
    b = load_backend("fake_heavyhex27")
    rng = np.random.default_rng(4)
    for _ in range(20):
        t = transpile(random_circuit(int(rng.integers(2, 6)), 40, rng), b)
        assert gate_execution_time(gate_counts(t.physical), b.calibration) >= asap_schedule(t.physical, b.calibration)


def test_breakdown_serializes():
    b = load_backend("fake_linear7")
    t = transpile(build_ansatz(2, 1, ["ry"], "cnot", "linear"), b)
    d = quantum_training_cost(t, b.calibration, TrainingPlan(2, 3)).to_dict()
    assert QuantumCostBreakdown(**d).N_eval == 4
