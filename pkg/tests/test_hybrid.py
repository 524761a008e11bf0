import numpy as np
import pytest
import torch

from qcostnas.ccost import Conv
from qcostnas.circuits import hybrid_circuit
from qcostnas.errors import InvalidArchitecture, InvalidInput, TrainingDiverged
from qcostnas.hybrid import (
    REFERENCE_STACK, Dataset, HybridModel, TrainConfig, count_all_parameters, make_dataset, measure_reference,
    model_snapshot, planned_steps, reference_flops, train,
)

torch.set_num_threads(1)


def test_dataset_split_and_determinism():
    ds = make_dataset(4, 100, seed=1)
    assert len(ds.y_train) == 320 and len(ds.y_val) == 80
    assert ds.x_train.shape == (320, 1, 8, 8)
    assert np.bincount(ds.y_val).tolist() == [20] * 4
    again = make_dataset(4, 100, seed=1)
    assert np.array_equal(ds.x_train, again.x_train) and np.array_equal(ds.y_val, again.y_val)
    assert not np.array_equal(ds.x_train, make_dataset(4, 100, seed=2).x_train)


def test_small_dataset_keeps_both_classes():
    for seed in range(5):
        assert set(make_dataset(2, 20, seed).y_val) == {0, 1}


def test_dataset_bounds():
    with pytest.raises(InvalidInput):
        make_dataset(1, 50)
    with pytest.raises(InvalidInput):
        make_dataset(4, 10)


def test_dataset_json_round_trip(tmp_path):
    ds = make_dataset(2, 20, 3)
    ds.save(tmp_path / "d.json")
    back = Dataset.load(tmp_path / "d.json")
    assert np.array_equal(back.x_train, ds.x_train) and back.n_classes == 2


def test_forward_shapes_and_zero_head():
    c = hybrid_circuit(4, 2, ["ry"], "cnot", "linear")
    m = HybridModel((1, 8, 8), REFERENCE_STACK, c, 4)
    x = torch.randn(5, 1, 8, 8, dtype=torch.float64)
    assert m(x).shape == (5, 4)
    with torch.no_grad():
        m.head.weight.zero_()
        m.head.bias.zero_()
    assert torch.all(m(x) == 0)
    with pytest.raises(InvalidArchitecture):
        m(torch.zeros(2, 1, 6, 6, dtype=torch.float64))


def test_end_to_end_gradient_matches_finite_differences():
    torch.manual_seed(0)
    c = hybrid_circuit(2, 2, ["ry", "rz"], "cnot", "linear")
    m = HybridModel((3,), (), c, 2)
    with torch.no_grad():
        m.weights.copy_(torch.tensor([0.3, -0.7, 1.1, 0.4], dtype=torch.float64))
    x = torch.randn(4, 3, dtype=torch.float64)
    y = torch.tensor([0, 1, 1, 0])
    loss_fn = torch.nn.CrossEntropyLoss()

    def loss():
        return loss_fn(m(x), y)

    m.zero_grad()
    loss().backward()
    eps = 1e-6
    for p in m.parameters():
        flat = p.data.view(-1)
        for i in range(flat.numel()):
            old = flat[i].item()
            flat[i] = old + eps
            up = loss().item()
            flat[i] = old - eps
            down = loss().item()
            flat[i] = old
            assert p.grad.view(-1)[i].item() == pytest.approx((up - down) / (2 * eps), abs=1e-4)


def test_parameter_counts():
    q_only = HybridModel((4,), (), hybrid_circuit(4, 3, ["ry"], "cnot", "linear"), 4)
    assert q_only.projection is None
    assert count_all_parameters(q_only) == 12 + (4 * 4 + 4) == 32
    assert count_all_parameters(HybridModel((), (), None, 0)) == 0
    for q in (2, 3):
        a = HybridModel((1, 8, 8), REFERENCE_STACK, hybrid_circuit(q, 2, ["rx"], "cz", "star"), 4)
        b = HybridModel((1, 8, 8), REFERENCE_STACK, hybrid_circuit(q, 3, ["rx"], "cz", "star"), 4)
        assert count_all_parameters(b) - count_all_parameters(a) == q
        assert count_all_parameters(a) == sum(p.numel() for p in a.parameters())


def test_single_class_dataset_is_trivially_fit():
    rng = np.random.default_rng(0)
    ds = Dataset(rng.normal(size=(40, 1, 8, 8)), np.zeros(40, np.int64), rng.normal(size=(10, 1, 8, 8)),
                 np.zeros(10, np.int64), 1)
    m = HybridModel((1, 8, 8), REFERENCE_STACK, hybrid_circuit(2, 1, ["ry"], "cnot", "linear"), 1)
    assert train(m, ds, TrainConfig(epochs=1)).accuracy == 1.0


def test_reference_model_learns_and_is_deterministic():
    from sklearn.linear_model import LogisticRegression

    ds = make_dataset(4, 100, 1)
    flat_t, flat_v = ds.x_train.reshape(len(ds.y_train), -1), ds.x_val.reshape(len(ds.y_val), -1)
    baseline = LogisticRegression(max_iter=2000).fit(flat_t, ds.y_train).score(flat_v, ds.y_val)
    assert baseline > 0.7

    def run():
        m = HybridModel((1, 8, 8), REFERENCE_STACK, hybrid_circuit(4, 2, ["ry"], "cnot", "linear"), 4)
        return train(m, ds, seed=0)

    first = run()
    assert first.accuracy > 0.8
    assert first.steps == first.planned_steps == planned_steps(320) == 100
    assert run().accuracy == first.accuracy


def test_divergence_is_reported():
    ds = make_dataset(2, 20, 0)
    ds.x_train[0, 0, 0, 0] = np.nan
    m = HybridModel((1, 8, 8), REFERENCE_STACK, hybrid_circuit(2, 1, ["ry"], "cnot", "linear"), 2)
    res = train(m, ds, TrainConfig(epochs=2, batch_size=64))
    assert res.diverged and res.accuracy == 0.0
    with pytest.raises(TrainingDiverged):
        train(m, ds, TrainConfig(epochs=2, batch_size=64), strict=True)


def test_early_stop():
    ds = make_dataset(4, 20, 0)
    m = HybridModel((1, 8, 8), REFERENCE_STACK, hybrid_circuit(2, 1, ["ry"], "cnot", "linear"), 4)
    res = train(m, ds, TrainConfig(epochs=5, lr=0.0, early_stop_accuracy=1.01))
    assert res.early_stopped and res.epochs == 2 and res.steps == 2 * 2


def test_snapshot_is_json_ready():
    import json

    m = HybridModel((1, 8, 8), (Conv(1, 8, 3, padding="same"),), hybrid_circuit(2, 1, ["ry"], "cnot", "linear"), 2)
    doc = json.loads(json.dumps(model_snapshot(m)))
    assert doc["n_classes"] == 2 and "weights" in doc["state"]


def test_measure_reference():
    t = measure_reference(n_steps=3, warmup=1)
    assert t.F_reference == reference_flops(32) and t.Phi > 0
