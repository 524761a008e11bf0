import csv
import itertools
import xml.etree.ElementTree as ET
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import grid_hypervolume
from qcostnas.backend import load_backend
from qcostnas.errors import InvalidInput, UsageError
from qcostnas.reports import (
    CSV_SCHEMA, archive_hypervolumes, cmd_ablate, cmd_export_pareto, cmd_validate_scheduler, hypervolume,
    normalized_hypervolume, reference_point,
)


def test_hypervolume_examples():
    assert hypervolume([(0.5, 0.5, 0.5, 0.5)], (1, 1, 1, 1)) == pytest.approx(0.0625)
    base = [(0.2, 0.6, 0.4, 0.1), (0.5, 0.1, 0.3, 0.6)]
    assert hypervolume(base + [(0.6, 0.7, 0.5, 0.7)], (1,) * 4) == pytest.approx(hypervolume(base, (1,) * 4))
    with pytest.raises(InvalidInput):
        hypervolume([(2, 0, 0, 0)], (1, 1, 1, 1))
    assert hypervolume([], (1, 1)) == 0.0


def test_hypervolume_axis_permutation():
    rng = np.random.default_rng(0)
    pts = rng.random((12, 4))
    ref = np.array([1.0, 1.2, 1.1, 1.3])
    v = hypervolume(pts, ref)
    for perm in itertools.permutations(range(4)):
        assert hypervolume(pts[:, perm], ref[list(perm)]) == pytest.approx(v, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(*[st.floats(0, 1)] * 4), min_size=1, max_size=7), st.sampled_from([2, 3, 4]))
def test_hypervolume_matches_grid_oracle(pts, dim):
    pts = [p[:dim] for p in pts]
    ref = (1.0,) * dim
    assert hypervolume(pts, ref) == pytest.approx(grid_hypervolume(pts, ref), rel=1e-9, abs=1e-12)


def test_normalized_hypervolume():
    pts = [(1.0, 10.0)]
    ref = reference_point(pts)
    assert list(ref) == pytest.approx([1.1, 11.0])
    assert normalized_hypervolume(pts, ref) == pytest.approx((0.1 / 1.1) ** 2)


def test_validate_scheduler_properties():
    b = load_backend("fake_linear7")
    r = cmd_validate_scheduler(b, n_circuits=15, depth=(20, 60), seed=3)
    assert all(row["T_gate"] >= row["makespan"] for row in r.rows)
    assert all(row["gap"] >= 0 for row in r.rows)
    s = r.summary()
    assert s["all_bounded"] and s["mean_gap_zero_rz"] > s["mean_gap"]
    again = cmd_validate_scheduler(b, n_circuits=15, depth=(20, 60), seed=3)
    assert again.to_csv() == r.to_csv()


def test_validate_single_qubit_is_exact():
    b = load_backend("fake_linear7")
    r = cmd_validate_scheduler(b, n_circuits=5, qubits=(1, 1), depth=(10, 30), seed=0)
    for row in r.rows:
        assert row["makespan"] == pytest.approx(row["T_gate"], rel=1e-12)


def test_ablation_rows(small_archive):
    report = cmd_ablate(small_archive, "all")
    assert len(report.rows) == len(small_archive.evaluations)
    for row in report.rows:
        total = row["T_logical"] + row["T_routing"] + row["reliability_penalty"]
        assert total == pytest.approx(row["T_eff"], rel=1e-12)
        assert min(row["T_logical"], row["T_routing"], row["reliability_penalty"]) >= 0
    keys = [(-r["T_eff"], r["digest"]) for r in report.rows]
    assert keys == sorted(keys)
    assert len(cmd_ablate(small_archive).rows) == len(small_archive.final_front)
    with pytest.raises(UsageError):
        cmd_ablate(small_archive, "some")


def test_ablation_empty_archive(small_archive):
    empty = replace(small_archive, final_front=[])
    assert cmd_ablate(empty).rows == []


def _data_lines(text: str) -> list[str]:
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_export(tmp_path, small_archive):
    paths = cmd_export_pareto(small_archive, tmp_path / "a", ("csv", "json", "svg"))
    text = (tmp_path / "a" / "generations.csv").read_text()
    assert text.startswith(CSV_SCHEMA + "\n# cost_steps: planned\n")
    rows = list(csv.DictReader(_data_lines(text)))
    assert len(rows) == sum(len(g.population) for g in small_archive.generations)
    flagged = {r["digest"] for r in rows if r["final_front"] == "1"}
    in_history = {k for g in small_archive.generations for k in g.population}
    assert flagged == set(small_archive.final_front) & in_history
    front = list(csv.DictReader(_data_lines((tmp_path / "a" / "front.csv").read_text())))
    assert {r["digest"] for r in front} == set(small_archive.final_front)
    for p in paths:
        if p.suffix == ".svg":
            assert ET.fromstring(p.read_text()).tag.endswith("svg")
    cmd_export_pareto(small_archive, tmp_path / "b", ("csv", "json"))
    for name in ("generations.csv", "front.csv", "pareto.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    with pytest.raises(UsageError):
        cmd_export_pareto(small_archive, tmp_path / "c", ("pdf",))


def test_archive_hypervolumes(small_archive):
    hv = archive_hypervolumes(small_archive)
    assert hv["final"] >= hv["generation0"] > 0
    assert len(hv["per_generation"]) == len(small_archive.generations)
