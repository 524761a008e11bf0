import pytest

from qcostnas.nas import SearchConfig, run_search


@pytest.fixture(scope="session")
def small_archive(tmp_path_factory):
    cfg = SearchConfig(
        mode="variable", generations=3, population=4, seed=5, qubits=(2, 4), depth=(1, 3),
        samples_per_class=20, epochs=2, n_classes=2,
    )
    mp = pytest.MonkeyPatch()
    mp.delenv("QCOSTNAS_CACHE_DIR", raising=False)
    try:
        return run_search(cfg)
    finally:
        mp.undo()
