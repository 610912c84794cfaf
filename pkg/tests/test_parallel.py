import pytest

from nvregsim.utils.parallel import ordered_map, resolve_workers


def _square(x):
    return x * x


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv("NVREGSIM_THREADS", raising=False)
    assert resolve_workers() == 1
    assert resolve_workers(0) == 1
    monkeypatch.setenv("NVREGSIM_THREADS", "3")
    assert resolve_workers() == 3
    assert resolve_workers(2) == 2


@pytest.mark.parametrize("workers", [1, 2])
def test_ordered_map_keeps_order(workers):
    assert ordered_map(_square, range(7), workers) == [0, 1, 4, 9, 16, 25, 36]


def test_ordered_map_empty():
    assert ordered_map(_square, [], 4) == []
