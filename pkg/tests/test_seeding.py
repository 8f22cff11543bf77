import numpy as np
import pytest
from numpy.testing import assert_array_equal

from augarch.seeding import SeedSpec, as_seed, resolve_workers, run_blocks


def _draw(gen, size):
    return gen.standard_normal(size)


def test_streams_are_addressed_by_purpose_and_replicate():
    a = SeedSpec(1, 0, "x").generator().random(4)
    assert_array_equal(a, SeedSpec(1, 0, "x").generator().random(4))
    assert not np.array_equal(a, SeedSpec(1, 1, "x").generator().random(4))
    assert not np.array_equal(a, SeedSpec(1, 0, "y").generator().random(4))
    assert not np.array_equal(a, SeedSpec(2, 0, "x").generator().random(4))


def test_child_purpose_is_hierarchical():
    s = SeedSpec(5, 0, "run").child("cdf")
    assert s.purpose == "run/cdf" and s.replicate == 0


def test_seed_range():
    SeedSpec((1 << 64) - 1)
    with pytest.raises(ValueError):
        SeedSpec(1 << 64)
    with pytest.raises(ValueError):
        SeedSpec(-1)


def test_blocks_independent_of_worker_count():
    seed = as_seed(11, "test")
    one = np.concatenate(run_blocks(_draw, 1000, seed, 300, workers=1))
    two = np.concatenate(run_blocks(_draw, 1000, seed, 300, workers=2))
    assert_array_equal(one, two)
    assert one.size == 1000


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("AUGARCH_WORKERS", "3")
    assert resolve_workers() == 3
    assert resolve_workers(1) == 1
