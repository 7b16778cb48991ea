import numpy as np
from scipy import stats

from stable_passage.streams import as_seed, block_sizes, child_seed, map_blocks, resolve_streams


def test_same_seed_and_index_repeat():
    a = resolve_streams(42, 3).random(1000)
    b = resolve_streams(42, 3).random(1000)
    assert np.array_equal(a, b)


def test_distinct_streams_uncorrelated():
    base = resolve_streams(42, 0).random(10_000)
    for k in (1, 2, 1000):
        other = resolve_streams(42, k).random(10_000)
        assert stats.pearsonr(base, other).pvalue > 0.01
        assert not np.array_equal(base, other)
    # serial correlation within a stream
    assert stats.pearsonr(base[:-1], base[1:]).pvalue > 0.01
    assert not np.array_equal(resolve_streams(43, 0).random(10), base[:10])


def test_block_sizes():
    assert block_sizes(10, 4) == [4, 4, 2]
    assert block_sizes(8, 4) == [4, 4]
    assert block_sizes(0, 4) == []


def test_map_blocks_independent_of_workers():
    f = lambda rng, i, size: (i, rng.random(size).sum())
    one = map_blocks(f, 10_000, 7, workers=1, block=1000)
    many = map_blocks(f, 10_000, 7, workers=8, block=1000)
    assert one == many
    assert [i for i, _ in one] == list(range(10))
    tail = map_blocks(f, 4000, 7, workers=3, block=1000, first=6)
    assert tail == one[6:]


def test_seed_helpers():
    assert as_seed(5) == 5
    assert 0 <= as_seed(np.random.default_rng(1)) < 2**63
    assert child_seed(1, 0) != child_seed(1, 1)
    assert child_seed(1, 0) == child_seed(1, 0)
