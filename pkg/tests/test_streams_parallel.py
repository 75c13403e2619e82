import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from expressbench.parallel import chunks, ordered_map
from expressbench.streams import substream


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**9))
def test_substream_is_pure(seed, index):
    a = substream(seed, "haar", index).random(4)
    b = substream(seed, "haar", index).random(4)
    assert np.array_equal(a, b)


def test_substreams_are_distinct():
    draws = {
        substream(1, "mps", 0).random(),
        substream(1, "mps", 1).random(),
        substream(2, "mps", 0).random(),
        substream(1, "fqnn", 0).random(),
        substream(1, "mps", 0, "pair-a").random(),
        substream(1, "mps", 0, point=(4, 2)).random(),
    }
    assert len(draws) == 6


def test_long_draws_do_not_reach_next_index():
    a = substream(3, "haar", 0).random(10_000)
    b = substream(3, "haar", 1).random(10)
    assert not np.isin(b, a).any()


@given(st.integers(0, 2000), st.integers(1, 300))
def test_chunks_cover_range(total, size):
    parts = chunks(total, size)
    assert [i for r in parts for i in r] == list(range(total))


def test_ordered_map_independent_of_workers():
    def work(r):
        return [substream(9, "haar", i).random() for i in r]

    one = ordered_map(work, 1000, workers=1, chunk_size=37)
    many = ordered_map(work, 1000, workers=4, chunk_size=37)
    assert one == many
