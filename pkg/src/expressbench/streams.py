"""Keyed counter-based random substreams.

Every random draw in the toolkit comes from a Philox generator whose 128-bit
key is derived from ``(master_seed, stream, component, point)`` and whose
counter starts at the sample index. ``point`` is the grid coordinate
``(n, L or chi)``, so different grid points never share draws while MPS and
CMPS at equal ``(n, chi)`` do. Sample ``i`` is therefore a pure function of its
coordinates: sharding work across any number of workers, or evaluating
indices out of order, reproduces the same bits.
"""

from functools import lru_cache

import numpy as np

# stable numeric tags; never renumber, outputs depend on them
STREAMS = {"sample": 1, "pair-a": 2, "pair-b": 3, "reference": 4}
COMPONENTS = {
    "fqnn": 1,
    "haar": 2,
    "mps": 3,  # shared by MPS and CMPS, so CMPS sample i wraps MPS sample i
    "cmps-clifford": 4,
    "stabilizer-clifford": 5,
}

_U64 = (1 << 64) - 1


@lru_cache(maxsize=4096)
def _key(master_seed: int, stream: str, component: str, point: tuple) -> tuple:
    ss = np.random.SeedSequence(
        entropy=int(master_seed) & _U64, spawn_key=(STREAMS[stream], COMPONENTS[component]) + point
    )
    return tuple(int(v) for v in ss.generate_state(2, np.uint64))


def substream(
    master_seed: int, component: str, index: int, stream: str = "sample", point: tuple = ()
) -> np.random.Generator:
    """Generator for one (component, sample index) in a named stream."""
    if index < 0:
        raise ValueError("sample index must be non-negative")
    key = np.array(_key(master_seed, stream, component, tuple(int(v) for v in point)), dtype=np.uint64)
    # index in the third counter word leaves 2**128 blocks per sample
    counter = np.array([0, 0, int(index), 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
