"""Known-answer vectors for Philox4x32-10 (Random123 distribution)."""

import numpy as np
import pytest

from levy_spde._philox import philox4x32, split_seed, uniform_pairs

KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


@pytest.mark.parametrize("counter,key,expected", KAT)
def test_known_answers(counter, key, expected):
    out = philox4x32([np.uint64(c) for c in counter], [np.uint64(k) for k in key])
    assert tuple(int(np.asarray(w)) for w in out) == expected


def test_split_seed_round_trip():
    s = 0x0123456789ABCDEF
    lo, hi = split_seed(np.uint64(s))
    assert int(lo) + (int(hi) << 32) == s


def test_uniforms_open_interval_and_broadcast():
    u1, u2 = uniform_pairs(np.uint64(5), np.arange(10_000, dtype=np.uint64))
    assert u1.shape == (10_000,)
    assert np.all((u1 > 0) & (u1 < 1)) and np.all((u2 > 0) & (u2 < 1))
    assert abs(u1.mean() - 0.5) < 0.02
    a, _ = uniform_pairs(np.uint64(5), np.uint64(17))
    assert float(a) == u1[17]
