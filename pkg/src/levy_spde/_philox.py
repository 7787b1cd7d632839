"""Vectorised Philox4x32-10 counter-based generator.

Every output block is a pure function of ``(key, counter)``, so the uniforms
for cell ``i`` under seed ``s`` can be produced in any order, in any batch and
on any worker with bit-identical results.
"""

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)


def philox4x32(counter, key, rounds=10):
    """Apply the Philox4x32 bijection.

    Parameters
    ----------
    counter : sequence of 4 uint32-valued arrays (broadcastable)
    key : sequence of 2 uint32-valued arrays (broadcastable)

    Returns
    -------
    tuple of 4 uint64 arrays holding 32-bit words
    """
    k0, k1 = (np.asarray(k, dtype=np.uint64) & _MASK for k in key)
    words = [np.asarray(c, dtype=np.uint64) & _MASK for c in counter]
    shape = np.broadcast_shapes(*(w.shape for w in words), k0.shape, k1.shape)
    c0, c1, c2, c3 = (np.array(np.broadcast_to(w, shape)) for w in words)
    p0 = np.empty(shape, dtype=np.uint64)
    p1 = np.empty(shape, dtype=np.uint64)
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        np.multiply(c0, _M0, out=p0)
        np.multiply(c2, _M1, out=p1)
        np.bitwise_xor(c1, k0, out=c1)
        np.right_shift(p1, _SHIFT, out=c0)
        np.bitwise_xor(c0, c1, out=c0)
        np.bitwise_xor(c3, k1, out=c3)
        np.right_shift(p0, _SHIFT, out=c2)
        np.bitwise_xor(c2, c3, out=c2)
        np.bitwise_and(p1, _MASK, out=c1)
        np.bitwise_and(p0, _MASK, out=c3)
    return c0, c1, c2, c3


def split_seed(seed):
    seed = np.asarray(seed, dtype=np.uint64)
    return seed & _MASK, seed >> _SHIFT


def uniform_pairs(seed, index, stream=0):
    """Two open-interval uniforms per ``(seed, index)``.

    ``seed`` and ``index`` broadcast against each other; ``stream`` separates
    independent uses of the same (seed, index) pair.
    """
    index = np.asarray(index, dtype=np.uint64)
    k0, k1 = split_seed(seed)
    x0, x1, x2, x3 = philox4x32((index & _MASK, index >> _SHIFT, np.uint64(stream), np.uint64(0)), (k0, k1))
    u1 = ((x0 >> np.uint64(5)) * np.uint64(1 << 26) + (x1 >> np.uint64(6))).astype(np.float64)
    u2 = ((x2 >> np.uint64(5)) * np.uint64(1 << 26) + (x3 >> np.uint64(6))).astype(np.float64)
    scale = 2.0 ** -53
    return (u1 + 0.5) * scale, (u2 + 0.5) * scale
