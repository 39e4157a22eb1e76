"""Counter-based uniforms for reproducible per-cell sampling.

Every random number is a pure function of ``(seed, t, x, draw, tag)``,
computed with the Philox4x32-10 block cipher. Nothing is stateful, so the
order in which cells are sampled, chunking, and thread count have no effect
on the values produced.

Counter layout (four 32-bit words): ``(x, t mod 2**32, draw, tag)``.
Key: the 64-bit master seed split into low and high 32-bit words.
One block yields four 32-bit words, i.e. two 53-bit uniforms.
"""

import numpy as np

_M32 = np.uint64(0xFFFFFFFF)
_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = np.uint64(0x9E3779B9)
_PHILOX_W1 = np.uint64(0xBB67AE85)
_ROUNDS = 10

# stream tags keep unrelated consumers of the same seed apart
TAG_OFFSPRING = 0
TAG_BIRTH_DEATH = 1
TAG_AUX = 2


def _as_u32(values):
    arr = np.asarray(values)
    if arr.dtype.kind == "u":
        return arr.astype(np.uint64) & _M32
    return (arr.astype(np.int64) & 0xFFFFFFFF).astype(np.uint64)


def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32-10 on broadcastable arrays of 32-bit words.

    Words are carried in uint64 so that the 32x32 products are exact.
    Returns the four output words as uint64 arrays holding 32-bit values.
    """
    c0, c1, c2, c3 = np.broadcast_arrays(
        _as_u32(c0), _as_u32(c1), _as_u32(c2), _as_u32(c3)
    )
    c0, c1, c2, c3 = (np.array(c, dtype=np.uint64) for c in (c0, c1, c2, c3))
    k0 = np.uint64(int(k0) & 0xFFFFFFFF)
    k1 = np.uint64(int(k1) & 0xFFFFFFFF)
    for r in range(_ROUNDS):
        if r:
            k0 = (k0 + _PHILOX_W0) & _M32
            k1 = (k1 + _PHILOX_W1) & _M32
        p0 = _PHILOX_M0 * c0
        p1 = _PHILOX_M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ k0,
            p1 & _M32,
            (p0 >> np.uint64(32)) ^ c3 ^ k1,
            p0 & _M32,
        )
    return c0, c1, c2, c3


def split_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed & 0xFFFFFFFF, seed >> 32


def _to_unit(hi, lo):
    # 53-bit uniform in [0, 1)
    bits = ((hi << np.uint64(32)) | lo) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / 9007199254740992.0)


def uniforms(seed, t, x, draw=0, tag=TAG_OFFSPRING):
    """Two independent U[0,1) arrays keyed by ``(seed, t, x, draw, tag)``.

    ``t`` and ``x`` broadcast against each other; negative ``t`` is
    reduced mod 2**32.
    """
    k0, k1 = split_seed(seed)
    w0, w1, w2, w3 = philox4x32(x, t, draw, tag, k0, k1)
    return _to_unit(w0, w1), _to_unit(w2, w3)
