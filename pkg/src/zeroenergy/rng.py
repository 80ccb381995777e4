"""Counter-based Philox4x32-10 streams for reproducible per-path sampling.

A stream is identified by (key = 64-bit seed, path index); its i-th block
is Philox applied to the counter (path_lo, path_hi, i_lo, i_hi).  Streams
are small uint64 state arrays so numba kernels can carry one per path.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

__all__ = ["philox4x32", "new_stream", "reset_stream", "uniform", "normal", "exponential",
           "uniforms_for_path"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_ONE = np.uint64(1)
_S5 = np.uint64(5)
_S6 = np.uint64(6)
_S26 = np.uint64(26)

# state layout: key0, key1, path_lo, path_hi, next block, buffer position,
# then BUF_BLOCKS * 2 buffered 53-bit words.  Refilling a whole buffer at
# once lets the independent Philox evaluations overlap in the pipeline.
BUF_BLOCKS = 32
_HEAD = 6
STATE_SIZE = _HEAD + 2 * BUF_BLOCKS


@njit(cache=True, nogil=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32 with 10 rounds; all arguments and outputs are uint64 < 2^32."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@njit(cache=True, nogil=True)
def new_stream(seed, path):
    st = np.zeros(STATE_SIZE, dtype=np.uint64)
    reset_stream(st, seed, path)
    return st


@njit(cache=True, nogil=True)
def reset_stream(st, seed, path):
    """Point an existing state array at the start of stream (seed, path)."""
    s = np.uint64(seed)
    p = np.uint64(path)
    st[0] = s & _MASK
    st[1] = s >> _S32
    st[2] = p & _MASK
    st[3] = p >> _S32
    st[4] = 0
    st[5] = 2 * BUF_BLOCKS


@njit(cache=True, nogil=True)
def _refill(st):
    ctr = st[4]
    for j in range(BUF_BLOCKS):
        c = ctr + np.uint64(j)
        r0, r1, r2, r3 = philox4x32(st[2], st[3], c & _MASK, c >> _S32, st[0], st[1])
        st[_HEAD + 2 * j] = ((r0 >> _S5) << _S26) | (r1 >> _S6)
        st[_HEAD + 2 * j + 1] = ((r2 >> _S5) << _S26) | (r3 >> _S6)
    st[4] = ctr + np.uint64(BUF_BLOCKS)
    st[5] = 0


@njit(cache=True, nogil=True, inline="always")
def uniform(st):
    """Next uniform in (0, 1): block i of the stream yields uniforms 2i, 2i+1."""
    j = st[5]
    if j >= np.uint64(2 * BUF_BLOCKS):
        _refill(st)
        j = st[5]
    st[5] = j + _ONE
    # 53 random bits mapped to the open interval (0, 1)
    return (np.int64(st[_HEAD + j]) + 0.5) * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True, inline="always")
def normal(st):
    # Box-Muller, one variate per call (keeps the stream layout simple)
    u1 = uniform(st)
    u2 = uniform(st)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@njit(cache=True, nogil=True, inline="always")
def exponential(st):
    return -math.log(uniform(st))


@njit(cache=True, nogil=True)
def _fill(seed, path, n):
    st = new_stream(seed, path)
    out = np.empty(n)
    for i in range(n):
        out[i] = uniform(st)
    return out


def uniforms_for_path(seed: int, path: int, n: int) -> np.ndarray:
    """First n uniforms of a path stream (diagnostics and tests)."""
    return _fill(np.uint64(seed), np.uint64(path), n)
