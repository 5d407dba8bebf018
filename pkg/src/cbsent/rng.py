"""Portable seeded PRNG: splitmix64 seeding a xoshiro256** stream.

Every random decision in the package (annotation shuffles, stratified
splits, bootstrap draws, per-node feature subsets) goes through this
generator so results do not depend on the numpy or CPython version.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state. Returns ``(new_state, output)``."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def mix(seed: int, stream: int) -> int:
    """Derive an independent 64-bit seed for sub-stream ``stream`` of ``seed``.

    Used to give each tree of a forest its own generator, so trees can be
    grown in any order (or in parallel) with identical results.
    """
    _, a = splitmix64(seed & MASK64)
    _, b = splitmix64((a ^ (stream & MASK64)) & MASK64)
    return b


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** generator with helpers for bounded draws and shuffles."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        state = seed & MASK64
        s = []
        for _ in range(4):
            state, out = splitmix64(state)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` (Lemire multiply-shift with rejection)."""
        if n <= 0:
            raise ValueError("bound must be positive")
        m = self.next_u64() * n
        low = m & MASK64
        if low < n:
            threshold = (MASK64 + 1 - n) % n
            while low < threshold:
                m = self.next_u64() * n
                low = m & MASK64
        return m >> 64

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle (descending swap index)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, n: int, k: int) -> list[int]:
        """``k`` distinct integers from ``range(n)`` via partial Fisher-Yates.

        Only touched positions are materialized, so this is O(k) even for
        very wide feature spaces.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} of {n}")
        swapped: dict[int, int] = {}
        out = []
        for i in range(k):
            j = i + self.below(n - i)
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            swapped[j] = vi
            out.append(vj)
        return out


# ---------------------------------------------------------------------------
# Compiled twin of the generator, operating on a uint64[4] state array.
# Must produce exactly the same stream as Xoshiro256 (checked in tests).

_U32 = np.uint64(0xFFFFFFFF)


def state_array(rng: Xoshiro256) -> np.ndarray:
    """Copy of ``rng``'s state as the ``uint64[4]`` used by compiled code."""
    return np.array(rng._s, dtype=np.uint64)


@njit(cache=True)
def _rotl_u64(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def next_u64(s):
    result = _rotl_u64(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl_u64(s[3], 45)
    return result


@njit(cache=True)
def _mul_u64(a, b):
    """Full 128-bit product of two uint64 values as ``(high, low)``."""
    a_lo, a_hi = a & _U32, a >> np.uint64(32)
    b_lo, b_hi = b & _U32, b >> np.uint64(32)
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> np.uint64(32)) + (lh & _U32) + (hl & _U32)
    low = (ll & _U32) | ((mid & _U32) << np.uint64(32))
    high = hh + (lh >> np.uint64(32)) + (hl >> np.uint64(32)) + (mid >> np.uint64(32))
    return high, low


@njit(cache=True)
def below_u64(s, n):
    """Uniform integer in ``[0, n)``; same algorithm as ``Xoshiro256.below``."""
    bound = np.uint64(n)
    high, low = _mul_u64(next_u64(s), bound)
    if low < bound:
        threshold = (np.uint64(0) - bound) % bound
        while low < threshold:
            high, low = _mul_u64(next_u64(s), bound)
    return np.int64(high)
