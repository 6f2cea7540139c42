"""Seedable random number generation with a byte-for-byte reproducibility contract.

All randomness in this package flows through :class:`Rng`, which is backed by the
Philox4x64-10 counter-based bit generator keyed directly by the user seed. Every
distribution below is derived from the raw 64-bit output stream in a fixed,
documented way, so identical seeds give identical draw sequences on every
platform (and across numpy versions, since only the bit generator's raw output
is consumed):

* ``uniform``           -- top 53 bits of one raw word, scaled by 2**-53 -> [0, 1)
* ``integers``          -- one raw word per draw, unbiased rejection sampling
* ``rademacher``        -- sign of the top bit of one raw word -> {-1.0, +1.0}
* ``exponential``       -- inverse CDF of a ``uniform`` draw, -log1p(-u)
* ``normal``            -- Box-Muller on pairs of ``uniform`` draws
* ``choice_no_replace`` -- positions of the k smallest of n raw keys
"""

from __future__ import annotations

import numpy as np

_U64 = 1 << 64
_KEY_MASK = (1 << 128) - 1


class Rng:
    """Deterministic draws from a Philox4x64-10 stream. Single-owner: never share
    one instance between concurrent tasks."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._bg = np.random.Philox(key=self.seed & _KEY_MASK)

    def _raw(self, n: int) -> np.ndarray:
        return np.atleast_1d(self._bg.random_raw(int(n)))

    def uniform(self, shape=None) -> float | np.ndarray:
        """Uniform reals in [0, 1)."""
        n = 1 if shape is None else int(np.prod(shape))
        u = (self._raw(n) >> np.uint64(11)) * 2.0**-53
        return float(u[0]) if shape is None else u.reshape(shape)

    def integers(self, lo: int, hi: int, shape=None) -> int | np.ndarray:
        """Uniform integers in {lo, ..., hi} inclusive, bias-free via rejection."""
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        span = hi - lo + 1
        n = 1 if shape is None else int(np.prod(shape))
        out = self._raw(n)
        rem = _U64 % span
        if rem:  # reject the biased tail; probability ~ span / 2**64
            limit = np.uint64(_U64 - rem)
            bad = out >= limit
            while bad.any():
                out[bad] = self._raw(int(bad.sum()))
                bad = out >= limit
        vals = lo + (out % np.uint64(span)).astype(np.int64)
        return int(vals[0]) if shape is None else vals.reshape(shape)

    def rademacher(self, shape=None) -> float | np.ndarray:
        """Uniform draws from {-1.0, +1.0}."""
        n = 1 if shape is None else int(np.prod(shape))
        s = 2.0 * (self._raw(n) >> np.uint64(63)).astype(np.float64) - 1.0
        return float(s[0]) if shape is None else s.reshape(shape)

    def exponential(self, shape=None) -> float | np.ndarray:
        """Unit-rate exponential draws."""
        u = self.uniform(shape if shape is not None else None)
        return -np.log1p(-u) if shape is not None else float(-np.log1p(-u))

    def normal(self, shape=None) -> float | np.ndarray:
        """Standard normal draws (Box-Muller; two uniforms per pair of normals)."""
        n = 1 if shape is None else int(np.prod(shape))
        pairs = (n + 1) // 2
        u1 = 1.0 - self.uniform((pairs,))  # (0, 1], keeps log finite
        u2 = self.uniform((pairs,))
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return float(z[0]) if shape is None else z.reshape(shape)

    def choice_no_replace(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from {0, ..., n-1}: the positions of the k
        smallest of n raw 64-bit keys (one raw word per candidate)."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct values from {n}")
        if k == 0:
            return np.empty(0, dtype=np.int64)
        keys = self._raw(n)
        if k == n:
            return np.arange(n, dtype=np.int64)
        return np.argpartition(keys, k)[:k].astype(np.int64)
