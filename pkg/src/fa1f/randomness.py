"""Keyed, shiftable randomness for the graphical construction.

Every trajectory is driven by a collection of per-site clock rings and
coin flips.  Site ``x`` rings at the times ``ring_time(x, 1) <
ring_time(x, 2) < ...`` (unit-rate Poisson, i.e. Exp(1) increments) and
the n-th ring carries the Bernoulli(p) coin ``coin(x, n)``.

Instead of stateful streams, each variate is a pure function of the key
``(seed, collection_id, site + shift_offset, n, channel)``.  This makes
space shifts exact, lets any worker evaluate any variate without
coordination, and makes trajectories independent of processing order.
Uniforms come from a 64-bit avalanche mixer (splitmix64 finalizer);
exponentials use the inverse CDF of the resulting 53-bit uniform, coins
threshold a uniform from a separate channel.  Not cryptographic.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from ._engine import (CHANNEL_COIN, CHANNEL_EXP, GOLDEN, INDEX_SALT, MASK64,
                      MIX_A, MIX_B, SITE_SALT, TINY, U53,
                      _exp_from_uniform_arr)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer (reference path)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def _mix64_np(z):
    """Vectorized splitmix64 finalizer on a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX_A)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX_B)
    z ^= z >> np.uint64(31)
    return z


def stream_key(seed: int, collection_id: int, channel: int) -> int:
    """Collapse (seed, collection id, channel) into one mixed 64-bit key."""
    h = mix64(seed)
    h = mix64(h ^ ((collection_id * GOLDEN) & MASK64))
    return mix64(h ^ channel)


def keyed_uniform(key: int, site: int, n: int) -> float:
    """53-bit uniform in [0, 1), a pure function of (key, site, n)."""
    z = mix64(key ^ ((site * SITE_SALT) & MASK64))
    z = mix64(z ^ ((n * INDEX_SALT) & MASK64))
    return (z >> 11) * U53


def _keyed_uniform_np(key: int, sites, ns):
    sites = np.asarray(sites, dtype=np.int64).astype(np.uint64)
    ns = np.asarray(ns, dtype=np.int64).astype(np.uint64)
    z = _mix64_np(np.uint64(key) ^ (sites * np.uint64(SITE_SALT)))
    z = _mix64_np(z ^ (ns * np.uint64(INDEX_SALT)))
    return (z >> np.uint64(11)).astype(np.float64) * U53


def exp_from_uniform(u):
    """Inverse-CDF Exp(1) variates, clamped away from exactly zero.

    Routed through the compiled kernel path so array and event-loop
    results are bit-identical (numpy's vectorized log1p can differ from
    libm in the last bit).
    """
    arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.empty_like(arr)
    _exp_from_uniform_arr(arr, out)
    return out if np.ndim(u) else float(out[0])


@dataclass(frozen=True)
class ClockCollection:
    """One realization of the per-site ring/coin randomness.

    ``collection_id`` distinguishes independent copies; ``shift_offset``
    implements the space shift (a collection shifted by y answers site-x
    queries from site x + y of the unshifted one).
    """

    seed: int
    collection_id: int = 0
    p: float = 0.5
    shift_offset: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"coin probability must lie in [0, 1], got {self.p}")

    @property
    def exp_key(self) -> int:
        return stream_key(self.seed, self.collection_id, CHANNEL_EXP)

    @property
    def coin_key(self) -> int:
        return stream_key(self.seed, self.collection_id, CHANNEL_COIN)

    def shifted(self, y: int) -> "ClockCollection":
        return replace(self, shift_offset=self.shift_offset + y)

    def ring_increment(self, site: int, n: int) -> float:
        """Waiting time between the (n-1)-th and n-th ring at ``site``."""
        if n < 1:
            raise ValueError("ring index starts at 1")
        u = keyed_uniform(self.exp_key, site + self.shift_offset, n)
        e = -math.log1p(-u)
        return e if e > TINY else TINY

    def ring_increments(self, site: int, n_max: int) -> np.ndarray:
        ns = np.arange(1, n_max + 1, dtype=np.int64)
        sites = np.full(n_max, site + self.shift_offset, dtype=np.int64)
        return exp_from_uniform(_keyed_uniform_np(self.exp_key, sites, ns))

    def ring_time(self, site: int, n: int) -> float:
        """Time of the n-th clock ring at ``site`` (partial sum of increments)."""
        return float(self.ring_times(site, n)[-1])

    def ring_times(self, site: int, n_max: int) -> np.ndarray:
        return np.add.accumulate(self.ring_increments(site, n_max))

    def coin(self, site: int, n: int) -> int:
        """Bernoulli(p) mark attached to the n-th ring at ``site``."""
        if n < 1:
            raise ValueError("ring index starts at 1")
        u = keyed_uniform(self.coin_key, site + self.shift_offset, n)
        return 1 if u < self.p else 0

    def coins(self, site: int, n_max: int) -> np.ndarray:
        ns = np.arange(1, n_max + 1, dtype=np.int64)
        sites = np.full(n_max, site + self.shift_offset, dtype=np.int64)
        u = _keyed_uniform_np(self.coin_key, sites, ns)
        return (u < self.p).astype(np.uint8)

    def first_ring_uniforms(self, sites) -> np.ndarray:
        """Vectorized uniforms for ring n=1 across many sites (test helper)."""
        sites = np.asarray(sites, dtype=np.int64) + self.shift_offset
        return _keyed_uniform_np(self.exp_key, sites, np.ones(len(sites), dtype=np.int64))
