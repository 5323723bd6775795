"""Ring geometry: keys, circular distance and the harmonic shortcut sampler.

Keys are plain integers in ``[0, m)``. Every shortcut in the overlay is drawn
from the harmonic law ``P(k') ∝ 1 / ring_distance(k, k')`` which this module
samples exactly by inverse CDF over the ``floor(m/2)`` possible distances.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "InvalidRingError",
    "RingParams",
    "ring_distance",
    "rank_distance",
    "harmonic_normalizer",
    "HarmonicSampler",
    "sample_shortcut_target",
]


class InvalidRingError(ValueError):
    """Raised for ring parameters that cannot host a network."""


@dataclass(frozen=True)
class RingParams:
    """Size of the key ring ``m`` and the live node count ``n``."""

    m: int
    n: int = 2

    def __post_init__(self):
        if self.m < 2:
            raise InvalidRingError(f"ring needs at least 2 positions, got m={self.m}")
        if not 2 <= self.n <= self.m:
            raise InvalidRingError(f"need 2 <= n <= m, got n={self.n}, m={self.m}")

    def validate_key(self, k: int) -> int:
        if not 0 <= k < self.m:
            raise KeyError(f"key {k} outside ring [0, {self.m})")
        return int(k)


def ring_distance(a, b, m: int):
    """Circular distance ``min(|a-b|, m-|a-b|)``; works elementwise on arrays."""
    off = np.mod(np.subtract(a, b), m)
    d = np.minimum(off, m - off)
    if np.ndim(d) == 0:
        return int(d)
    return d


def rank_distance(k, t, m: int):
    """Tie-broken distance used for greedy progress.

    Equals ``2 * ring_distance(k, t)`` minus one when ``k`` sits clockwise of
    ``t``, so two distinct keys never share a rank and the clockwise key wins a
    tie. Zero iff ``k == t``.
    """
    if type(k) is int and type(t) is int:
        off = (k - t) % m
        if off == 0:
            return 0
        return 2 * off - 1 if off <= m - off else 2 * (m - off)
    off = np.mod(np.subtract(k, t), m)
    d = np.minimum(off, m - off)
    r = 2 * d - ((off == d) & (off > 0))
    if np.ndim(r) == 0:
        return int(r)
    return r


def _multiplicity(m: int) -> np.ndarray:
    """Number of keys at each distance ``1..floor(m/2)`` from a fixed key."""
    half = m // 2
    mult = np.full(half, 2, dtype=np.int64)
    if m % 2 == 0:
        mult[-1] = 1
    return mult


def harmonic_normalizer(m: int) -> float:
    """Sum of ``1/ring_distance(0, k)`` over the ``m - 1`` nonzero keys."""
    if m < 2:
        raise InvalidRingError(f"ring needs at least 2 positions, got m={m}")
    d = np.arange(1, m // 2 + 1, dtype=np.float64)
    return float(np.sum(_multiplicity(m) / d))


class HarmonicSampler:
    """Exact sampler of shortcut targets with ``P(k') ∝ 1/ring_distance(k, k')``.

    The cumulative weight table is built once per ring size; each draw picks a
    distance by binary search and then a side uniformly when two keys share
    that distance.

    Parameters
    ----------
    m : int
        Number of ring positions.
    """

    def __init__(self, m: int):
        if m < 2:
            raise InvalidRingError(f"ring needs at least 2 positions, got m={m}")
        self.m = int(m)
        self.distances = np.arange(1, m // 2 + 1, dtype=np.int64)
        self.multiplicity = _multiplicity(m)
        weights = self.multiplicity / self.distances.astype(np.float64)
        self.z = float(weights.sum())
        cdf = np.cumsum(weights) / self.z
        cdf[-1] = 1.0
        self._cdf = cdf

    @cached_property
    def distance_pmf(self) -> np.ndarray:
        """``P(ring_distance = d)`` for ``d = 1..floor(m/2)``."""
        return self.multiplicity / self.distances / self.z

    def key_pmf(self, k: int = 0) -> np.ndarray:
        """Probability of each key ``0..m-1`` being drawn from ``k``."""
        offs = np.arange(self.m)
        d = np.minimum(offs, self.m - offs)
        p = np.zeros(self.m)
        p[1:] = 1.0 / d[1:] / self.z
        return np.roll(p, k)

    def sample_distance(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="right")
        idx = np.minimum(idx, len(self._cdf) - 1)
        return self.distances[idx] if size is not None else int(self.distances[idx])

    def sample(self, k, rng: np.random.Generator, size=None):
        """Draw target key(s) for source key(s) ``k``.

        With ``size=None`` and scalar ``k`` a Python int is returned; otherwise
        an array broadcast against ``k``.
        """
        if size is None and np.ndim(k) > 0:
            size = np.shape(k)
        d = self.sample_distance(rng, size)
        # side draw is consumed for every sample so streams stay aligned
        side = rng.random(size) < 0.5
        sign = np.where(side, 1, -1)
        target = np.mod(np.asarray(k) + sign * d, self.m)
        if size is None:
            return int(target)
        return target.astype(np.int64)


_SAMPLERS: dict[int, HarmonicSampler] = {}


def sampler_for(m: int) -> HarmonicSampler:
    """Shared, read-only sampler for ring size ``m``."""
    s = _SAMPLERS.get(m)
    if s is None:
        s = _SAMPLERS[m] = HarmonicSampler(m)
    return s


def sample_shortcut_target(k: int, m: int, rng: np.random.Generator) -> int:
    return sampler_for(m).sample(k, rng)
