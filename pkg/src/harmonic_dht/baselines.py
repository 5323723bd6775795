"""Comparison schemes: the uniform-shortcut ring and commuting offset caches.

The uniform-shortcut ring stands in for Freenet's emergent topology: ``C``
neighbours on each side plus ``C'`` uniformly random shortcuts. Offset schemes
give every node the same cache ``{k + c_1, ..., k + c_d}`` (Chord is the
power-of-two case); :func:`reach_set_size` counts how far such a cache can
reach in a bounded number of steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnknownKeyError
from .overlay import EMPTY, Overlay
from .routing import QueryTrace, _step_path

__all__ = [
    "OverconstrainedError",
    "UniformRingConfig",
    "OffsetScheme",
    "ReachBoundParams",
    "build_uniform_ring",
    "bounded_greedy_search",
    "freenet_bound",
    "monte_carlo_success",
    "reach_profile",
    "reach_set_size",
    "reach_bound_check",
    "chord_offsets",
]


class OverconstrainedError(ValueError):
    pass


@dataclass(frozen=True)
class UniformRingConfig:
    """Ring of ``n`` nodes with ``c_local`` neighbours per side and ``c_short``
    uniform shortcuts; ``m_exp`` is the polylog exponent of the search budget."""

    n: int
    c_local: int
    c_short: int
    m_exp: int = 1

    def __post_init__(self):
        if self.c_local < 0 or self.c_short < 0:
            raise ValueError("link counts must be non-negative")
        if self.c_local < 1 and self.c_short < 1:
            raise ValueError("need at least one local link or one shortcut")
        if self.m_exp < 1:
            raise ValueError("m_exp must be >= 1")

    @property
    def polylog(self) -> float:
        """``ln(n) ** m_exp``."""
        return math.log(self.n) ** self.m_exp

    @property
    def epsilon(self) -> float:
        return (self.c_local + self.c_short) / (2.0 * math.sqrt(self.n / self.polylog))

    @classmethod
    def from_epsilon(cls, n: int, epsilon: float, m_exp: int = 1) -> "UniformRingConfig":
        """Equal local and shortcut counts giving (approximately) ``epsilon``."""
        c = max(1, round(epsilon * math.sqrt(n / math.log(n) ** m_exp)))
        return cls(n, c, c, m_exp)


@dataclass(frozen=True)
class OffsetScheme:
    offsets: tuple[int, ...]
    modulus: int
    signed: bool = True

    def __post_init__(self):
        red = [c % self.modulus for c in self.offsets]
        if any(r == 0 for r in red):
            raise ValueError("offsets must be nonzero modulo the modulus")
        if len(set(red)) != len(red):
            raise ValueError("offsets must be distinct modulo the modulus")

    @property
    def d(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class ReachBoundParams:
    m_exp: int = 1
    alpha: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")


def build_uniform_ring(cfg: UniformRingConfig, rng: np.random.Generator) -> Overlay:
    """Fully occupied ring; shortcut slots hold the extra locals then the
    uniform shortcuts (drawn independently, never the node itself)."""
    n, C, Cs = cfg.n, cfg.c_local, cfg.c_short
    if n < 2 * C + 1 or C + Cs > n - 1 or n < 2:
        raise OverconstrainedError(f"degree {2 * C + Cs} does not fit a ring of {n}")
    extra = 2 * max(C - 1, 0)
    o = Overlay(n, extra + Cs)
    keys = np.arange(n, dtype=np.int64)
    o.live[:] = True
    o._keys = keys.tolist()
    if C >= 1:
        o.links[:, 0] = (keys - 1) % n
        o.links[:, 1] = (keys + 1) % n
        for j in range(2, C + 1):
            o.links[:, 2 + 2 * (j - 2)] = (keys - j) % n
            o.links[:, 3 + 2 * (j - 2)] = (keys + j) % n
    else:
        o.ring_links = False
        o.links[:, :2] = EMPTY
    if Cs:
        draw = rng.integers(1, n, size=(n, Cs))
        o.links[:, 2 + extra:] = (keys[:, None] + draw) % n
    o._rebuild_referrers()
    return o


def bounded_greedy_search(o: Overlay, source: int, target: int,
                          budget: int) -> tuple[QueryTrace, bool]:
    """Greedy search that gives up after ``budget`` hops.

    Success means the query reached ``target`` itself within the budget.
    """
    if not o.is_live(source):
        raise UnknownKeyError(f"source {source} is not a live key")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    path = _step_path(o.links, o.m, int(source), int(target), budget=budget)
    trace = QueryTrace(int(source), int(target), tuple(path),
                       resolved=path[-1] == o.closest_key(target),
                       success=path[-1] == target)
    return trace, trace.success


def freenet_bound(cfg: UniformRingConfig) -> tuple[float, float]:
    """``(exp(-2 eps^2), eps^2)``: the failure bound for large ``eps`` and the
    success bound for small ``eps``."""
    eps = cfg.epsilon
    return math.exp(-2.0 * eps * eps), eps * eps


def monte_carlo_success(o: Overlay, budget: int, trials: int, rng: np.random.Generator,
                        min_distance: int = 0) -> float:
    """Fraction of random (source, target) pairs found within ``budget`` hops.

    Pairs closer than ``min_distance`` on the ring are redrawn.
    """
    from .keyspace import ring_distance
    from .routing import greedy_hops

    keys = o.keys_array()
    src = np.empty(0, dtype=np.int64)
    dst = np.empty(0, dtype=np.int64)
    while len(src) < trials:
        s = keys[rng.integers(len(keys), size=trials)]
        t = keys[rng.integers(len(keys), size=trials)]
        ok = (s != t) & (ring_distance(s, t, o.m) > min_distance)
        src = np.concatenate([src, s[ok]])
        dst = np.concatenate([dst, t[ok]])
    src, dst = src[:trials], dst[:trials]
    _, term = greedy_hops(o.links, o.m, src, dst, budget=budget)
    return float(np.mean(term == dst))


def reach_profile(s: OffsetScheme, steps: int) -> list[int]:
    """Reach counts after 0, 1, ..., ``steps`` moves from position 0.

    Breadth-first over ``Z_modulus``; signed schemes may also subtract.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    moves = np.array([c % s.modulus for c in s.offsets], dtype=np.int64)
    if s.signed:
        moves = np.concatenate([moves, (-moves) % s.modulus])
    seen = np.zeros(s.modulus, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    counts = [1]
    for _ in range(steps):
        if frontier.size:
            nxt = np.unique((frontier[:, None] + moves[None, :]).ravel() % s.modulus)
            nxt = nxt[~seen[nxt]]
            seen[nxt] = True
            frontier = nxt
        counts.append(counts[-1] + int(frontier.size))
    return counts


def reach_set_size(s: OffsetScheme, steps: int) -> int:
    """Distinct positions reachable from 0 in at most ``steps`` offset moves."""
    return reach_profile(s, steps)[-1]


def chord_offsets(k: int) -> OffsetScheme:
    """Unsigned power-of-two offsets on a ring of ``2**k`` keys."""
    return OffsetScheme(tuple(2 ** i for i in range(k)), 2 ** k, signed=False)


def reach_bound_check(s: OffsetScheme, p: ReachBoundParams) -> dict:
    """Compare the exact reach in ``ceil(log2(N) ** m)`` steps with ``(2L+1)^d``.

    ``N`` is the modulus. The report also carries the reach as a fraction of
    ``alpha * N`` and the asymptotic cache-size threshold below which at most
    ``alpha * N`` nodes are reachable (reported, not asserted).
    """
    N = s.modulus
    L = math.ceil(math.log2(N) ** p.m_exp)
    reach = reach_set_size(s, L)
    bound = (2 * L + 1) ** s.d
    lg = math.log2(N)
    threshold = lg / (p.m_exp * math.log2(lg)) * (1 + math.log2(p.alpha) / lg) if lg > 1 else 0.0
    return {
        "d": s.d,
        "steps": L,
        "reach": reach,
        "bound": bound,
        "holds": reach <= bound,
        "reach_over_alpha_n": reach / (p.alpha * N),
        "d_threshold": threshold,
    }
