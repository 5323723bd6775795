"""Greedy search over an overlay, hop accounting and phase diagnostics.

A query held by node ``c`` moves to the cached key (left, right or any
shortcut) with the smallest :func:`~harmonic_dht.keyspace.rank_distance` to
the target, provided it is strictly smaller than ``c``'s own. Because every
node links to its ring neighbours this always ends at the live key closest to
the target.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import UnknownKeyError
from .keyspace import rank_distance, ring_distance

if TYPE_CHECKING:
    from .overlay import Overlay

__all__ = [
    "NoPhaseError",
    "QueryTrace",
    "greedy_search",
    "greedy_hops",
    "phase_of",
    "phase_hop_profile",
    "format_trace",
]


class NoPhaseError(ValueError):
    """Distance zero has no phase: the search is already over."""


@dataclass(frozen=True)
class QueryTrace:
    source: int
    target: int
    path: tuple[int, ...]
    resolved: bool
    success: bool = True

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    @property
    def terminal(self) -> int:
        return self.path[-1]


def _step_path(links: np.ndarray, m: int, source: int, target: int, budget=None):
    """Walk greedily from ``source``; returns the visited keys."""
    path = [source]
    cur = source
    cur_rank = rank_distance(cur, target, m)
    while cur_rank > 0 and (budget is None or len(path) - 1 < budget):
        best, best_rank = -1, cur_rank
        for nb in links[cur].tolist():
            if nb < 0:
                continue
            r = rank_distance(nb, target, m)
            if r < best_rank:
                best, best_rank = nb, r
        if best < 0:
            break
        path.append(best)
        cur, cur_rank = best, best_rank
    return path


def greedy_search(o: "Overlay", source: int, target: int) -> QueryTrace:
    """Route a query from ``source`` to the live key closest to ``target``."""
    if not o.is_live(source):
        raise UnknownKeyError(f"source {source} is not a live key")
    o.validate_key(target)
    path = _step_path(o.links, o.m, int(source), int(target))
    return QueryTrace(
        source=int(source),
        target=int(target),
        path=tuple(path),
        resolved=path[-1] == o.closest_key(target),
    )


_SCALAR_TAIL = 4


def greedy_hops(links: np.ndarray, m: int, sources, targets, budget: int | None = None):
    """Vectorised greedy search for a batch of queries.

    Parameters
    ----------
    links : ndarray, shape (m, k)
        Cache table; row ``c`` holds the keys cached by ``c`` (``-1`` = empty).
    m : int
        Ring size.
    sources, targets : array_like of int
    budget : int, optional
        Stop each query after this many hops.

    Returns
    -------
    hops : ndarray of int
    terminal : ndarray of int
        Key holding each query when it stopped.
    """
    cur = np.array(sources, dtype=np.int64, copy=True)
    targets = np.asarray(targets, dtype=np.int64)
    hops = np.zeros(cur.shape, dtype=np.int64)
    big = np.iinfo(np.int64).max
    rank = rank_distance(cur, targets, m)
    active = np.flatnonzero(rank > 0)
    if budget is not None and budget <= 0:
        active = active[:0]
    while active.size > _SCALAR_TAIL:
        cand = links[cur[active]]
        r = rank_distance(cand, targets[active, None], m)
        r[cand < 0] = big
        j = r.argmin(axis=1)
        rows = np.arange(active.size)
        best = r[rows, j]
        move = best < rank[active]
        moved = active[move]
        cur[moved] = cand[rows, j][move]
        rank[moved] = best[move]
        hops[moved] += 1
        keep = move & (best > 0)
        if budget is not None:
            keep &= hops[active] < budget
        active = active[keep]
    for i in active.tolist():
        left = None if budget is None else budget - int(hops[i])
        path = _step_path(links, m, int(cur[i]), int(targets[i]), left)
        cur[i] = path[-1]
        hops[i] += len(path) - 1
    return hops, cur


def phase_of(r: int) -> int:
    """Dyadic band ``floor(log2 r)`` of a nonzero distance."""
    if r < 1:
        raise NoPhaseError("distance 0 has no phase")
    return int(r).bit_length() - 1


def phase_hop_profile(trace: QueryTrace, m: int) -> list[tuple[int, int]]:
    """Hops spent in each phase, ordered from the first phase visited.

    A hop is charged to the phase of the distance held *before* the hop.
    """
    counts: dict[int, int] = {}
    for key in trace.path[:-1]:
        ph = phase_of(ring_distance(key, trace.target, m))
        counts[ph] = counts.get(ph, 0) + 1
    return sorted(counts.items(), reverse=True)


def format_trace(trace: QueryTrace, m: int) -> str:
    """Debug dump, one line per visited key: ``hop_index,current_key,distance_to_target,phase``.

    The phase field is empty at distance zero.
    """
    lines = []
    for i, key in enumerate(trace.path):
        d = ring_distance(key, trace.target, m)
        lines.append(f"{i},{key},{d},{phase_of(d) if d else ''}")
    return "\n".join(lines) + "\n"

