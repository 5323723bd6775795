"""Nested shortcuts: a label hierarchy that trades cache size for speed.

Nodes, taken in ring order, are cut into ``ceil(log2 n)`` contiguous groups;
each group is cut again into ``ceil(log2 size)`` groups, and so on until a
group holds at most ``ceil(log2 n)`` nodes. At every level a node keeps one
shortcut to a sibling group picked with probability ``∝ 1/|i - j|`` in label
space, landing on a uniformly random member of that group.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownKeyError
from .overlay import Overlay
from .routing import QueryTrace

__all__ = [
    "TooSmallError",
    "LabelMismatchError",
    "HierarchyLabels",
    "NestedOverlay",
    "build_labels",
    "build_nested_overlay",
    "hierarchical_greedy_search",
    "depth_bound",
]


class TooSmallError(ValueError):
    pass


class LabelMismatchError(ValueError):
    pass


def _split(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    """Cut ``[lo, hi)`` into ``parts`` near-equal intervals, larger ones first."""
    size, extra = divmod(hi - lo, parts)
    out = []
    start = lo
    for i in range(parts):
        end = start + size + (1 if i < extra else 0)
        out.append((start, end))
        start = end
    return out


@dataclass
class HierarchyLabels:
    """Group labels of ``n`` ring positions.

    ``labels[v][l]`` is the label of position ``v`` at level ``l`` (0-based),
    counted among the children of its level ``l - 1`` group. ``groups[l]``
    lists the ``(start, end)`` intervals at level ``l``; ``stop`` is the group
    size at which splitting ends.
    """

    n: int
    stop: int
    labels: list[list[int]]
    groups: list[list[tuple[int, int]]] = field(default_factory=list)
    siblings: list[list[tuple[int, int]]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.groups)

    @property
    def group_counts(self) -> list[int]:
        return [len(g) for g in self.groups]


def depth_bound(n: int) -> int:
    lg = math.log2(n)
    return math.ceil(lg / math.log2(lg)) + 1


def build_labels(n: int, stop: int | None = None) -> HierarchyLabels:
    """Recursive near-equal splitting of ``range(n)``.

    Parameters
    ----------
    n : int
        Number of nodes, at least 4.
    stop : int, optional
        Groups of at most this size are not split; default ``ceil(log2 n)``.
    """
    if n < 4:
        raise TooSmallError(f"hierarchy needs at least 4 nodes, got {n}")
    stop = math.ceil(math.log2(n)) if stop is None else stop
    if stop < 2:
        raise ValueError("stop size must be >= 2")
    labels: list[list[int]] = [[] for _ in range(n)]
    groups: list[list[tuple[int, int]]] = []
    siblings: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    level = [(0, n)]
    while True:
        todo = [g for g in level if g[1] - g[0] > stop]
        if not todo:
            break
        nxt = []
        for lo, hi in todo:
            parts = _split(lo, hi, math.ceil(math.log2(hi - lo)))
            for lab, (a, b) in enumerate(parts):
                for v in range(a, b):
                    labels[v].append(lab)
                    siblings[v].append((lo, hi))
            nxt.extend(parts)
        groups.append(nxt)
        level = nxt
    return HierarchyLabels(n, stop, labels, groups, siblings)


@dataclass
class NestedOverlay:
    """An overlay whose shortcut slot ``l`` is the level-``l`` link.

    Slots of positions whose group stopped splitting early stay empty.
    """

    overlay: Overlay
    h: HierarchyLabels
    pos: dict[int, int] = field(init=False)

    def __post_init__(self):
        self.pos = {k: i for i, k in enumerate(self.overlay.keys)}

    @property
    def cache_sizes(self) -> np.ndarray:
        arr = self.overlay.keys_array()
        return 2 + (self.overlay.links[arr, 2:] >= 0).sum(axis=1)


def _level_children(lo: int, hi: int) -> list[tuple[int, int]]:
    return _split(lo, hi, math.ceil(math.log2(hi - lo)))


def build_nested_overlay(o: Overlay, h: HierarchyLabels,
                         rng: np.random.Generator) -> NestedOverlay:
    """Return a copy of ``o`` whose shortcuts are the per-level links.

    Position ``v`` in the hierarchy is the ``v``-th live key in ring order.
    """
    if h.n != o.n:
        raise LabelMismatchError(f"labels cover {h.n} nodes, overlay has {o.n}")
    arr = o.keys_array()
    out = Overlay(o.m, h.depth, departure=o.departure, seed=o.seed)
    out.live = o.live.copy()
    out._keys = o.keys
    out.links[arr, :2] = o.links[arr, :2]
    for v in range(h.n):
        for lvl, own in enumerate(h.labels[v]):
            lo, hi = h.siblings[v][lvl]
            kids = _level_children(lo, hi)
            g = len(kids)
            j = np.arange(g)
            w = np.zeros(g)
            w[j != own] = 1.0 / np.abs(j[j != own] - own)
            pick = int(rng.choice(g, p=w / w.sum()))
            a, b = kids[pick]
            out.links[arr[v], 2 + lvl] = arr[int(rng.integers(a, b))]
    out._rebuild_referrers()
    return NestedOverlay(out, h)


def _progress(h: HierarchyLabels, v: int, dest: int) -> tuple[int, int]:
    """Lexicographic distance of position ``v`` from ``dest``.

    The first component is ``(level + 1) * n_big + label distance`` folded so
    that mismatches at coarser levels dominate; the second is the index
    distance used once every label agrees (or to walk within a group).
    """
    lv, ld = h.labels[v], h.labels[dest]
    for lvl in range(min(len(lv), len(ld))):
        if lv[lvl] != ld[lvl]:
            return (h.depth - lvl) * h.n + abs(lv[lvl] - ld[lvl]), abs(v - dest)
    return 0, abs(v - dest)


def hierarchical_greedy_search(no: NestedOverlay, source: int, target: int) -> QueryTrace:
    """Greedy routing on the label hierarchy.

    Each hop goes to the cached key with the smallest label distance at the
    coarsest level where labels still differ from the destination's, breaking
    ties by position distance, so the progress vector strictly decreases and
    the walk ends at ``closest_key(target)``.
    """
    o = no.overlay
    if not o.is_live(source):
        raise UnknownKeyError(f"source {source} is not a live key")
    o.validate_key(target)
    dest_key = o.closest_key(target)
    pos = no.pos
    dest = pos[dest_key]
    cur = int(source)
    path = [cur]
    cur_p = _progress(no.h, pos[cur], dest)
    while cur != dest_key:
        best, best_p = -1, cur_p
        for nb in o.links[cur].tolist():
            if nb < 0:
                continue
            p = _progress(no.h, pos[nb], dest)
            if p < best_p:
                best, best_p = nb, p
        if best < 0:
            break
        path.append(best)
        cur, cur_p = best, best_p
    return QueryTrace(int(source), int(target), tuple(path), resolved=cur == dest_key)
