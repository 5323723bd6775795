"""Live network state and churn: bootstrap, join, leave, refresh.

All mutating operations work in place on a single :class:`Overlay`. The cache
table is a dense ``(m, 2 + s)`` integer array indexed by key, holding the left
neighbour, the right neighbour and ``s`` shortcut slots; ``-1`` marks an empty
entry. Keeping the table dense lets :func:`~harmonic_dht.routing.greedy_hops`
route thousands of queries at once.
"""
from __future__ import annotations

import bisect
import hashlib

import numpy as np

from .errors import (
    CapacityError,
    DuplicateKeyError,
    InvariantError,
    UnderflowError,
    UnknownKeyError,
)
from .keyspace import InvalidRingError, rank_distance, sampler_for
from .routing import _step_path

__all__ = [
    "EMPTY",
    "DuplicateKeyError",
    "UnknownKeyError",
    "CapacityError",
    "UnderflowError",
    "InvariantError",
    "Overlay",
]

EMPTY = -1


class Overlay:
    """A ring of ``m`` key positions of which ``n`` are occupied by nodes.

    Parameters
    ----------
    m : int
        Number of key positions.
    shortcut_count : int
        Shortcut slots per node (0 gives a bare ring).
    departure : {"redo", "nearby"}
        How referrers of a departing node replace the lost shortcut: redo the
        harmonic sampling and routing, or point at the live key nearest the
        departed one.
    seed : int, optional
        Recorded in snapshots only.
    """

    def __init__(self, m: int, shortcut_count: int = 1, *, departure: str = "redo",
                 seed: int | None = None):
        if m < 2:
            raise InvalidRingError(f"ring needs at least 2 positions, got m={m}")
        if shortcut_count < 0:
            raise ValueError("shortcut_count must be >= 0")
        if departure not in ("redo", "nearby"):
            raise ValueError(f"unknown departure policy {departure!r}")
        self.m = int(m)
        self.shortcut_count = int(shortcut_count)
        self.departure = departure
        self.seed = seed
        self.ring_links = True
        self.links = np.full((self.m, 2 + self.shortcut_count), EMPTY, dtype=np.int64)
        self.live = np.zeros(self.m, dtype=bool)
        self._keys: list[int] = []
        self.referrers: dict[int, set[int]] = {}

    # -- construction -------------------------------------------------------

    @classmethod
    def seed_pair(cls, a: int, b: int, m: int, shortcut_count: int = 1, **kw) -> "Overlay":
        """Two nodes, each the other's left, right and shortcut(s)."""
        o = cls(m, shortcut_count, **kw)
        a, b = o.validate_key(a), o.validate_key(b)
        if a == b:
            raise DuplicateKeyError(a)
        o.place(a)
        o.place(b)
        for slot in range(o.shortcut_count):
            o.set_shortcut(a, slot, b)
            o.set_shortcut(b, slot, a)
        return o

    @classmethod
    def bootstrap(cls, n: int, m: int, rng: np.random.Generator, shortcut_count: int = 1,
                  **kw) -> "Overlay":
        """Grow a network by ``n - 2`` greedy joins onto a random two-node seed.

        Keys are drawn uniformly without replacement; each newcomer contacts a
        uniformly chosen live node.
        """
        if n < 2:
            raise ValueError("need at least 2 nodes")
        if n > m:
            raise CapacityError(f"cannot place {n} nodes on a ring of {m} keys")
        keys = rng.choice(m, size=n, replace=False).tolist()
        o = cls.seed_pair(keys[0], keys[1], m, shortcut_count, **kw)
        for k in keys[2:]:
            via = o._keys[int(rng.integers(o.n))]
            o.join(k, via, rng)
        return o

    @classmethod
    def from_keys(cls, keys, m: int, rng: np.random.Generator | None = None,
                  shortcut_count: int = 1, shortcuts: str = "harmonic", **kw) -> "Overlay":
        """Build a static overlay directly, without routing.

        ``shortcuts`` is ``"harmonic"`` (closest other live key to a harmonic
        draw), ``"uniform"`` (a uniformly chosen other live key) or ``"none"``
        (slots left empty).
        """
        o = cls(m, shortcut_count, **kw)
        arr = np.unique(np.asarray(keys, dtype=np.int64))
        if len(arr) != len(keys):
            raise DuplicateKeyError("duplicate keys")
        if len(arr) > m:
            raise CapacityError(f"cannot place {len(arr)} nodes on a ring of {m} keys")
        if len(arr) and (arr[0] < 0 or arr[-1] >= m):
            raise KeyError("key outside ring")
        n = len(arr)
        o._keys = arr.tolist()
        o.live[arr] = True
        o.links[arr, 0] = np.roll(arr, 1)
        o.links[arr, 1] = np.roll(arr, -1)
        s = o.shortcut_count
        if shortcuts == "none" or s == 0 or n < 2:
            return o
        if rng is None:
            raise ValueError("a random generator is needed to draw shortcuts")
        src = np.repeat(arr, s)
        if shortcuts == "harmonic":
            draws = sampler_for(m).sample(src, rng)
            chosen = o._closest_other_many(src, draws)
        elif shortcuts == "uniform":
            own = np.repeat(np.arange(n), s)
            idx = rng.integers(n - 1, size=len(src))
            idx += idx >= own
            chosen = arr[idx]
        else:
            raise ValueError(f"unknown shortcut mode {shortcuts!r}")
        o.links[arr, 2:] = chosen.reshape(n, s)
        o._rebuild_referrers()
        return o

    # -- queries ------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self._keys)

    @property
    def keys(self) -> list[int]:
        return list(self._keys)

    def keys_array(self) -> np.ndarray:
        return np.asarray(self._keys, dtype=np.int64)

    def validate_key(self, k) -> int:
        if not 0 <= k < self.m:
            raise KeyError(f"key {k} outside ring [0, {self.m})")
        return int(k)

    def is_live(self, k) -> bool:
        return 0 <= k < self.m and bool(self.live[k])

    def _require_live(self, k) -> int:
        if not self.is_live(k):
            raise UnknownKeyError(f"key {k} is not live")
        return int(k)

    def left(self, k: int) -> int:
        return int(self.links[self._require_live(k), 0])

    def right(self, k: int) -> int:
        return int(self.links[self._require_live(k), 1])

    def shortcuts(self, k: int) -> list[int]:
        return self.links[self._require_live(k), 2:].tolist()

    def closest_key(self, t: int) -> int:
        """Live key nearest ``t``; equidistant pairs resolve clockwise."""
        if not self._keys:
            raise UnknownKeyError("overlay is empty")
        t = self.validate_key(t)
        i = bisect.bisect_left(self._keys, t)
        succ = self._keys[i % self.n]
        pred = self._keys[i - 1]
        if rank_distance(pred, t, self.m) < rank_distance(succ, t, self.m):
            return pred
        return succ

    def closest_keys(self, targets) -> np.ndarray:
        arr = self.keys_array()
        t = np.asarray(targets, dtype=np.int64)
        i = np.searchsorted(arr, t)
        succ = arr[i % len(arr)]
        pred = arr[i - 1]
        use_pred = rank_distance(pred, t, self.m) < rank_distance(succ, t, self.m)
        return np.where(use_pred, pred, succ)

    def closest_other(self, k: int, t: int) -> int:
        """Live key nearest ``t`` excluding ``k`` itself."""
        c = self.closest_key(t)
        if c != k:
            return c
        return self._nearer_neighbour(k, t)

    def _nearer_neighbour(self, k: int, t: int) -> int:
        lft, rgt = int(self.links[k, 0]), int(self.links[k, 1])
        if rank_distance(lft, t, self.m) < rank_distance(rgt, t, self.m):
            return lft
        return rgt

    def _closest_other_many(self, src: np.ndarray, targets: np.ndarray) -> np.ndarray:
        c = self.closest_keys(targets)
        hit = c == src
        if hit.any():
            lft = self.links[src[hit], 0]
            rgt = self.links[src[hit], 1]
            t = targets[hit]
            c[hit] = np.where(rank_distance(lft, t, self.m) < rank_distance(rgt, t, self.m),
                              lft, rgt)
        return c

    # -- mutation -----------------------------------------------------------

    def place(self, k: int) -> None:
        """Splice ``k`` into the ring between its nearest live keys.

        Shortcut slots of ``k`` are left empty.
        """
        k = self.validate_key(k)
        if self.live[k]:
            raise DuplicateKeyError(f"key {k} is already live")
        i = bisect.bisect_left(self._keys, k)
        self._keys.insert(i, k)
        self.live[k] = True
        if self.n == 1:
            self.links[k, :2] = k
            return
        pred = self._keys[i - 1]
        succ = self._keys[(i + 1) % self.n]
        self.links[k, 0] = pred
        self.links[k, 1] = succ
        self.links[pred, 1] = k
        self.links[succ, 0] = k

    def _unplace(self, k: int) -> None:
        i = bisect.bisect_left(self._keys, k)
        del self._keys[i]
        self.live[k] = False
        pred, succ = int(self.links[k, 0]), int(self.links[k, 1])
        self.links[pred, 1] = succ
        self.links[succ, 0] = pred
        self.links[k] = EMPTY

    def set_shortcut(self, k: int, slot: int, target: int) -> None:
        """Point shortcut ``slot`` of ``k`` at ``target`` (``EMPTY`` clears it)."""
        row = self.links[k]
        old = int(row[2 + slot])
        row[2 + slot] = target
        if old >= 0 and old != target and old not in row[2:]:
            refs = self.referrers.get(old)
            if refs is not None:
                refs.discard(k)
                if not refs:
                    del self.referrers[old]
        if target >= 0:
            self.referrers.setdefault(int(target), set()).add(int(k))

    def _acquire(self, k: int, slot: int, rng: np.random.Generator) -> int:
        """Harmonic draw, greedy route from ``k``, cache the closest other key.

        Returns the routing hops spent.
        """
        draw = sampler_for(self.m).sample(k, rng)
        path = _step_path(self.links, self.m, k, draw)
        found = path[-1]
        if found == k:
            found = self._nearer_neighbour(k, draw)
        self.set_shortcut(k, slot, found)
        return len(path) - 1

    def join(self, newcomer: int, via: int, rng: np.random.Generator) -> int:
        """Add ``newcomer`` by routing its own key from live node ``via``.

        Returns the total hops spent by the placement query and the shortcut
        queries.
        """
        newcomer = self.validate_key(newcomer)
        if self.live[newcomer]:
            raise DuplicateKeyError(f"key {newcomer} is already live")
        via = self._require_live(via)
        path = _step_path(self.links, self.m, via, newcomer)
        hops = len(path) - 1
        if path[-1] != self.closest_key(newcomer):
            raise InvariantError("placement query did not reach the closest key")
        self.place(newcomer)
        for slot in range(self.shortcut_count):
            hops += self._acquire(newcomer, slot, rng)
        return hops

    def leave(self, k: int, rng: np.random.Generator) -> None:
        """Remove ``k``; its ring neighbours re-link and its referrers re-acquire."""
        k = self._require_live(k)
        if self.n < 3:
            raise UnderflowError("at least 3 live nodes are needed for a departure")
        for slot in range(self.shortcut_count):
            self.set_shortcut(k, slot, EMPTY)
        self._unplace(k)
        # clear every dangling slot before any re-acquisition query is routed
        orphans = []
        for r in sorted(self.referrers.pop(k, ())):
            for slot in np.flatnonzero(self.links[r, 2:] == k).tolist():
                self.links[r, 2 + slot] = EMPTY
                orphans.append((r, slot))
        for r, slot in orphans:
            if self.departure == "redo":
                self._acquire(r, slot, rng)
            else:
                self.set_shortcut(r, slot, self.closest_other(r, k))

    def refresh_shortcut(self, k: int, rng: np.random.Generator, slot: int | None = None) -> int:
        """Re-draw the shortcut(s) of ``k``. Returns routing hops spent."""
        k = self._require_live(k)
        slots = range(self.shortcut_count) if slot is None else [slot]
        return sum(self._acquire(k, s, rng) for s in slots)

    # -- bookkeeping --------------------------------------------------------

    def _rebuild_referrers(self) -> None:
        self.referrers = {}
        for k in self._keys:
            for t in self.links[k, 2:].tolist():
                if t >= 0:
                    self.referrers.setdefault(t, set()).add(k)

    def check_invariants(self, allow_empty: bool = False) -> None:
        """Raise :class:`InvariantError` unless the overlay is consistent.

        Checks that the local links form one ring in key order, that shortcuts
        point at other live keys and that ``referrers`` inverts the shortcut
        map exactly.
        """
        arr = self.keys_array()
        n = len(arr)
        if n and (np.any(np.diff(arr) <= 0)):
            raise InvariantError("key index not strictly sorted")
        if int(self.live.sum()) != n or (n and not self.live[arr].all()):
            raise InvariantError("live mask disagrees with key index")
        dead = ~self.live
        if np.any(self.links[dead] != EMPTY):
            raise InvariantError("dead key has cache entries")
        if n == 0:
            return
        if self.ring_links:
            if np.any(self.links[arr, 1] != np.roll(arr, -1)):
                raise InvariantError("right links do not follow key order")
            if np.any(self.links[arr, 0] != np.roll(arr, 1)):
                raise InvariantError("left links do not follow key order")
        sc = self.links[arr, 2:]
        filled = sc >= 0
        if not allow_empty and not filled.all():
            raise InvariantError("empty shortcut slot")
        if np.any(sc[filled] >= self.m) or not self.live[sc[filled]].all():
            raise InvariantError("shortcut to a dead key")
        if np.any((sc == arr[:, None]) & filled):
            raise InvariantError("self shortcut")
        expect: dict[int, set[int]] = {}
        for k, row in zip(arr.tolist(), sc.tolist()):
            for t in row:
                if t >= 0:
                    expect.setdefault(t, set()).add(k)
        if expect != self.referrers:
            raise InvariantError("referrer index out of sync")

    def local_triples(self) -> set[tuple[int, int, int]]:
        return {(k, int(self.links[k, 0]), int(self.links[k, 1])) for k in self._keys}

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(self.keys_array().tobytes())
        h.update(np.ascontiguousarray(self.links).tobytes())
        return h.hexdigest()

    def copy(self) -> "Overlay":
        o = Overlay.__new__(Overlay)
        o.__dict__.update(self.__dict__)
        o.links = self.links.copy()
        o.live = self.live.copy()
        o._keys = list(self._keys)
        o.referrers = {k: set(v) for k, v in self.referrers.items()}
        return o

    def rotated(self, c: int) -> "Overlay":
        """Copy with every key relabelled ``k -> (k + c) mod m``."""
        o = self.copy()
        arr = self.keys_array()
        new = (arr + c) % self.m
        o.links = np.full_like(self.links, EMPTY)
        rows = self.links[arr]
        o.links[new] = np.where(rows >= 0, (rows + c) % self.m, EMPTY)
        o.live = np.zeros_like(self.live)
        o.live[new] = True
        o._keys = sorted(new.tolist())
        o._rebuild_referrers()
        return o

    # -- snapshots ----------------------------------------------------------

    def dumps(self) -> str:
        """Text snapshot: a ``M=<m> N=<n> seed=<seed>`` header, then one
        ``key,left,right,shortcut1[,shortcut2...]`` line per node."""
        seed = "none" if self.seed is None else self.seed
        lines = [f"M={self.m} N={self.n} seed={seed}"]
        for k in self._keys:
            lines.append(",".join(str(v) for v in [k, *self.links[k].tolist()]))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, **kw) -> "Overlay":
        rows = text.strip().splitlines()
        head = dict(part.split("=", 1) for part in rows[0].split())
        seed = None if head["seed"] == "none" else int(head["seed"])
        body = [list(map(int, r.split(","))) for r in rows[1:]]
        if len(body) != int(head["N"]):
            raise ValueError("node count does not match header")
        s = len(body[0]) - 3 if body else 0
        o = cls(int(head["M"]), s, seed=seed, **kw)
        for row in body:
            k = row[0]
            o.links[k] = row[1:]
            o.live[k] = True
        o._keys = sorted(r[0] for r in body)
        o._rebuild_referrers()
        return o
