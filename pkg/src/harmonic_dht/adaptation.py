"""Self-organising shortcut updates and their Markov chain.

A node ``k`` holding shortcut ``l`` that answers a query from ``t`` switches to
``t`` with probability ``d(k, l) / (d(k, l) + d(k, t))``. Modelled on shortcut
distance alone this is a Markov chain on states ``1..n`` whose stationary law
is ``p_x ∝ 1/x``; this module builds that chain, solves it by power iteration
and provides the harmonic vector as an independent closed form.
"""
from __future__ import annotations

import numpy as np

from .errors import UnknownKeyError
from .keyspace import ring_distance
from .overlay import Overlay

__all__ = [
    "ZeroDistanceError",
    "NoConvergenceError",
    "replacement_probability",
    "process_answered_query",
    "transition_matrix",
    "stationary_distribution",
    "harmonic_vector",
    "balance_residual",
    "total_variation",
]


class ZeroDistanceError(ValueError):
    pass


class NoConvergenceError(RuntimeError):
    pass


def replacement_probability(k: int, current: int, requester: int, m: int) -> float:
    """Chance that ``k`` swaps its shortcut ``current`` for ``requester``."""
    x = ring_distance(k, current, m)
    y = ring_distance(k, requester, m)
    if x == 0 or y == 0:
        raise ZeroDistanceError("shortcut and requester must differ from the answering key")
    return x / (x + y)


def process_answered_query(o: Overlay, answerer: int, requester: int,
                           rng: np.random.Generator) -> bool:
    """Apply the update rule after ``answerer`` serves ``requester``.

    With several shortcut slots one is picked uniformly. A uniform coin is
    drawn on every call so the random stream does not depend on the outcome.
    Returns True when the shortcut changed.
    """
    if not o.is_live(answerer) or not o.is_live(requester):
        raise UnknownKeyError(f"both {answerer} and {requester} must be live")
    if answerer == requester:
        raise ZeroDistanceError("a node does not answer its own query")
    s = o.shortcut_count
    if s == 0:
        return False
    slot = int(rng.integers(s)) if s > 1 else 0
    u = rng.random()
    current = int(o.links[answerer, 2 + slot])
    if current == requester:
        return False
    if current < 0:
        o.set_shortcut(answerer, slot, requester)
        return True
    if u < replacement_probability(answerer, current, requester, o.m):
        o.set_shortcut(answerer, slot, requester)
        return True
    return False


def transition_matrix(n: int) -> np.ndarray:
    """Row-stochastic chain on distances ``1..n`` with uniform incoming samples.

    ``P[x, y] = (1/n) * x / (x + y)`` off the diagonal (row/column ``i``
    holds distance ``i + 1``).
    """
    if n < 2:
        raise ValueError("the chain needs at least 2 states")
    x = np.arange(1, n + 1, dtype=np.float64)
    P = x[:, None] / (x[:, None] + x[None, :]) / n
    np.fill_diagonal(P, 0.0)
    P[np.diag_indices(n)] = 1.0 - P.sum(axis=1)
    return P


def stationary_distribution(P: np.ndarray, tol: float = 1e-12,
                            max_iter: int = 10_000_000) -> np.ndarray:
    """Fixed point of ``p = pP`` by power iteration from the uniform vector.

    Stops once successive iterates are within ``tol`` in total variation.
    """
    n = P.shape[0]
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        q = p @ P
        q /= q.sum()
        if 0.5 * np.abs(q - p).sum() < tol:
            return q
        p = q
    raise NoConvergenceError(f"power iteration did not settle in {max_iter} steps")


def harmonic_vector(n: int) -> np.ndarray:
    """``(1/x) / H_n`` for ``x = 1..n``."""
    w = 1.0 / np.arange(1, n + 1, dtype=np.float64)
    return w / w.sum()


def balance_residual(p: np.ndarray) -> np.ndarray:
    """Outflow minus inflow of every state under uniform incoming samples.

    Evaluated term by term from the flow-balance identity, without building
    the transition matrix.
    """
    n = len(p)
    x = np.arange(1, n + 1, dtype=np.float64)
    out = p * np.array([np.sum(xi / (xi + x)) for xi in x]) / n
    inflow = np.array([np.sum(p * x / (xi + x)) for xi in x]) / n
    return out - inflow


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
