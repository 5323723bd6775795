"""Named random streams.

Every experiment draws from independent PCG64 generators keyed by a stream
name. The generator for stream ``name`` under seed ``s`` is::

    np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(s, spawn_key=(STREAMS.index(name), *extra))))

so, for instance, the adaptive-query stream never shifts when the number of
measurement probes changes.
"""
from __future__ import annotations

import numpy as np

STREAMS = ("overlay-build", "adaptive", "probes", "control")


def stream(seed: int, name: str, *extra: int) -> np.random.Generator:
    if name not in STREAMS:
        raise ValueError(f"unknown stream {name!r}; expected one of {STREAMS}")
    ss = np.random.SeedSequence(seed, spawn_key=(STREAMS.index(name), *extra))
    return np.random.Generator(np.random.PCG64(ss))
