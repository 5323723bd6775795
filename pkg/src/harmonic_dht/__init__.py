"""Constant-cache DHT with harmonic shortcuts: overlay simulator and experiments."""
from .keyspace import (
    HarmonicSampler,
    InvalidRingError,
    RingParams,
    harmonic_normalizer,
    rank_distance,
    ring_distance,
    sample_shortcut_target,
)
from .overlay import (
    CapacityError,
    DuplicateKeyError,
    InvariantError,
    Overlay,
    UnderflowError,
    UnknownKeyError,
)
from .routing import QueryTrace, greedy_hops, greedy_search, phase_hop_profile, phase_of

__version__ = "0.1.0"

__all__ = [
    "HarmonicSampler", "InvalidRingError", "RingParams", "harmonic_normalizer",
    "rank_distance", "ring_distance", "sample_shortcut_target",
    "CapacityError", "DuplicateKeyError", "InvariantError", "Overlay",
    "UnderflowError", "UnknownKeyError",
    "QueryTrace", "greedy_hops", "greedy_search", "phase_hop_profile", "phase_of",
]
