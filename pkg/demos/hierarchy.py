"""
Nested shortcuts
================

Cutting the ring into groups of groups and giving each node one shortcut per
level trades a few extra cache entries for much shorter searches.
"""

import numpy as np

from harmonic_dht.hierarchy import build_labels, build_nested_overlay, hierarchical_greedy_search
from harmonic_dht.overlay import Overlay
from harmonic_dht.routing import greedy_hops

n, m = 4096, 2 ** 16
rng = np.random.default_rng(5)
flat = Overlay.from_keys(rng.choice(m, n, replace=False), m, rng)
labels = build_labels(n)
print("depth", labels.depth, "groups per level", labels.group_counts)

nested = build_nested_overlay(flat, labels, rng)
print("cache size", int(nested.cache_sizes.max()))

###############################################################################
# Same query pairs on both overlays.
keys = flat.keys_array()
src, dst = keys[rng.integers(n, size=2000)], keys[rng.integers(n, size=2000)]
flat_hops, _ = greedy_hops(flat.links, m, src, dst)
nest_hops = [hierarchical_greedy_search(nested, int(a), int(b)).hops for a, b in zip(src, dst)]
print(f"flat mean {flat_hops.mean():.2f}  nested mean {np.mean(nest_hops):.2f}")
