"""
Joining and leaving
===================

Nodes join by routing to their own key and drawing fresh harmonic shortcuts;
departures make every node that pointed at the leaver draw again.
"""

import numpy as np

from harmonic_dht import Overlay, greedy_search

rng = np.random.default_rng(2)
o = Overlay.bootstrap(500, 10_000, rng, shortcut_count=2)
print("nodes", o.n, "checksum", o.checksum()[:12])

for _ in range(2000):
    if rng.random() < 0.5:
        x = int(rng.integers(o.m))
        if not o.is_live(x):
            o.join(x, o.keys[int(rng.integers(o.n))], rng)
    elif o.n > 3:
        o.leave(o.keys[int(rng.integers(o.n))], rng)
o.check_invariants()
print("after churn: nodes", o.n)

###############################################################################
# Lookups still end at the live key nearest the target.
t = 4321
trace = greedy_search(o, o.keys[0], t)
print("path", trace.path, "closest", o.closest_key(t))
print(o.dumps().splitlines()[0])
