"""
Why uniform shortcuts and fixed offsets fall short
==================================================

Two foils. A ring with C neighbours per side and C' uniform shortcuts needs a
cache growing like sqrt(n / ln n) before short searches become likely. A fixed
offset cache {k + c_1, ..., k + c_d} can only reach (2L + 1)^d nodes in L steps.
"""

import math

import numpy as np

from harmonic_dht.baselines import (
    OffsetScheme,
    ReachBoundParams,
    UniformRingConfig,
    build_uniform_ring,
    chord_offsets,
    freenet_bound,
    monte_carlo_success,
    reach_bound_check,
)

rng = np.random.default_rng(0)
n = 10_000
budget = 2 * math.ceil(math.log(n))
for eps in (0.1, 0.5, 1.0):
    cfg = UniformRingConfig.from_epsilon(n, eps)
    ring = build_uniform_ring(cfg, rng)
    rate = monte_carlo_success(ring, budget, 2000, rng)
    fail, _ = freenet_bound(cfg)
    print(f"C=C'={cfg.c_local:3d}  eps={cfg.epsilon:.3f}  success within {budget}: {rate:.3f}"
          f"  (bound on failure {fail:.3f})")

###############################################################################
# Reach of commuting offset caches on 2^14 keys.
for offs in [(1,), (1, 37), (1, 37, 1000)]:
    rep = reach_bound_check(OffsetScheme(offs, 2 ** 14), ReachBoundParams())
    print(offs, "reach", rep["reach"], "bound", rep["bound"], "of", 2 ** 14)
rep = reach_bound_check(chord_offsets(14), ReachBoundParams())
print("Chord, 14 offsets: reach", rep["reach"])
