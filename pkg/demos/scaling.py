"""
Hop counts grow like log squared
================================

Static overlays with exact harmonic shortcuts at sizes 2^8 to 2^12. Dividing the
mean hop count by ln(n)^2 should give a roughly flat column.
"""

from harmonic_dht.experiments import ExperimentConfig, run_scaling

cfg = ExperimentConfig.for_experiment("scaling", sizes=(256, 512, 1024, 2048, 4096),
                                      queries=5000, seed=0)
for row in run_scaling(cfg):
    print(f"n={row['n']:5d}  mean {row['mean_hops']:6.2f}  max {row['max_hops']:4d}  "
          f"mean/ln^2 {row['mean_over_ln2']:.3f}  max/ln^3 {row['max_over_ln3']:.3f}")

###############################################################################
# One query, hop by hop, with the dyadic phase of each remaining distance.
import numpy as np

from harmonic_dht import Overlay, greedy_search, phase_hop_profile
from harmonic_dht.routing import format_trace

rng = np.random.default_rng(3)
o = Overlay.from_keys(rng.choice(2 ** 16, 2048, replace=False), 2 ** 16, rng)
trace = greedy_search(o, o.keys[0], o.keys[1024])
print("\n".join(format_trace(trace, o.m).splitlines()[:6]), "...")
print("hops:", trace.hops)
print("hops charged per phase:", phase_hop_profile(trace, o.m))
