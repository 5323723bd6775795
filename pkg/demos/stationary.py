"""
The replacement rule has a harmonic fixed point
===============================================

With shortcut distance x and a requester at distance y, the shortcut moves with
probability x / (x + y). As a Markov chain on distances its stationary law is
proportional to 1/x.
"""

import numpy as np

from harmonic_dht.adaptation import (
    balance_residual,
    harmonic_vector,
    stationary_distribution,
    total_variation,
    transition_matrix,
)

for n in (2, 3, 16, 128):
    p = stationary_distribution(transition_matrix(n))
    print(f"n={n:4d}  TV to 1/x law {total_variation(p, harmonic_vector(n)):.2e}  "
          f"balance residual {np.abs(balance_residual(harmonic_vector(n))).max():.1e}")

###############################################################################
# The three-state chain in full.
print(np.round(transition_matrix(3), 4))
print("stationary:", np.round(stationary_distribution(transition_matrix(3)), 4),
      "exact 6/11, 3/11, 2/11")
