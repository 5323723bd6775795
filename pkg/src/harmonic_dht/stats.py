"""Trend detection for the settling curves."""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm


def mann_kendall(x) -> tuple[float, float]:
    """Two-sided Mann-Kendall trend test.

    Returns
    -------
    z : float
        Normal score of the S statistic (continuity corrected, tie adjusted).
    p : float
        Two-sided p-value.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 observations")
    s = 0.0
    for i in range(n - 1):
        s += np.sign(x[i + 1:] - x[i]).sum()
    _, counts = np.unique(x, return_counts=True)
    ties = counts[counts > 1]
    var = (n * (n - 1) * (2 * n + 5) - np.sum(ties * (ties - 1) * (2 * ties + 5))) / 18.0
    if s > 0:
        z = (s - 1) / math.sqrt(var)
    elif s < 0:
        z = (s + 1) / math.sqrt(var)
    else:
        z = 0.0
    return z, 2.0 * norm.sf(abs(z))


def settled_index(series, window: int = 1000, stride: int = 100,
                  alpha: float = 0.05) -> int | None:
    """Start of the first window with no significant monotone trend.

    Windows of ``window`` points are tested every ``stride`` points; None if
    every window trends.
    """
    x = np.asarray(series, dtype=np.float64)
    for start in range(0, len(x) - window + 1, stride):
        _, p = mann_kendall(x[start:start + window])
        if p >= alpha:
            return start
    return None
