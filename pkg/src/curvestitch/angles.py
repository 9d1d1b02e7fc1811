"""Angle arithmetic on the half-circle.

Undirected line/tangent orientations live in [0, 180) degrees, so 179 and 1
are 2 degrees apart. Every module that touches orientations goes through
these helpers instead of doing ad-hoc modular math.
"""

import numpy as np


def fold_deg(angle):
    """Fold a direction angle (degrees) into [0, 180)."""
    a = np.asarray(angle, dtype=np.float64) % 180.0
    # -1e-9 % 180 == 180.0 - 1e-9 which folds back to ~180; snap that to 0
    a = np.where(a >= 180.0, 0.0, a)
    if np.ndim(angle) == 0:
        return float(a)
    return a


def circ_diff_deg(a, b):
    """Circular distance between two orientations, period 180, in [0, 90]."""
    d = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) % 180.0
    d = np.minimum(d, 180.0 - d)
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return float(d)
    return d


def signed_diff_deg(a, b):
    """Shortest signed step from b to a on the period-180 circle, in [-90, 90)."""
    d = (np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64) + 90.0) % 180.0 - 90.0
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return float(d)
    return d


def circ_mean_deg(angles, weights=None):
    """Mean orientation of a set of angles, period 180.

    Uses the largest-gap unwrap: the angles are sorted on the half-circle,
    the biggest gap between neighbours marks where the circle is "cut", and
    the ordinary (weighted) mean is taken on the unwrapped values. Unlike
    the doubled-angle vector mean this always lands inside the smallest arc
    covering the inputs.
    """
    a = fold_deg(np.atleast_1d(np.asarray(angles, dtype=np.float64)))
    if a.size == 0:
        raise ValueError("circ_mean_deg of empty sequence")
    if a.size == 1:
        return float(a[0])
    w = np.ones_like(a) if weights is None else np.asarray(weights, dtype=np.float64)
    order = np.argsort(a, kind="stable")
    a_sorted = a[order]
    w_sorted = w[order]
    gaps = np.diff(np.concatenate([a_sorted, a_sorted[:1] + 180.0]))
    cut = int(np.argmax(gaps))
    # rotate so the sequence starts just after the largest gap, then unwrap
    unwrapped = np.concatenate([a_sorted[cut + 1:], a_sorted[:cut + 1] + 180.0])
    wu = np.concatenate([w_sorted[cut + 1:], w_sorted[:cut + 1]])
    mean = float(np.sum(unwrapped * wu) / np.sum(wu))
    return fold_deg(mean)


def interp_deg(a, b, t):
    """Wrap-aware linear interpolation between orientations a and b."""
    return fold_deg(b + signed_diff_deg(a, b) * np.asarray(t, dtype=np.float64))


def unwrap_deg(angles):
    """Unwrap a sequence of orientations so consecutive steps stay in (-90, 90]."""
    a = np.asarray(angles, dtype=np.float64)
    out = a.copy()
    for i in range(1, out.size):
        out[i] = out[i - 1] + signed_diff_deg(a[i], out[i - 1] % 180.0)
    return out
