"""Curve stitching core: intensity-weighted segment centroids and tangent
estimation over centroid pairs.

The geometric idea: two short chords on a smooth curve have centroids a and
b that both lie near the curve; the secant through a and b has the slope of
the curve's tangent at some interior contact point. The contact point is
taken as the midpoint of a and b (the unbiased choice, since only existence
of the interior point is guaranteed) and the secant direction becomes the
tangent angle. Shrinking the pair gap drives the secant to the true
tangent, so tighter max_pair_gap means lower angle error.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .angles import fold_deg
from .errors import DegeneratePair, ZeroMass
from .hough import segment_angle


@dataclass(frozen=True)
class WeightedPoint:
    x: float
    y: float
    mass: float


@dataclass(frozen=True)
class TangentSample:
    """A contact point with the tangent orientation estimated there."""

    x: float
    y: float
    angle: float  # degrees in [0, 180)
    support: float  # combined centroid mass of the generating pair


@dataclass(frozen=True)
class MvtConfig:
    max_pair_gap: float = 12.0  # px between paired centroids
    max_angle_spread: float = 20.0  # degrees between the pair's chord angles

    def __post_init__(self):
        if self.max_pair_gap <= 0 or self.max_angle_spread <= 0:
            raise ValueError("MvtConfig fields must be > 0")


def weighted_centroid(img, s, band=1.0):
    """Intensity-weighted centroid over the segment thickened by ``band``.

    Pixels whose centre lies within band + 0.5 px of the segment carry
    weight f = img[y, x]; the centroid is sum(f*p) / sum(f) and the mass is
    sum(f). All-zero coverage raises ZeroMass.
    """
    if band < 0:
        raise ValueError(f"band must be >= 0, got {band}")
    segs = np.array([[s.x0, s.y0, s.x1, s.y1]], dtype=np.float64)
    sums = kernels.segment_centroids(np.ascontiguousarray(img, dtype=np.float64), segs, float(band))
    if sums[0, 2] <= 0.0:
        raise ZeroMass("segment covers only zero-intensity pixels")
    return WeightedPoint(x=sums[0, 0] / sums[0, 2], y=sums[0, 1] / sums[0, 2], mass=sums[0, 2])


def weighted_centroids(img, segments, band=1.0):
    """Batch form of weighted_centroid; zero-mass segments are dropped.

    Returns (kept_segments, centroids) with positions matched up.
    """
    if not segments:
        return [], []
    segs = np.array([[s.x0, s.y0, s.x1, s.y1] for s in segments], dtype=np.float64)
    sums = kernels.segment_centroids(np.ascontiguousarray(img, dtype=np.float64), segs, float(band))
    kept = []
    cents = []
    for s, row in zip(segments, sums):
        if row[2] > 0.0:
            kept.append(s)
            cents.append(WeightedPoint(x=row[0] / row[2], y=row[1] / row[2], mass=row[2]))
    return kept, cents


def mvt_tangent(a, b):
    """Tangent sample from a centroid pair: secant angle at the midpoint."""
    dx = b.x - a.x
    dy = b.y - a.y
    if math.hypot(dx, dy) <= 1e-6:
        raise DegeneratePair(f"centroids coincide at ({a.x}, {a.y})")
    angle = fold_deg(math.degrees(math.atan2(dy, dx)))
    return TangentSample(x=0.5 * (a.x + b.x), y=0.5 * (a.y + b.y),
                         angle=angle, support=a.mass + b.mass)


def tangent_field(img, segments, cfg, band=1.0):
    """Tangent samples from all admissible centroid pairs.

    Each segment's weighted centroid is paired with up to two nearest
    neighbours that sit within cfg.max_pair_gap and whose chord angles
    differ by at most cfg.max_angle_spread. Candidate pairs are accepted in
    order of increasing separation (ties broken lexicographically), each
    centroid joining at most two pairs, which strings the samples along the
    curve. Sorting is internal, so the result is independent of input
    order. May return an empty list.
    """
    if len(segments) < 2:
        return []
    kept, cents = weighted_centroids(img, segments, band=band)
    n = len(cents)
    if n < 2:
        return []
    pos = np.array([[c.x, c.y] for c in cents])
    ang = np.array([segment_angle(s) for s in kept])
    # canonical processing order: lexicographic by centroid x then y
    order = np.lexsort((pos[:, 1], pos[:, 0]))
    pos = pos[order]
    ang = ang[order]
    cents = [cents[i] for i in order]

    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
    adiff = np.abs(ang[:, None] - ang[None, :]) % 180.0
    adiff = np.minimum(adiff, 180.0 - adiff)
    # coincident centroids cannot form a tangent; keep them unpaired
    admissible = (d2 <= cfg.max_pair_gap ** 2) & (adiff <= cfg.max_angle_spread) & (d2 > 1e-12)
    np.fill_diagonal(admissible, False)
    sep = np.where(admissible, d2, np.inf)

    candidates = set()
    for i in range(n):
        neighbours = np.argsort(sep[i], kind="stable")[:2]
        for j in neighbours:
            if np.isfinite(sep[i, j]):
                candidates.add((min(i, int(j)), max(i, int(j))))
    ordered = sorted(candidates, key=lambda ij: (d2[ij[0], ij[1]], ij[0], ij[1]))

    degree = np.zeros(n, dtype=np.int64)
    samples = []
    for i, j in ordered:
        if degree[i] >= 2 or degree[j] >= 2:
            continue
        degree[i] += 1
        degree[j] += 1
        samples.append(mvt_tangent(cents[i], cents[j]))
    samples.sort(key=lambda t: (t.x, t.y))
    return samples
