"""Noise suppression by grouping segments whose weighted centroids are near
and whose angles agree, with vote thresholding and heaviest-cluster
selection.

Grouping is single-linkage over the pairwise gate (centroid distance AND
circular angle difference), so the result is a partition that does not
depend on input order; the per-cluster vote is simply the member count.
"""

from dataclasses import dataclass

import numpy as np

from .angles import circ_mean_deg
from .curvemath import WeightedPoint
from .errors import EmptyInput
from .hough import segment_angle


@dataclass(frozen=True)
class ClusterParams:
    centroid_radius: float = 12.0
    angle_tolerance: float = 10.0
    votes_min: int = 4

    def __post_init__(self):
        if self.centroid_radius <= 0 or self.angle_tolerance <= 0 or self.votes_min <= 0:
            raise ValueError("ClusterParams fields must be > 0")


@dataclass(frozen=True)
class CurveCluster:
    """A voted group of mutually consistent segments.

    representative is (centroid, angle): the mass-weighted mean of member
    centroids and the circular mean (period 180) of member angles.
    """

    members: tuple
    vote: int
    representative: tuple
    mass: float


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


def _make_cluster(members):
    masses = np.array([c.mass for _, c in members])
    xs = np.array([c.x for _, c in members])
    ys = np.array([c.y for _, c in members])
    angles = np.array([segment_angle(s) for s, _ in members])
    total = float(masses.sum())
    rep_centroid = WeightedPoint(x=float((xs * masses).sum() / total),
                                 y=float((ys * masses).sum() / total),
                                 mass=total)
    rep_angle = circ_mean_deg(angles)
    return CurveCluster(members=tuple(members), vote=len(members),
                        representative=(rep_centroid, rep_angle), mass=total)


def cluster_lines(items, p):
    """Single-linkage agglomeration of (LineSegment, WeightedPoint) items.

    Two items link iff their centroids are within p.centroid_radius AND
    their angles differ circularly by at most p.angle_tolerance; connected
    components become clusters. Output is ordered by descending vote, then
    descending mass, then ascending representative x.
    """
    items = list(items)
    if not items:
        raise EmptyInput("no items to cluster")
    n = len(items)
    pos = np.array([[c.x, c.y] for _, c in items])
    ang = np.array([segment_angle(s) for s, _ in items])
    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
    adiff = np.abs(ang[:, None] - ang[None, :]) % 180.0
    adiff = np.minimum(adiff, 180.0 - adiff)
    linked = (d2 <= p.centroid_radius ** 2) & (adiff <= p.angle_tolerance)
    uf = _UnionFind(n)
    ii, jj = np.nonzero(np.triu(linked, k=1))
    for i, j in zip(ii.tolist(), jj.tolist()):
        uf.union(i, j)
    groups = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(items[i])
    clusters = [_make_cluster(members) for members in groups.values()]
    clusters.sort(key=lambda c: (-c.vote, -c.mass, c.representative[0].x))
    return clusters


def threshold_votes(clusters, votes_min):
    """Keep exactly the clusters with vote >= votes_min, order preserved."""
    return [c for c in clusters if c.vote >= votes_min]


def select_heaviest(clusters):
    """The cluster with the greatest accumulated mass.

    Mass (summed member centroid mass, i.e. accumulated edge intensity)
    stands in for boundary thickness: a thicker stroke sweeps more bright
    pixels into its segments. Ties fall to the higher vote, then to the
    smaller representative x.
    """
    clusters = list(clusters)
    if not clusters:
        raise EmptyInput("no clusters to select from")
    return min(clusters, key=lambda c: (-c.mass, -c.vote, c.representative[0].x))
