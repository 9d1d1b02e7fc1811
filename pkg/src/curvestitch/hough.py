"""Standard Hough accumulator, probabilistic segment extraction, and the
conversions between endpoint and polar line forms.

A line is x*cos(theta) + y*sin(theta) = r with theta in [0, pi) and r a
signed pixel distance; the (theta, r) <-> (theta + pi, -r) ambiguity is
always canonicalized to that half range. Downstream geometry consumes
angles or polar form, never slope/intercept, so the slope form's vertical
singularity stays confined to polar_to_slope_intercept.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateSegment, EmptyEdgeMap, VerticalLine


@dataclass(frozen=True)
class PolarLine:
    theta: float
    r: float

    def __post_init__(self):
        k = math.floor(self.theta / math.pi)
        t = self.theta - k * math.pi
        if t >= math.pi:  # guard the theta = pi rounding corner
            t -= math.pi
            k += 1
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "r", self.r if k % 2 == 0 else -self.r)


@dataclass(frozen=True)
class LineSegment:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def length(self):
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def midpoint(self):
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))


@dataclass(frozen=True)
class HoughParams:
    """Accumulator resolution and the segment-chaining thresholds.

    For curve stitching the vote / length thresholds are deliberately small
    so that many short tangent chords are emitted along a curve.
    """

    theta_bins: int = 180
    r_resolution: float = 1.0
    votes_min: int = 10
    min_length: float = 5.0
    max_gap: float = 2.0

    def __post_init__(self):
        for name in ("theta_bins", "r_resolution", "votes_min", "min_length", "max_gap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"HoughParams.{name} must be > 0")


def grid_geometry(shape, theta_bins, r_resolution):
    """Bin layout shared by the accumulator, the segment extractor and tests.

    Returns (cos_t, sin_t, r_min, n_rbins); r bin b covers
    r_min + (b - 0.5) * r_resolution .. r_min + (b + 0.5) * r_resolution.
    """
    h, w = shape
    reach = math.hypot(w - 1, h - 1) + 1.0
    r_min = -reach
    n_rbins = int(math.floor(2.0 * reach / r_resolution + 0.5)) + 1
    thetas = np.arange(theta_bins, dtype=np.float64) * (math.pi / theta_bins)
    return np.cos(thetas), np.sin(thetas), r_min, n_rbins


def polar_to_bin(shape, theta_bins, r_resolution, line, at_point=None):
    """Accumulator bin (theta_idx, r_idx) where ``line`` votes.

    With at_point the r bin is evaluated for that point at the snapped
    theta, which is what a segment centred there actually votes.
    """
    cos_t, sin_t, r_min, n_rbins = grid_geometry(shape, theta_bins, r_resolution)
    step = math.pi / theta_bins
    ti = int(math.floor(line.theta / step + 0.5))
    r = line.r
    if ti >= theta_bins:
        ti -= theta_bins
        r = -r
    if at_point is None:
        at_point = (line.r * math.cos(line.theta), line.r * math.sin(line.theta))
    r_snap = at_point[0] * cos_t[ti] + at_point[1] * sin_t[ti]
    ri = int(math.floor((r_snap - r_min) / r_resolution + 0.5))
    return ti, min(max(ri, 0), n_rbins - 1)


def accumulate(edges, theta_bins, r_resolution):
    """Vote grid over all binary edge pixels; grid[theta_idx, r_idx]."""
    ys, xs = np.nonzero(edges.binary)
    if xs.size == 0:
        raise EmptyEdgeMap("no edge pixels to accumulate")
    cos_t, sin_t, r_min, n_rbins = grid_geometry(edges.binary.shape, theta_bins, r_resolution)
    return kernels.hough_accumulate(xs.astype(np.int64), ys.astype(np.int64),
                                    cos_t, sin_t, r_min, r_resolution, n_rbins)


def top_peaks(grid, n, suppress=2):
    """Greedy peak picking with rectangular non-max suppression.

    Returns up to n (theta_idx, r_idx, votes) triples, strongest first.
    """
    g = grid.astype(np.int64, copy=True)
    nt, nr = g.shape
    peaks = []
    for _ in range(n):
        flat = int(np.argmax(g))
        ti, ri = divmod(flat, nr)
        v = int(g[ti, ri])
        if v <= 0:
            break
        peaks.append((ti, ri, v))
        g[max(ti - suppress, 0):ti + suppress + 1,
          max(ri - suppress, 0):ri + suppress + 1] = 0
    return peaks


def probabilistic_lines(edges, p, seed):
    """Randomized progressive Hough segment extraction.

    Edge pixels are visited in a seed-determined random order; each live
    pixel votes, and once a bin reaches p.votes_min the corresponding line
    is walked through the edge map chaining runs separated by at most
    p.max_gap, emitting segments of at least p.min_length and retiring
    their pixels. Deterministic for a fixed seed.
    """
    binary = edges.binary
    idx = np.flatnonzero(binary)
    if idx.size == 0:
        raise EmptyEdgeMap("no edge pixels to sample")
    order = np.random.default_rng(seed).permutation(idx).astype(np.int64)
    cos_t, sin_t, r_min, n_rbins = grid_geometry(binary.shape, p.theta_bins, p.r_resolution)
    mask = binary.astype(np.uint8)  # ppht consumes the mask in place
    segs = kernels.ppht(mask, order, cos_t, sin_t, r_min, p.r_resolution,
                        n_rbins, p.votes_min, float(p.min_length), float(p.max_gap))
    return [LineSegment(*row) for row in segs]


def segment_to_polar(s):
    """Endpoint form -> canonical polar form; both endpoints satisfy it."""
    dx = s.x1 - s.x0
    dy = s.y1 - s.y0
    if math.hypot(dx, dy) < 1e-12:
        raise DegenerateSegment(f"zero-length segment at ({s.x0}, {s.y0})")
    theta = (math.atan2(dy, dx) + math.pi / 2.0) % math.pi
    r = s.x0 * math.cos(theta) + s.y0 * math.sin(theta)
    return PolarLine(theta=theta, r=r)


def polar_to_slope_intercept(line):
    """(slope, intercept) of y = slope*x + intercept; vertical lines error."""
    s = math.sin(line.theta)
    if abs(s) <= 1e-9:
        raise VerticalLine(f"sin(theta) ~ 0 for theta={line.theta}; use polar form")
    return (-math.cos(line.theta) / s, line.r / s)


def segment_angle(s):
    """Direction angle in degrees, folded into [0, 180)."""
    dx = s.x1 - s.x0
    dy = s.y1 - s.y0
    if math.hypot(dx, dy) < 1e-12:
        raise DegenerateSegment(f"zero-length segment at ({s.x0}, {s.y0})")
    return math.degrees(math.atan2(dy, dx)) % 180.0
