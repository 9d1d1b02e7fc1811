"""Frame-to-frame feedback: texture change gating, discontinuity filling
from the previous frame's lane model, and temporal smoothing.

A LaneModel is the per-frame tracked state: one polyline per lane in
bird's-eye coordinates (strictly monotonic along the lane's dominant axis),
plus the band label and tangent samples that produced it. Bridging a gap
never moves existing points; the previous frame's matching span is spliced
in, translated so it meets the gap endpoints.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FrameOrderViolation, ShapeMismatch, TileTooLarge
from .imaging import tile_stats

_EPS = 1e-6


@dataclass
class LaneModel:
    polylines: list  # per lane: (n, 2) float array, n >= 2
    band_labels: list  # per lane: str or None
    tangent_fields: list  # per lane: list of TangentSample
    frame_index: int = 0
    # bookkeeping: ages[i] counts frames a lane has persisted undetected,
    # meta[i] carries caller data (cluster stats) through the tracker ops
    ages: list = field(default_factory=list)
    meta: list = field(default_factory=list)
    gaps_filled: int = 0

    def __post_init__(self):
        n = len(self.polylines)
        if not self.ages:
            self.ages = [0] * n
        if not self.meta:
            self.meta = [None] * n

    @property
    def lane_count(self):
        return len(self.polylines)


def dominant_axis(polyline):
    """0 when the polyline extends mostly in x, 1 when mostly in y."""
    p = np.asarray(polyline)
    ext = p.max(axis=0) - p.min(axis=0)
    return 0 if ext[0] >= ext[1] else 1


def validate_model(model):
    for i, poly in enumerate(model.polylines):
        p = np.asarray(poly)
        if len(p) < 2:
            raise ValueError(f"lane {i}: polyline needs >= 2 points")
        axis = dominant_axis(p)
        if not np.all(np.diff(p[:, axis]) > 0):
            raise ValueError(f"lane {i}: polyline not strictly monotonic in axis {axis}")
    return model


@dataclass(frozen=True)
class TextureDescriptor:
    """Per-tile intensity mean and variance on a regular grid."""

    means: np.ndarray
    variances: np.ndarray
    tile: int


def texture_descriptor(img, tile):
    """Tile-grid texture statistics of a single-channel image."""
    if tile < 4:
        raise ValueError(f"tile must be >= 4, got {tile}")
    h, w = img.shape
    if tile > min(w, h):
        raise TileTooLarge(f"tile {tile} exceeds image side {min(w, h)}")
    means, variances, _, _ = tile_stats(img, tile)
    return TextureDescriptor(means=means, variances=variances, tile=tile)


def texture_distance(a, b, eps=1e-6):
    """Mean normalized difference of tile stats; a pseudometric.

    Per tile: |dm| / (m_a + m_b + eps) + |dv| / (v_a + v_b + eps), averaged
    over the grid. Zero exactly when the descriptors have identical stats;
    the shared-denominator form keeps the triangle inequality.
    """
    if a.means.shape != b.means.shape:
        raise ShapeMismatch(f"descriptor grids differ: {a.means.shape} vs {b.means.shape}")
    dm = np.abs(a.means - b.means) / (a.means + b.means + eps)
    dv = np.abs(a.variances - b.variances) / (a.variances + b.variances + eps)
    return float(np.mean(dm + dv))


def match_lanes(current, previous):
    """For each current lane, the index of its previous counterpart or None.

    Correspondence requires an equal band label and picks the nearest mean
    x, one-to-one, closest pairs first.
    """
    pairs = []
    cur_mx = [float(np.asarray(p)[:, 0].mean()) for p in current.polylines]
    prev_mx = [float(np.asarray(p)[:, 0].mean()) for p in previous.polylines]
    for i, bi in enumerate(current.band_labels):
        for j, bj in enumerate(previous.band_labels):
            if bi == bj:
                pairs.append((abs(cur_mx[i] - prev_mx[j]), i, j))
    pairs.sort()
    out = [None] * current.lane_count
    used = set()
    for _, i, j in pairs:
        if out[i] is None and j not in used:
            out[i] = j
            used.add(j)
    return out


def find_gaps(polyline, factor=3.0):
    """Indices i where spacing point[i] -> point[i+1] exceeds factor x median."""
    p = np.asarray(polyline, dtype=np.float64)
    if len(p) < 3:
        return []
    spacing = np.hypot(*np.diff(p, axis=0).T)
    med = float(np.median(spacing))
    if med <= 0:
        return []
    return [int(i) for i in np.nonzero(spacing > factor * med)[0]]


def _arc_length(polyline):
    p = np.asarray(polyline, dtype=np.float64)
    return float(np.hypot(*np.diff(p, axis=0).T).sum())


def _bridge_points(gap_p, gap_q, prev_poly, axis):
    """Previous-frame span between the gap endpoints, endpoint-aligned.

    Interior previous points between the endpoints' dominant-axis
    coordinates are shifted by a linear blend of the two endpoint offsets;
    both offsets are perpendicular to the dominant axis (the span ends are
    interpolated exactly at the gap coordinates), so monotonicity along the
    axis is preserved by construction.
    """
    prev = np.asarray(prev_poly, dtype=np.float64)
    c0 = float(gap_p[axis])
    c1 = float(gap_q[axis])
    coords = prev[:, axis]
    if coords[0] > coords[-1]:
        prev = prev[::-1]
        coords = prev[:, axis]
    lo, hi = (c0, c1) if c0 <= c1 else (c1, c0)
    if lo < coords[0] or hi > coords[-1]:
        return None  # previous lane does not span the gap
    other = 1 - axis
    inside = (coords > lo + _EPS) & (coords < hi - _EPS)
    if not inside.any():
        return None
    inner = prev[inside]
    a_other = float(np.interp(c0, coords, prev[:, other]))
    b_other = float(np.interp(c1, coords, prev[:, other]))
    off_a = gap_p[other] - a_other
    off_b = gap_q[other] - b_other
    t = (inner[:, axis] - c0) / (c1 - c0)
    out = inner.copy()
    out[:, other] = inner[:, other] + (1.0 - t) * off_a + t * off_b
    if c0 > c1:
        out = out[::-1]
    return out


def fill_discontinuities(current, previous, max_gap_fraction=0.15,
                         persistence_limit=5):
    """Bridge small gaps in current lanes using the previous frame's model.

    A gap is a consecutive-point spacing over 3x the lane's median spacing;
    it is bridged only when shorter than max_gap_fraction of the lane's arc
    length (larger discontinuities are left alone). Existing points are
    never moved. Lanes present previously but absent now persist, ageing,
    for at most persistence_limit frames. The bridge count is reported on
    the returned model's gaps_filled.
    """
    if previous.frame_index != current.frame_index - 1:
        raise FrameOrderViolation(
            f"previous frame {previous.frame_index} does not precede {current.frame_index}")
    matches = match_lanes(current, previous)
    polylines = []
    filled = 0
    for i, poly in enumerate(current.polylines):
        p = np.asarray(poly, dtype=np.float64)
        j = matches[i]
        gap_idx = find_gaps(p)
        if j is None or not gap_idx:
            polylines.append(p)
            continue
        axis = dominant_axis(p)
        prev_poly = previous.polylines[j]
        if dominant_axis(prev_poly) != axis:
            polylines.append(p)
            continue
        arc = _arc_length(p)
        pieces = []
        last = 0
        for g in gap_idx:
            gap_len = float(np.hypot(*(p[g + 1] - p[g])))
            pieces.append(p[last:g + 1])
            if gap_len < max_gap_fraction * arc:
                bridge = _bridge_points(p[g], p[g + 1], prev_poly, axis)
                if bridge is not None and len(bridge):
                    pieces.append(bridge)
                    filled += 1
            last = g + 1
        pieces.append(p[last:])
        polylines.append(np.concatenate(pieces, axis=0))
    band_labels = list(current.band_labels)
    tangent_fields = list(current.tangent_fields)
    ages = [0] * current.lane_count
    meta = list(current.meta)
    matched_prev = {j for j in matches if j is not None}
    for j in range(previous.lane_count):
        if j in matched_prev:
            continue
        age = previous.ages[j] + 1
        if age > persistence_limit:
            continue
        polylines.append(np.asarray(previous.polylines[j], dtype=np.float64).copy())
        band_labels.append(previous.band_labels[j])
        tangent_fields.append(previous.tangent_fields[j])
        ages.append(age)
        meta.append(previous.meta[j])
    return LaneModel(polylines=polylines, band_labels=band_labels,
                     tangent_fields=tangent_fields,
                     frame_index=current.frame_index, ages=ages, meta=meta,
                     gaps_filled=filled)


def smooth_model(current, previous, alpha):
    """Exponential blend toward the previous frame's matched lanes.

    Each matched lane's off-axis coordinate becomes
    alpha*current + (1-alpha)*previous (previous resampled at the current
    points' dominant-axis positions); points outside the previous lane's
    span, and unmatched lanes, pass through unchanged.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    matches = match_lanes(current, previous)
    polylines = []
    for i, poly in enumerate(current.polylines):
        p = np.asarray(poly, dtype=np.float64).copy()
        j = matches[i]
        if j is None or alpha == 1.0:
            polylines.append(p)
            continue
        axis = dominant_axis(p)
        prev = np.asarray(previous.polylines[j], dtype=np.float64)
        if dominant_axis(prev) != axis:
            polylines.append(p)
            continue
        if prev[0, axis] > prev[-1, axis]:
            prev = prev[::-1]
        other = 1 - axis
        coords = p[:, axis]
        inside = (coords >= prev[0, axis]) & (coords <= prev[-1, axis])
        resampled = np.interp(coords[inside], prev[:, axis], prev[:, other])
        p[inside, other] = alpha * p[inside, other] + (1.0 - alpha) * resampled
        polylines.append(p)
    return LaneModel(polylines=polylines, band_labels=list(current.band_labels),
                     tangent_fields=list(current.tangent_fields),
                     frame_index=current.frame_index, ages=list(current.ages),
                     meta=list(current.meta), gaps_filled=current.gaps_filled)
