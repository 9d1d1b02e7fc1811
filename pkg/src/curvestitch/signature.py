"""Slope signatures: fixed-length left-to-right vectors of tangent angles,
matched positionwise with a circular tolerance, plus the angle-band lane
labelling.

A curve's signature is built by sorting its tangent samples by contact x
and resampling the angles at uniformly spaced x positions, so curves of
different pixel extents stay comparable. Matching is the fraction of
positions within tolerance; a match needs at least the threshold fraction
(0.9 by default, so 29 of 32 positions pass and 28 do not).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .angles import circ_diff_deg, circ_mean_deg, fold_deg, unwrap_deg
from .errors import (DegenerateSpan, EmptyLibrary, InsufficientSamples,
                     LengthMismatch)

SIGNATURE_LENGTH = 32


class CurveClass(str, Enum):
    LINE = "line"
    PARABOLA = "parabola"
    CIRCLE = "circle"
    ELLIPSE = "ellipse"
    HYPERBOLA = "hyperbola"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SlopeSignature:
    angles: np.ndarray  # degrees in [0, 180), ordered left to right
    arc_span: float  # px length of the contact polyline it was built from

    def __post_init__(self):
        object.__setattr__(self, "angles", fold_deg(np.asarray(self.angles, dtype=np.float64)))

    def __len__(self):
        return self.angles.shape[0]


@dataclass(frozen=True)
class AngleBand:
    """Half-open tangent-angle interval [low, high) with a display label."""

    label: str
    low: float
    high: float

    def __post_init__(self):
        if not (0.0 <= self.low < self.high <= 180.0):
            raise ValueError(f"band {self.label}: need 0 <= low < high <= 180")


# lane bands: near-vertical leaning one way vs the other
DEFAULT_BANDS = (AngleBand("blue", 90.0, 120.0), AngleBand("green", 60.0, 90.0))


def validate_bands(bands):
    """Bands may touch at endpoints but not overlap."""
    spans = sorted((b.low, b.high, b.label) for b in bands)
    for (lo0, hi0, l0), (lo1, hi1, l1) in zip(spans, spans[1:]):
        if lo1 < hi0:
            raise ValueError(f"bands {l0} and {l1} overlap")
    return tuple(bands)


def assign_band(angle, bands):
    """Label of the band containing the angle, or None if uncovered.

    Intervals are [low, high), so an angle on a shared endpoint goes to the
    band that starts there.
    """
    a = fold_deg(angle)
    for band in bands:
        if band.low <= a < band.high:
            return band.label
    return None


def build_signature(samples, length=SIGNATURE_LENGTH):
    """Resample tangent samples into a fixed-length left-to-right signature.

    Samples are sorted by contact x (input order does not matter), samples
    sharing an x are merged by circular mean, and the angles are linearly
    interpolated — wrap-aware across 0/180 — at ``length`` uniform x
    positions. arc_span records the contact polyline length.
    """
    if len(samples) < 4:
        raise InsufficientSamples(f"need >= 4 tangent samples, got {len(samples)}")
    pts = sorted((s.x, s.y, s.angle) for s in samples)
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    angles = np.array([p[2] for p in pts])
    if xs[-1] - xs[0] <= 0.0:
        raise DegenerateSpan("tangent samples span no horizontal extent")

    # merge duplicate x knots so interpolation sees strictly increasing keys
    knot_x = []
    knot_y = []
    knot_a = []
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[j + 1] == xs[i]:
            j += 1
        knot_x.append(xs[i])
        knot_y.append(float(np.mean(ys[i:j + 1])))
        knot_a.append(circ_mean_deg(angles[i:j + 1]))
        i = j + 1
    knot_x = np.array(knot_x)
    knot_y = np.array(knot_y)
    arc_span = float(np.sum(np.hypot(np.diff(knot_x), np.diff(knot_y))))

    grid = np.linspace(knot_x[0], knot_x[-1], length)
    unwrapped = unwrap_deg(np.array(knot_a))
    resampled = np.interp(grid, knot_x, unwrapped)
    return SlopeSignature(angles=fold_deg(resampled), arc_span=arc_span)


def match_signature(candidate, reference, angle_tol=10.0, threshold=0.9):
    """Positionwise circular comparison, left to right.

    Returns (score, matched): score is the fraction of positions whose
    circular angle difference is within angle_tol; matched when
    score >= threshold.
    """
    if len(candidate) != len(reference):
        raise LengthMismatch(f"signature lengths differ: {len(candidate)} vs {len(reference)}")
    d = circ_diff_deg(candidate.angles, reference.angles)
    score = float(np.count_nonzero(d <= angle_tol)) / len(candidate)
    return score, score >= threshold


def classify_curve(sig, library, angle_tol=10.0, threshold=0.9):
    """Best-template classification against a signature library.

    Every template of every class is scored; the best class wins if its
    score reaches the match threshold, otherwise (UNKNOWN, best score).
    """
    if not library or not any(library.values()):
        raise EmptyLibrary("signature library has no templates")
    best_cls = CurveClass.UNKNOWN
    best_score = -1.0
    for cls, templates in library.items():
        for tmpl in templates:
            score, _ = match_signature(sig, tmpl, angle_tol, threshold)
            if score > best_score:
                best_score = score
                best_cls = cls
    if best_score >= threshold:
        return best_cls, best_score
    return CurveClass.UNKNOWN, best_score


# ---------------------------------------------------------------------------
# analytic template library


def _profile_signature(ts, slopes, length):
    """Signature of an analytic slope profile sampled over x = ts."""
    angles = fold_deg(np.degrees(np.arctan(slopes)))
    unwrapped = unwrap_deg(angles)
    grid = np.linspace(ts[0], ts[-1], length)
    resampled = np.interp(grid, ts, unwrapped)
    return SlopeSignature(angles=fold_deg(resampled), arc_span=float(ts[-1] - ts[0]))


def line_template(angle_deg, length=SIGNATURE_LENGTH):
    return SlopeSignature(angles=np.full(length, fold_deg(angle_deg)), arc_span=1.0)


def parabola_template(edge_angle_deg, length=SIGNATURE_LENGTH):
    """y = a*x^2 over its visible span; edge_angle is the tangent at the rim."""
    kappa = np.tan(np.radians(edge_angle_deg))
    t = np.linspace(-1.0, 1.0, 257)
    return _profile_signature(t, kappa * t, length)


def arc_template(ratio, span=0.95, length=SIGNATURE_LENGTH):
    """Upper arc of an axis-aligned ellipse with height/width ratio ``ratio``.

    ratio == 1 is a circle; the arc covers x in [-span, span] of the
    semi-axis, trimmed short of the vertical tangents.
    """
    t = np.linspace(-span, span, 257)
    slopes = -ratio * t / np.sqrt(1.0 - t * t)
    return _profile_signature(t, slopes, length)


def hyperbola_template(eccentricity, span=3.0, length=SIGNATURE_LENGTH):
    """One branch of y^2/b^2 - x^2/a^2 = 1 over x/a in [-span, span]."""
    ba = np.sqrt(eccentricity ** 2 - 1.0)
    t = np.linspace(-span, span, 257)
    slopes = ba * t / np.sqrt(1.0 + t * t)
    return _profile_signature(t, slopes, length)


LINE_TEMPLATE_ANGLES = tuple(range(0, 180, 15))
PARABOLA_TEMPLATE_EDGE_ANGLES = (30.0, 45.0, 60.0, 72.0, 82.0)
CIRCLE_TEMPLATE_RADII = (20.0, 40.0, 80.0, 160.0, 320.0)
ELLIPSE_TEMPLATE_ASPECTS = (1.5, 2.0, 3.0, 4.0, 6.0)
HYPERBOLA_TEMPLATE_ECCENTRICITIES = (1.2, 1.5, 2.0, 2.5, 3.0)


def default_library(length=SIGNATURE_LENGTH):
    """Analytic templates per class over canonical parameter grids.

    Circles of every radius share one slope profile over the same arc
    fraction, so the radius grid is redundant by construction but kept for
    symmetry with the other classes. Lines get an orientation grid because
    a single fixed-angle template could not match arbitrary lines.
    """
    return {
        CurveClass.LINE: [line_template(a, length) for a in LINE_TEMPLATE_ANGLES],
        CurveClass.PARABOLA: [parabola_template(a, length) for a in PARABOLA_TEMPLATE_EDGE_ANGLES],
        CurveClass.CIRCLE: [arc_template(1.0, length=length) for _ in CIRCLE_TEMPLATE_RADII],
        CurveClass.ELLIPSE: [arc_template(q, length=length) for q in ELLIPSE_TEMPLATE_ASPECTS]
        + [arc_template(1.0 / q, length=length) for q in ELLIPSE_TEMPLATE_ASPECTS],
        CurveClass.HYPERBOLA: [hyperbola_template(e, length=length)
                               for e in HYPERBOLA_TEMPLATE_ECCENTRICITIES],
    }


# ---------------------------------------------------------------------------
# text persistence: one line per signature


def format_signature(label, sig):
    parts = [label, f"{sig.arc_span:.3f}"] + [f"{a:.3f}" for a in sig.angles]
    return ",".join(parts)


def parse_signature(line):
    parts = line.strip().split(",")
    if len(parts) < 3:
        raise ValueError(f"malformed signature record: {line!r}")
    label = parts[0]
    arc_span = float(parts[1])
    angles = np.array([float(p) for p in parts[2:]])
    return label, SlopeSignature(angles=angles, arc_span=arc_span)


def save_signatures(path, entries):
    """entries: iterable of (label, SlopeSignature)."""
    with open(path, "w", encoding="ascii") as f:
        for label, sig in entries:
            f.write(format_signature(label, sig) + "\n")


def load_signatures(path):
    out = []
    with open(path, "r", encoding="ascii") as f:
        for line in f:
            if line.strip():
                out.append(parse_signature(line))
    return out
