"""Synthetic scenes with analytic ground truth.

Renders anti-aliased curve strokes (with optional erased gaps), distractor
segments, procedural background texture and a linear shadow ramp, all
deterministic per (spec, seed). The ground truth carries a dense point
list, the analytic tangent angle at every point, per-point gap flags and a
brute-force distance field, which is what the detection tests score
against.

Curve parameter conventions (image coordinates, x right, y down):

- line:      (x0, y0, x1, y1)
- parabola:  (axis, a, cx, cy, half_span); axis 0: y = cy + a*(x-cx)^2,
             axis 1: x = cx + a*(y-cy)^2
- circle:    (cx, cy, r, arc0_deg, arc1_deg)
- ellipse:   (cx, cy, rx, ry, rot_deg, arc0_deg, arc1_deg)
- hyperbola: (axis, cx, cy, a, b, t_span); axis 0 opens along y
- sine:      (axis, amp, period, phase_deg, cx, cy, half_span); axis 1 is
             the lane-like orientation running along y
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .angles import circ_diff_deg, fold_deg
from .config import ConfigError, format_kv_text, parse_kv_text
from .errors import SpecInvalid

CURVE_KINDS = ("line", "parabola", "circle", "ellipse", "hyperbola", "sine")

_PARAM_COUNTS = {"line": 4, "parabola": 5, "circle": 5, "ellipse": 7,
                 "hyperbola": 6, "sine": 7}


@dataclass(frozen=True)
class CurveSpec:
    kind: str
    params: tuple
    stroke: float = 2.0
    gaps: tuple = ()  # ((start_fraction, end_fraction), ...) of arc length

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise SpecInvalid(f"unknown curve kind {self.kind!r}")
        if len(self.params) != _PARAM_COUNTS[self.kind]:
            raise SpecInvalid(f"{self.kind} needs {_PARAM_COUNTS[self.kind]} "
                              f"params, got {len(self.params)}")
        if self.stroke < 1.0:
            raise SpecInvalid(f"stroke must be >= 1 px, got {self.stroke}")
        last = 0.0
        for f0, f1 in sorted(self.gaps):
            if not 0.0 <= f0 < f1 <= 1.0:
                raise SpecInvalid(f"gap ({f0}, {f1}) outside [0, 1]")
            if f0 < last:
                raise SpecInvalid("gap intervals overlap")
            last = f1


@dataclass(frozen=True)
class SceneSpec:
    size: tuple = (640, 480)
    curves: tuple = ()
    noise_count: int = 0
    noise_length: tuple = (6.0, 16.0)
    noise_intensity: float = 1.0
    background: float = 0.0
    texture_amp: float = 0.0
    shadow: tuple = None  # (direction_deg, strength, transition_band_px)
    offset: tuple = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        w, h = self.size
        if w <= 0 or h <= 0:
            raise SpecInvalid(f"bad scene size {self.size}")
        if self.noise_count < 0:
            raise SpecInvalid("noise_count must be >= 0")
        if self.noise_length[0] <= 0 or self.noise_length[1] < self.noise_length[0]:
            raise SpecInvalid(f"bad noise length range {self.noise_length}")
        if self.shadow is not None:
            _, strength, band = self.shadow
            if not (0.0 <= strength <= 1.0) or band <= 0:
                raise SpecInvalid(f"bad shadow {self.shadow}")


@dataclass
class CurveTruth:
    """Dense analytic samples of one curve, full arc (gaps flagged)."""

    kind: str
    points: np.ndarray  # (n, 2)
    angles: np.ndarray  # (n,) tangent angle, degrees in [0, 180)
    in_gap: np.ndarray  # (n,) bool
    arc_length: float
    seg_weight: np.ndarray  # (n,) local arc length per sample

    def distance_to(self, pts):
        """Distance from each query point to the nearest curve sample."""
        q = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        d2 = ((q[:, None, :] - self.points[None, :, :]) ** 2).sum(axis=2)
        return np.sqrt(d2.min(axis=1))


@dataclass
class GroundTruth:
    size: tuple
    curves: list
    _field: np.ndarray = field(default=None, repr=False)

    def distance_field(self):
        """Per-pixel distance to the nearest curve point (gaps included)."""
        if self._field is None:
            w, h = self.size
            pts = np.concatenate([c.points for c in self.curves]) if self.curves \
                else np.zeros((0, 2))
            if len(pts) == 0:
                self._field = np.full((h, w), np.inf)
            else:
                d2 = kernels.min_dist_sq_field(
                    np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]), h, w)
                self._field = np.sqrt(d2)
        return self._field


def curve_points(kind, params, n):
    """n parametric samples: (points (n,2), tangent angles deg (n,))."""
    t = np.linspace(0.0, 1.0, n)
    if kind == "line":
        x0, y0, x1, y1 = params
        x = x0 + (x1 - x0) * t
        y = y0 + (y1 - y0) * t
        dx = np.full(n, x1 - x0)
        dy = np.full(n, y1 - y0)
    elif kind == "parabola":
        axis, a, cx, cy, hs = params
        u = -hs + 2.0 * hs * t
        if int(axis) == 0:
            x, y = cx + u, cy + a * u * u
            dx, dy = np.ones(n), 2.0 * a * u
        else:
            x, y = cx + a * u * u, cy + u
            dx, dy = 2.0 * a * u, np.ones(n)
    elif kind == "circle":
        cx, cy, r, a0, a1 = params
        phi = np.radians(a0 + (a1 - a0) * t)
        x, y = cx + r * np.cos(phi), cy + r * np.sin(phi)
        dx, dy = -np.sin(phi), np.cos(phi)
    elif kind == "ellipse":
        cx, cy, rx, ry, rot, a0, a1 = params
        phi = np.radians(a0 + (a1 - a0) * t)
        rot = math.radians(rot)
        cr, sr = math.cos(rot), math.sin(rot)
        ex, ey = rx * np.cos(phi), ry * np.sin(phi)
        x = cx + cr * ex - sr * ey
        y = cy + sr * ex + cr * ey
        edx, edy = -rx * np.sin(phi), ry * np.cos(phi)
        dx = cr * edx - sr * edy
        dy = sr * edx + cr * edy
    elif kind == "hyperbola":
        axis, cx, cy, a, b, ts = params
        u = -ts + 2.0 * ts * t
        if int(axis) == 0:
            x, y = cx + a * np.sinh(u), cy + b * np.cosh(u)
            dx, dy = a * np.cosh(u), b * np.sinh(u)
        else:
            x, y = cx + b * np.cosh(u), cy + a * np.sinh(u)
            dx, dy = b * np.sinh(u), a * np.cosh(u)
    elif kind == "sine":
        axis, amp, period, phase, cx, cy, hs = params
        u = -hs + 2.0 * hs * t
        w = 2.0 * math.pi / period
        ph = math.radians(phase)
        if int(axis) == 0:
            x, y = cx + u, cy + amp * np.sin(w * u + ph)
            dx, dy = np.ones(n), amp * w * np.cos(w * u + ph)
        else:
            x, y = cx + amp * np.sin(w * u + ph), cy + u
            dx, dy = amp * w * np.cos(w * u + ph), np.ones(n)
    else:
        raise SpecInvalid(f"unknown curve kind {kind!r}")
    angles = fold_deg(np.degrees(np.arctan2(dy, dx)))
    return np.column_stack([x, y]), angles


def _dense_truth(curve, offset, target_spacing=0.35):
    probe_pts, _ = curve_points(curve.kind, curve.params, 257)
    steps = np.hypot(*np.diff(probe_pts, axis=0).T)
    max_speed = steps.max() * 256.0  # px per unit t
    n = int(np.clip(math.ceil(max_speed / target_spacing) + 1, 257, 16385))
    pts, angles = curve_points(curve.kind, curve.params, n)
    pts = pts + np.asarray(offset, dtype=np.float64)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    arc_length = float(cum[-1])
    frac = cum / arc_length if arc_length > 0 else cum
    in_gap = np.zeros(n, dtype=bool)
    for f0, f1 in curve.gaps:
        in_gap |= (frac >= f0) & (frac < f1)
    weight = np.zeros(n)
    if n >= 2:
        weight[0] = seg[0] * 0.5
        weight[-1] = seg[-1] * 0.5
        if n > 2:
            weight[1:-1] = (seg[:-1] + seg[1:]) * 0.5
    return CurveTruth(kind=curve.kind, points=pts, angles=angles,
                      in_gap=in_gap, arc_length=arc_length, seg_weight=weight)


def _stamp_stroke(img, pts, stroke, intensity=1.0):
    """Max-compose an anti-aliased stroke along dense points into img."""
    if len(pts) == 0:
        return
    h, w = img.shape
    half = stroke / 2.0
    fld = np.full((h, w), 1e30)
    kernels.stamp_min_dist(fld, np.ascontiguousarray(pts[:, 0]),
                           np.ascontiguousarray(pts[:, 1]), half + 1.5)
    np.maximum(img, np.clip(half + 0.5 - fld, 0.0, 1.0) * intensity, out=img)


def _texture_field(w, h, amp, rng, offset):
    xx, yy = np.meshgrid(np.arange(w, dtype=np.float64) - offset[0],
                         np.arange(h, dtype=np.float64) - offset[1])
    acc = np.zeros((h, w))
    for _ in range(6):
        fx = rng.uniform(0.02, 0.12)
        fy = rng.uniform(0.02, 0.12)
        ph = rng.uniform(0.0, 2.0 * math.pi)
        acc += np.sin(2.0 * math.pi * (fx * xx + fy * yy) + ph)
    return acc * (amp / math.sqrt(3.0))  # six unit sines have std sqrt(3)


def _shadow_factor(w, h, direction_deg, strength, band):
    d = math.radians(direction_deg)
    xx, yy = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    proj = xx * math.cos(d) + yy * math.sin(d)
    mid = 0.5 * (proj.min() + proj.max())
    t = np.clip((proj - (mid - band / 2.0)) / band, 0.0, 1.0)
    return 1.0 - strength * t


def render(spec):
    """Render a scene; returns (image, GroundTruth), deterministic per seed."""
    w, h = spec.size
    rng = np.random.default_rng(spec.seed)
    img = np.full((h, w), float(spec.background))
    if spec.texture_amp > 0.0:
        img += _texture_field(w, h, spec.texture_amp, rng, spec.offset)
    truths = []
    for curve in spec.curves:
        truth = _dense_truth(curve, spec.offset)
        _stamp_stroke(img, truth.points[~truth.in_gap], curve.stroke)
        truths.append(truth)
    for _ in range(spec.noise_count):
        length = rng.uniform(*spec.noise_length)
        ang = rng.uniform(0.0, math.pi)
        x0 = rng.uniform(0.0, w - 1.0)
        y0 = rng.uniform(0.0, h - 1.0)
        x1 = x0 + length * math.cos(ang)
        y1 = y0 + length * math.sin(ang)
        n = max(int(length / 0.35) + 1, 2)
        t = np.linspace(0.0, 1.0, n)
        pts = np.column_stack([x0 + (x1 - x0) * t, y0 + (y1 - y0) * t])
        _stamp_stroke(img, pts, 2.0, spec.noise_intensity)
    if spec.shadow is not None:
        img *= _shadow_factor(w, h, *spec.shadow)
    np.clip(img, 0.0, 1.0, out=img)
    return img, GroundTruth(size=spec.size, curves=truths)


# ---------------------------------------------------------------------------
# detection scoring


def _polyline_segments(polyline):
    p = np.asarray(polyline, dtype=np.float64)
    return p[:-1], p[1:]


def _dist_to_polylines(pts, polylines):
    """(distance, angle-of-nearest-segment) for each query point."""
    q = np.asarray(pts, dtype=np.float64)
    best_d = np.full(len(q), np.inf)
    best_a = np.zeros(len(q))
    for polyline in polylines:
        if len(polyline) < 2:
            continue
        a, b = _polyline_segments(polyline)
        ab = b - a
        ab2 = (ab * ab).sum(axis=1)
        ab2 = np.where(ab2 > 0, ab2, 1.0)
        ap = q[:, None, :] - a[None, :, :]
        t = np.clip((ap * ab[None, :, :]).sum(axis=2) / ab2[None, :], 0.0, 1.0)
        closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
        d = np.sqrt(((q[:, None, :] - closest) ** 2).sum(axis=2))
        j = np.argmin(d, axis=1)
        dmin = d[np.arange(len(q)), j]
        improved = dmin < best_d
        seg_angles = fold_deg(np.degrees(np.arctan2(ab[:, 1], ab[:, 0])))
        best_a = np.where(improved, seg_angles[j], best_a)
        best_d = np.where(improved, dmin, best_d)
    return best_d, best_a


@dataclass
class DetectionScore:
    coverages: list  # per truth curve, arc fraction within dist_tol
    mean_angle_error: float  # over matched truth samples, degrees
    angle_ok_fraction: float  # matched samples also within angle_tol
    false_positive_length: float  # detected arc length far from any truth


def score_detection(detected, truth, dist_tol=5.0, angle_tol=10.0):
    """Score detected lane polylines against the analytic ground truth.

    ``detected`` may be a LaneModel, a DetectionResult, or a plain list of
    (n, 2) polylines. Coverage counts the fraction of each truth curve's arc
    that lies within dist_tol of some detected polyline; angle stats are
    computed over those matched samples against the local polyline direction.
    """
    if hasattr(detected, "lanes"):
        polylines = [lane.polyline_px for lane in detected.lanes]
    else:
        polylines = getattr(detected, "polylines", detected)
    polylines = [np.asarray(p, dtype=np.float64) for p in polylines]
    coverages = []
    errs = []
    err_weights = []
    for curve in truth.curves:
        if not polylines:
            coverages.append(0.0)
            continue
        d, a = _dist_to_polylines(curve.points, polylines)
        covered = d <= dist_tol
        wsum = curve.seg_weight.sum()
        coverages.append(float(curve.seg_weight[covered].sum() / wsum) if wsum > 0 else 0.0)
        if covered.any():
            errs.append(circ_diff_deg(curve.angles[covered], a[covered]))
            err_weights.append(curve.seg_weight[covered])
    if errs:
        err = np.concatenate(errs)
        ew = np.concatenate(err_weights)
        mean_err = float((err * ew).sum() / ew.sum())
        angle_ok = float(((err <= angle_tol) * ew).sum() / ew.sum())
    else:
        mean_err = float("nan")
        angle_ok = 0.0

    fp_length = 0.0
    if truth.curves and polylines:
        all_truth = np.concatenate([c.points for c in truth.curves])
        for polyline in polylines:
            if len(polyline) < 2:
                continue
            seg = np.diff(polyline, axis=0)
            seg_len = np.hypot(seg[:, 0], seg[:, 1])
            # sample each segment's midpoint chain densely enough for 1 px steps
            n = int(np.clip(np.ceil(seg_len.sum()), 2, 4096))
            t = np.linspace(0.0, 1.0, n)
            cum = np.concatenate([[0.0], np.cumsum(seg_len)])
            total = cum[-1]
            if total <= 0:
                continue
            at = t * total
            idx = np.clip(np.searchsorted(cum, at, side="right") - 1, 0, len(seg_len) - 1)
            local = np.where(seg_len[idx] > 0, (at - cum[idx]) / np.where(seg_len[idx] > 0, seg_len[idx], 1.0), 0.0)
            pts = polyline[idx] + local[:, None] * seg[idx]
            d2 = ((pts[:, None, :] - all_truth[None, :, :]) ** 2).sum(axis=2)
            far = np.sqrt(d2.min(axis=1)) > dist_tol
            fp_length += float(far.mean() * total)
    elif polylines and not truth.curves:
        for polyline in polylines:
            seg = np.diff(np.asarray(polyline), axis=0)
            fp_length += float(np.hypot(seg[:, 0], seg[:, 1]).sum())
    return DetectionScore(coverages=coverages, mean_angle_error=mean_err,
                          angle_ok_fraction=angle_ok,
                          false_positive_length=fp_length)


# ---------------------------------------------------------------------------
# scene spec text form (same key=value dialect as the pipeline config)


def parse_scene(text):
    kv = parse_kv_text(text)
    size = (640, 480)
    kwargs = {}
    curves = {}
    for key, raw in kv.items():
        try:
            if key == "size":
                a = [int(float(p)) for p in raw.replace(",", " ").split()]
                size = (a[0], a[1])
            elif key == "seed":
                kwargs["seed"] = int(raw)
            elif key == "background":
                kwargs["background"] = float(raw)
            elif key == "texture_amp":
                kwargs["texture_amp"] = float(raw)
            elif key == "offset":
                a = [float(p) for p in raw.replace(",", " ").split()]
                kwargs["offset"] = (a[0], a[1])
            elif key == "noise.count":
                kwargs["noise_count"] = int(raw)
            elif key == "noise.length":
                a = [float(p) for p in raw.replace(",", " ").split()]
                kwargs["noise_length"] = (a[0], a[1])
            elif key == "noise.intensity":
                kwargs["noise_intensity"] = float(raw)
            elif key == "shadow":
                a = [float(p) for p in raw.replace(",", " ").split()]
                kwargs["shadow"] = (a[0], a[1], a[2])
            elif key.startswith("curve."):
                _, idx, attr = key.split(".", 2)
                curves.setdefault(int(idx), {})[attr] = raw
            else:
                raise ConfigError(f"unknown scene key: {key!r}")
        except (ValueError, IndexError) as e:
            raise SpecInvalid(f"bad value for {key}: {raw!r} ({e})") from e
    curve_specs = []
    for idx in sorted(curves):
        c = curves[idx]
        if "kind" not in c or "params" not in c:
            raise SpecInvalid(f"curve.{idx} needs kind and params")
        gaps = []
        for part in c.get("gaps", "").split(","):
            part = part.strip()
            if part:
                f0, f1 = part.split(":")
                gaps.append((float(f0), float(f1)))
        curve_specs.append(CurveSpec(
            kind=c["kind"],
            params=tuple(float(p) for p in c["params"].replace(",", " ").split()),
            stroke=float(c.get("stroke", 2.0)),
            gaps=tuple(gaps)))
    return SceneSpec(size=size, curves=tuple(curve_specs), **kwargs)


def load_scene(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_scene(f.read())


def dump_scene(spec):
    pairs = [("size", f"{spec.size[0]},{spec.size[1]}"), ("seed", str(spec.seed))]
    if spec.background:
        pairs.append(("background", f"{spec.background:g}"))
    if spec.texture_amp:
        pairs.append(("texture_amp", f"{spec.texture_amp:g}"))
    if spec.offset != (0.0, 0.0):
        pairs.append(("offset", f"{spec.offset[0]:g},{spec.offset[1]:g}"))
    for i, c in enumerate(spec.curves):
        pairs.append((f"curve.{i}.kind", c.kind))
        pairs.append((f"curve.{i}.params", ",".join(f"{p:g}" for p in c.params)))
        pairs.append((f"curve.{i}.stroke", f"{c.stroke:g}"))
        if c.gaps:
            pairs.append((f"curve.{i}.gaps",
                          ",".join(f"{f0:g}:{f1:g}" for f0, f1 in c.gaps)))
    if spec.noise_count:
        pairs.append(("noise.count", str(spec.noise_count)))
        pairs.append(("noise.length", f"{spec.noise_length[0]:g},{spec.noise_length[1]:g}"))
        pairs.append(("noise.intensity", f"{spec.noise_intensity:g}"))
    if spec.shadow is not None:
        pairs.append(("shadow", ",".join(f"{v:g}" for v in spec.shadow)))
    return format_kv_text(pairs)
