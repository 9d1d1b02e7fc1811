"""End-to-end per-frame orchestration.

Stage order: HSV conversion -> illumination correction -> Gaussian blur of
V -> bird's-eye warp -> edge extraction -> probabilistic Hough segments ->
weighted centroids -> clustering -> vote thresholding -> per-cluster
tangent fields -> signatures, classification and band labels -> gap filling
and smoothing against the previous frame. Detection runs in the rectified
plane, where the angle bands are physically meaningful.

Per-frame results serialize as one JSON object per line; coordinates are
written with 2 decimals and angles with 3, so identical runs produce
byte-identical records. A frame that fails mid-sequence reports its error
in its own record instead of aborting the run.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import birdseye, cluster, curvemath, hough, imaging, kernels, signature, tracker
from .errors import CurveStitchError, StageError
from .signature import CurveClass

STAGES = ("hsv", "illumination", "blur", "warp", "edges", "hough",
          "centroids", "cluster", "tangents", "signature", "tracking")

OVERLAY_PALETTE = {
    "blue": (0.25, 0.4, 1.0),
    "green": (0.2, 0.9, 0.3),
    "red": (1.0, 0.25, 0.2),
    "yellow": (1.0, 0.85, 0.1),
    None: (1.0, 0.55, 0.1),
}


@dataclass
class LaneRecord:
    polyline_px: np.ndarray
    polyline_cm: np.ndarray
    band: str
    signature_score: float
    curve_class: str
    vote: int
    mass: float


@dataclass
class DetectionResult:
    frame_index: int
    lanes: list
    tracker_reset: bool = False
    gaps_filled: int = 0
    error: str = None
    timing_ms: dict = field(default_factory=dict)

    def to_record(self, include_timing=True):
        """Plain-dict form with fixed key order and fixed rounding."""
        lanes = []
        for lane in self.lanes:
            lanes.append({
                "band": lane.band,
                "curve_class": lane.curve_class,
                "signature_score": round(float(lane.signature_score), 4),
                "vote": int(lane.vote),
                "mass": round(float(lane.mass), 3),
                "polyline_px": [[round(float(x), 2), round(float(y), 2)]
                                for x, y in lane.polyline_px],
                "polyline_cm": [[round(float(x), 2), round(float(y), 2)]
                                for x, y in lane.polyline_cm],
            })
        rec = {
            "frame_index": self.frame_index,
            "tracker_reset": self.tracker_reset,
            "gaps_filled": self.gaps_filled,
            "error": self.error,
            "lanes": lanes,
        }
        if include_timing:
            rec["timing_ms"] = {k: round(float(v), 3) for k, v in self.timing_ms.items()}
        return rec

    def to_json(self, include_timing=True):
        return json.dumps(self.to_record(include_timing), separators=(",", ":"))


@dataclass
class TrackerState:
    model: object = None  # previous LaneModel
    texture: object = None  # previous TextureDescriptor
    frame_index: int = -1


class _StageTimer:
    def __init__(self):
        self.timing = {name: 0.0 for name in STAGES}
        self._t0 = None
        self._name = None

    def start(self, name):
        self.stop()
        self._name = name
        self._t0 = time.perf_counter()

    def stop(self):
        if self._name is not None:
            self.timing[self._name] += (time.perf_counter() - self._t0) * 1000.0
            self._name = None

    def total(self):
        return sum(self.timing.values())


def _promote_to_hsv(img):
    """3-channel frames convert; single-channel frames become V directly."""
    if imaging.image_channels(img) == 3:
        return imaging.to_hsv(img)
    hsv = np.zeros(img.shape + (3,), dtype=np.float64)
    hsv[..., 2] = img
    return hsv


def _polyline_from_samples(samples):
    pts = np.array([[s.x, s.y] for s in samples], dtype=np.float64)
    ext = pts.max(axis=0) - pts.min(axis=0)
    axis = 0 if ext[0] >= ext[1] else 1
    order = np.argsort(pts[:, axis], kind="stable")
    pts = pts[order]
    rows = []
    i = 0
    while i < len(pts):
        j = i
        while j + 1 < len(pts) and pts[j + 1, axis] == pts[i, axis]:
            j += 1
        rows.append(pts[i:j + 1].mean(axis=0))
        i = j + 1
    poly = np.array(rows)
    return poly if len(poly) >= 2 else None


def _homography_from_config(cfg):
    src = np.asarray(cfg.birdseye_src_quad, dtype=np.float64).reshape(4, 2)
    dst = np.asarray(cfg.birdseye_dst_quad, dtype=np.float64).reshape(4, 2)
    return birdseye.estimate_homography(src, dst)


def _empty_model(frame_index):
    return tracker.LaneModel(polylines=[], band_labels=[], tangent_fields=[],
                             frame_index=frame_index)


def detect_frame(img, cfg, state=None, library=None):
    """Run the full detection stack on one frame.

    Returns (DetectionResult, new TrackerState). ``state`` threads the
    previous frame's lane model and texture; pass None (or a fresh
    TrackerState) for the first frame. Module errors surface as StageError
    tagged with the failing stage.
    """
    state = state or TrackerState()
    frame_index = state.frame_index + 1
    timer = _StageTimer()
    stage = "hsv"
    try:
        timer.start("hsv")
        hsv = _promote_to_hsv(img)

        stage = "illumination"
        timer.start("illumination")
        if cfg.illumination_enabled:
            hsv = imaging.correct_illumination(
                hsv, tile=cfg.illumination_tile,
                target_mean=cfg.illumination_target_mean,
                target_std=cfg.illumination_target_std,
                flat_std=cfg.illumination_flat_std)

        stage = "blur"
        timer.start("blur")
        v = imaging.gaussian_blur(hsv[..., 2], cfg.blur_sigma)

        stage = "warp"
        timer.start("warp")
        hmat = _homography_from_config(cfg)
        out_w = cfg.birdseye_out_width or v.shape[1]
        out_h = cfg.birdseye_out_height or v.shape[0]
        warped = birdseye.warp(v, hmat, (out_w, out_h))

        stage = "edges"
        timer.start("edges")
        edges = imaging.edge_detect(warped, cfg.edge_low, cfg.edge_high)

        stage = "hough"
        timer.start("hough")
        segments = []
        if edges.binary.any():
            params = hough.HoughParams(
                theta_bins=cfg.hough_theta_bins,
                r_resolution=cfg.hough_r_resolution,
                votes_min=cfg.hough_votes_min,
                min_length=cfg.hough_min_length,
                max_gap=cfg.hough_max_gap)
            segments = hough.probabilistic_lines(edges, params, cfg.seed)

        stage = "centroids"
        timer.start("centroids")
        weight_img = edges.magnitude if cfg.centroid_weight_source == "edge" else warped
        kept, cents = curvemath.weighted_centroids(weight_img, segments,
                                                   band=cfg.centroid_band)

        stage = "cluster"
        timer.start("cluster")
        survivors = []
        if kept:
            clusters = cluster.cluster_lines(list(zip(kept, cents)),
                                             cluster.ClusterParams(
                                                 centroid_radius=cfg.cluster_centroid_radius,
                                                 angle_tolerance=cfg.cluster_angle_tolerance,
                                                 votes_min=cfg.cluster_votes_min))
            survivors = cluster.threshold_votes(clusters, cfg.cluster_votes_min)

        stage = "tangents"
        timer.start("tangents")
        mvt_cfg = curvemath.MvtConfig(max_pair_gap=cfg.mvt_max_pair_gap,
                                      max_angle_spread=cfg.mvt_max_angle_spread)
        lane_entries = []
        for c in survivors:
            segs = [s for s, _ in c.members]
            samples = curvemath.tangent_field(weight_img, segs, mvt_cfg,
                                              band=cfg.centroid_band)
            if len(samples) < 2:
                continue
            poly = _polyline_from_samples(samples)
            if poly is None:
                continue
            lane_entries.append((c, samples, poly))

        stage = "signature"
        timer.start("signature")
        if library is None:
            library = signature.default_library(cfg.signature_length)
        model_polys = []
        model_bands = []
        model_fields = []
        model_meta = []
        for c, samples, poly in lane_entries:
            band = signature.assign_band(c.representative[1], cfg.bands)
            try:
                sig = signature.build_signature(samples, cfg.signature_length)
                cls, score = signature.classify_curve(
                    sig, library, cfg.signature_angle_tol, cfg.signature_threshold)
            except CurveStitchError:
                cls, score = CurveClass.UNKNOWN, 0.0
            model_polys.append(poly)
            model_bands.append(band)
            model_fields.append(samples)
            model_meta.append({"vote": c.vote, "mass": c.mass,
                               "curve_class": cls.value, "signature_score": score})

        stage = "tracking"
        timer.start("tracking")
        current = tracker.LaneModel(polylines=model_polys, band_labels=model_bands,
                                    tangent_fields=model_fields,
                                    frame_index=frame_index, meta=model_meta)
        texture = tracker.texture_descriptor(
            warped, min(cfg.tracker_texture_tile, warped.shape[0], warped.shape[1]))
        reset = False
        previous = state.model
        if previous is not None and state.texture is not None:
            if tracker.texture_distance(texture, state.texture) > cfg.tracker_texture_gate:
                reset = True
                previous = None
        if previous is not None:
            current = tracker.fill_discontinuities(
                current, previous,
                max_gap_fraction=cfg.tracker_max_gap_fraction,
                persistence_limit=cfg.tracker_persistence_limit)
            current = tracker.smooth_model(current, previous, cfg.tracker_smooth_alpha)
        timer.stop()
    except CurveStitchError as e:
        timer.stop()
        raise StageError(stage, e) from e

    scale = birdseye.WorldScale(cfg.birdseye_pixels_per_cm)
    lanes = []
    for i, poly in enumerate(current.polylines):
        meta = current.meta[i] or {"vote": 0, "mass": 0.0,
                                   "curve_class": CurveClass.UNKNOWN.value,
                                   "signature_score": 0.0}
        lanes.append(LaneRecord(
            polyline_px=poly,
            polyline_cm=poly / scale.pixels_per_cm,
            band=current.band_labels[i],
            signature_score=meta["signature_score"],
            curve_class=meta["curve_class"],
            vote=meta["vote"],
            mass=meta["mass"]))
    timing = dict(timer.timing)
    timing["total"] = timer.total()
    result = DetectionResult(frame_index=frame_index, lanes=lanes,
                             tracker_reset=reset,
                             gaps_filled=current.gaps_filled,
                             timing_ms=timing)
    new_state = TrackerState(model=current, texture=texture, frame_index=frame_index)
    return result, new_state


def run_sequence(frames, cfg, library=None):
    """Fold detect_frame over an ordered frame sequence.

    One result per frame even on failure: a frame whose detection raises
    records the error, contributes no lanes, and resets the tracker.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("run_sequence needs at least one frame")
    if library is None:
        library = signature.default_library(cfg.signature_length)
    state = TrackerState()
    results = []
    for img in frames:
        try:
            result, state = detect_frame(img, cfg, state, library=library)
        except CurveStitchError as e:
            frame_index = state.frame_index + 1
            result = DetectionResult(frame_index=frame_index, lanes=[],
                                     error=str(e))
            state = TrackerState(frame_index=frame_index)
        results.append(result)
    return results


def render_overlay(img, result, bands=None):
    """Draw each lane polyline in its band colour, 2 px wide.

    Returns a 3-channel copy; a result without lanes yields the input
    converted to 3 channels. ``bands`` is accepted for palette remapping
    symmetry but the palette is keyed by band label.
    """
    if imaging.image_channels(img) == 1:
        canvas = np.repeat(img[:, :, None], 3, axis=2).astype(np.float64)
    else:
        canvas = img.astype(np.float64).copy()
    h, w = canvas.shape[:2]
    for lane in result.lanes:
        color = OVERLAY_PALETTE.get(lane.band, OVERLAY_PALETTE[None])
        poly = np.asarray(lane.polyline_px, dtype=np.float64)
        if len(poly) < 2:
            continue
        seg = np.diff(poly, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        total = seg_len.sum()
        n = max(int(total / 0.35) + 1, 2)
        t = np.linspace(0.0, 1.0, n) * total
        cum = np.concatenate([[0.0], np.cumsum(seg_len)])
        idx = np.clip(np.searchsorted(cum, t, side="right") - 1, 0, len(seg) - 1)
        denom = np.where(seg_len[idx] > 0, seg_len[idx], 1.0)
        local = (t - cum[idx]) / denom
        pts = poly[idx] + local[:, None] * seg[idx]
        fld = np.full((h, w), 1e30)
        kernels.stamp_min_dist(fld, np.ascontiguousarray(pts[:, 0]),
                               np.ascontiguousarray(pts[:, 1]), 2.5)
        alpha = np.clip(1.5 - fld, 0.0, 1.0)
        for ch in range(3):
            canvas[..., ch] = canvas[..., ch] * (1.0 - alpha) + color[ch] * alpha
    return np.clip(canvas, 0.0, 1.0)
