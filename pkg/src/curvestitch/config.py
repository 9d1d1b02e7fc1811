"""Pipeline configuration: a flat dotted-key text format plus the typed
config object every stage reads its tunables from.

The file dialect is one ``key = value`` pair per line, ``#`` comments, and
comma-separated numbers for small vectors, e.g.::

    hough.votes_min = 10
    birdseye.src_quad = 0,0, 100,0, 100,100, 0,100
    bands = blue:90:120,green:60:90

Every key can also be overridden from the command line with
``--set key=value``. Unknown keys are rejected.
"""

from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .signature import AngleBand, validate_bands


def parse_kv_text(text):
    """Parse the flat key=value dialect into an ordered {key: raw-string}."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def format_kv_text(pairs):
    return "".join(f"{k} = {v}\n" for k, v in pairs)


def _parse_floats(raw, n=None):
    parts = [p for p in raw.replace(",", " ").split() if p]
    vals = tuple(float(p) for p in parts)
    if n is not None and len(vals) != n:
        raise ConfigError(f"expected {n} numbers, got {len(vals)}: {raw!r}")
    return vals


def _parse_bool(raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {raw!r}")


def parse_bands(raw):
    bands = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        if len(bits) != 3:
            raise ConfigError(f"band must be label:low:high, got {part!r}")
        bands.append(AngleBand(bits[0], float(bits[1]), float(bits[2])))
    if not bands:
        raise ConfigError("empty band list")
    try:
        return validate_bands(bands)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def format_bands(bands):
    return ",".join(f"{b.label}:{b.low:g}:{b.high:g}" for b in bands)


_UNIT_QUAD = (0.0, 0.0, 100.0, 0.0, 100.0, 100.0, 0.0, 100.0)


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    blur_sigma: float = 1.4
    illumination_enabled: bool = True
    illumination_tile: int = 32
    illumination_target_mean: float = 0.5
    illumination_target_std: float = 0.2
    illumination_flat_std: float = 0.02
    edge_low: float = 0.05
    edge_high: float = 0.12
    birdseye_src_quad: tuple = _UNIT_QUAD
    birdseye_dst_quad: tuple = _UNIT_QUAD
    birdseye_out_width: int = 0  # 0 means: same as input
    birdseye_out_height: int = 0
    birdseye_pixels_per_cm: float = 10.0
    hough_theta_bins: int = 180
    hough_r_resolution: float = 1.0
    hough_votes_min: int = 10
    hough_min_length: float = 5.0
    hough_max_gap: float = 2.0
    centroid_band: float = 1.0
    centroid_weight_source: str = "edge"  # "edge" or "value"
    mvt_max_pair_gap: float = 12.0
    mvt_max_angle_spread: float = 20.0
    cluster_centroid_radius: float = 12.0
    cluster_angle_tolerance: float = 10.0
    cluster_votes_min: int = 4
    signature_length: int = 32
    signature_angle_tol: float = 10.0
    signature_threshold: float = 0.9
    bands: tuple = (AngleBand("blue", 90.0, 120.0), AngleBand("green", 60.0, 90.0))
    tracker_texture_tile: int = 32
    tracker_texture_gate: float = 0.2
    tracker_max_gap_fraction: float = 0.15
    tracker_persistence_limit: int = 5
    tracker_smooth_alpha: float = 0.75


# dotted config key -> (attribute, parser, formatter)
_KEYS = {
    "seed": ("seed", int, str),
    "blur.sigma": ("blur_sigma", float, str),
    "illumination.enabled": ("illumination_enabled", _parse_bool, lambda v: "true" if v else "false"),
    "illumination.tile": ("illumination_tile", int, str),
    "illumination.target_mean": ("illumination_target_mean", float, str),
    "illumination.target_std": ("illumination_target_std", float, str),
    "illumination.flat_std": ("illumination_flat_std", float, str),
    "edge.low": ("edge_low", float, str),
    "edge.high": ("edge_high", float, str),
    "birdseye.src_quad": ("birdseye_src_quad", lambda r: _parse_floats(r, 8),
                          lambda v: ",".join(f"{x:g}" for x in v)),
    "birdseye.dst_quad": ("birdseye_dst_quad", lambda r: _parse_floats(r, 8),
                          lambda v: ",".join(f"{x:g}" for x in v)),
    "birdseye.out_width": ("birdseye_out_width", int, str),
    "birdseye.out_height": ("birdseye_out_height", int, str),
    "birdseye.pixels_per_cm": ("birdseye_pixels_per_cm", float, str),
    "hough.theta_bins": ("hough_theta_bins", int, str),
    "hough.r_resolution": ("hough_r_resolution", float, str),
    "hough.votes_min": ("hough_votes_min", int, str),
    "hough.min_length": ("hough_min_length", float, str),
    "hough.max_gap": ("hough_max_gap", float, str),
    "centroid.band": ("centroid_band", float, str),
    "centroid.weight_source": ("centroid_weight_source", str, str),
    "mvt.max_pair_gap": ("mvt_max_pair_gap", float, str),
    "mvt.max_angle_spread": ("mvt_max_angle_spread", float, str),
    "cluster.centroid_radius": ("cluster_centroid_radius", float, str),
    "cluster.angle_tolerance": ("cluster_angle_tolerance", float, str),
    "cluster.votes_min": ("cluster_votes_min", int, str),
    "signature.length": ("signature_length", int, str),
    "signature.angle_tol": ("signature_angle_tol", float, str),
    "signature.threshold": ("signature_threshold", float, str),
    "bands": ("bands", parse_bands, format_bands),
    "tracker.texture_tile": ("tracker_texture_tile", int, str),
    "tracker.texture_gate": ("tracker_texture_gate", float, str),
    "tracker.max_gap_fraction": ("tracker_max_gap_fraction", float, str),
    "tracker.persistence_limit": ("tracker_persistence_limit", int, str),
    "tracker.smooth_alpha": ("tracker_smooth_alpha", float, str),
}

_POSITIVE = (
    "blur_sigma", "illumination_tile", "edge_high", "birdseye_pixels_per_cm",
    "hough_theta_bins", "hough_r_resolution", "hough_votes_min",
    "hough_min_length", "hough_max_gap", "mvt_max_pair_gap",
    "mvt_max_angle_spread", "cluster_centroid_radius",
    "cluster_angle_tolerance", "cluster_votes_min", "signature_length",
    "tracker_texture_tile", "tracker_persistence_limit",
)


def _validate(cfg):
    for name in _POSITIVE:
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be > 0")
    if not (0.0 <= cfg.edge_low <= cfg.edge_high <= 1.0):
        raise ConfigError("need 0 <= edge.low <= edge.high <= 1")
    if cfg.centroid_weight_source not in ("edge", "value"):
        raise ConfigError("centroid.weight_source must be 'edge' or 'value'")
    if not (0.0 <= cfg.signature_threshold <= 1.0):
        raise ConfigError("signature.threshold must be in [0, 1]")
    if not (0.0 <= cfg.tracker_smooth_alpha <= 1.0):
        raise ConfigError("tracker.smooth_alpha must be in [0, 1]")
    if not (0.0 <= cfg.tracker_max_gap_fraction < 1.0):
        raise ConfigError("tracker.max_gap_fraction must be in [0, 1)")
    return cfg


def apply_settings(cfg, settings):
    """Apply {dotted key: raw string} settings on top of a config."""
    updates = {}
    for key, raw in settings.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key: {key!r}")
        attr, parse, _ = _KEYS[key]
        try:
            updates[attr] = parse(raw)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {raw!r} ({e})") from e
    return _validate(replace(cfg, **updates))


def load_config(path, overrides=()):
    """Read a config file and apply ``key=value`` override strings on top."""
    with open(path, "r", encoding="utf-8") as f:
        settings = parse_kv_text(f.read())
    cfg = apply_settings(PipelineConfig(), settings)
    return apply_overrides(cfg, overrides)


def apply_overrides(cfg, overrides):
    settings = {}
    for text in overrides:
        if "=" not in text:
            raise ConfigError(f"override must be key=value, got {text!r}")
        key, value = text.split("=", 1)
        settings[key.strip()] = value.strip()
    return apply_settings(cfg, settings) if settings else _validate(cfg)


def dump_config(cfg):
    """Render a config back into the text dialect, every key explicit."""
    pairs = []
    for key, (attr, _, fmt) in _KEYS.items():
        pairs.append((key, fmt(getattr(cfg, attr))))
    return format_kv_text(pairs)
