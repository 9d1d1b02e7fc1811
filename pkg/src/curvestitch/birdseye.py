"""Plane homography for top-down ("bird's eye") rectification plus the
pixel-to-world distance calibration.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateConfiguration
from .imaging import image_channels


@dataclass
class Homography:
    """3x3 projective map, normalized so m[2, 2] == 1."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.shape != (3, 3):
            raise DegenerateConfiguration(f"homography must be 3x3, got {m.shape}")
        if abs(np.linalg.det(m)) < 1e-12:
            raise DegenerateConfiguration("homography is singular")
        if m[2, 2] == 0.0:
            raise DegenerateConfiguration("cannot normalize: m[2][2] == 0")
        self.m = m / m[2, 2]

    def inverse(self):
        return Homography(np.linalg.inv(self.m))

    def compose(self, other):
        """Map through ``other`` first, then through self."""
        return Homography(self.m @ other.m)


@dataclass(frozen=True)
class WorldScale:
    pixels_per_cm: float = 10.0

    def __post_init__(self):
        if self.pixels_per_cm <= 0.0:
            raise ValueError(f"pixels_per_cm must be > 0, got {self.pixels_per_cm}")


def _collinear_triple(pts):
    span = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1.0)
    tol = 1e-9 * span * span
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                ax, ay = pts[i]
                bx, by = pts[j]
                cx, cy = pts[k]
                area2 = abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))
                if area2 < tol:
                    return True
    return False


def _normalize_points(pts):
    """Centre on the centroid and scale mean radius to sqrt(2)."""
    c = pts.mean(axis=0)
    d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
    s = np.sqrt(2.0) / d if d > 0 else 1.0
    t = np.array([[s, 0.0, -s * c[0]],
                  [0.0, s, -s * c[1]],
                  [0.0, 0.0, 1.0]])
    return (pts - c) * s, t


def estimate_homography(src, dst):
    """4-point direct linear transform with centring preconditioning.

    src and dst are sequences of four (x, y) points; no three points of
    either quad may be collinear. The result maps src[i] onto dst[i] to
    better than 1e-6 px.
    """
    src = np.asarray(src, dtype=np.float64).reshape(4, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(4, 2)
    if _collinear_triple(src):
        raise DegenerateConfiguration("three of the source points are collinear")
    if _collinear_triple(dst):
        raise DegenerateConfiguration("three of the destination points are collinear")
    sn, ts = _normalize_points(src)
    dn, td = _normalize_points(dst)
    rows = []
    for (x, y), (u, v) in zip(sn, dn):
        rows.append([-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u])
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v])
    a = np.asarray(rows)
    _, _, vt = np.linalg.svd(a)
    hn = vt[-1].reshape(3, 3)
    m = np.linalg.inv(td) @ hn @ ts
    return Homography(m)


def project(h, pts):
    """Apply a homography to one (x, y) point or an (n, 2) array of them."""
    p = np.asarray(pts, dtype=np.float64)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    homog = np.column_stack([p, np.ones(len(p))])
    out = homog @ h.m.T
    out = out[:, :2] / out[:, 2:3]
    return out[0] if single else out


def warp(img, h, out_size):
    """Warp an image through ``h`` into an out_size = (width, height) frame.

    Inverse mapping with bilinear sampling; samples that fall outside the
    source read as 0.
    """
    out_w, out_h = int(out_size[0]), int(out_size[1])
    hinv = np.linalg.inv(h.m)
    if image_channels(img) == 1:
        return kernels.warp_bilinear(np.ascontiguousarray(img), hinv, out_h, out_w)
    out = np.empty((out_h, out_w, 3), dtype=np.float64)
    for ch in range(3):
        out[..., ch] = kernels.warp_bilinear(np.ascontiguousarray(img[..., ch]), hinv, out_h, out_w)
    return out


def to_world(d_px, scale):
    """Pixel distance -> centimetres for a given calibration."""
    if d_px < 0:
        raise ValueError(f"distance must be >= 0, got {d_px}")
    return d_px / scale.pixels_per_cm
