"""Pixel-level primitives: color conversion, smoothing, illumination
correction, edge extraction, and PGM/PPM I/O.

Images are numpy float64 arrays with intensities in [0, 1]: shape (h, w)
for single-channel data, (h, w, 3) for color. 8-bit files are mapped to
[0, 1] by v / 255 at the I/O boundary and quantized back only on write, so
nothing inside the pipeline ever re-quantizes.

All operations are pure: same input bytes give identical output bytes.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BadThresholds, ChannelMismatch, InvalidSigma

# peak Sobel response on a [0, 1] image is 4 per axis
SOBEL_NORM = 4.0 * np.sqrt(2.0)


def image_channels(img):
    """1 for (h, w) arrays, 3 for (h, w, 3); anything else is an error."""
    if img.ndim == 2:
        return 1
    if img.ndim == 3 and img.shape[2] == 3:
        return 3
    raise ChannelMismatch(f"expected (h, w) or (h, w, 3) image, got shape {img.shape}")


def require_channels(img, n, op):
    if image_channels(img) != n:
        raise ChannelMismatch(f"{op} needs a {n}-channel image, got shape {img.shape}")
    return img


@dataclass(frozen=True)
class EdgeMap:
    """Gradient magnitude in [0, 1] plus the retained binary edge mask."""

    magnitude: np.ndarray
    binary: np.ndarray

    @property
    def width(self):
        return self.magnitude.shape[1]

    @property
    def height(self):
        return self.magnitude.shape[0]

    def __post_init__(self):
        if self.magnitude.shape != self.binary.shape:
            raise ChannelMismatch("magnitude and binary shapes differ")


def to_hsv(img):
    """RGB -> HSV (hexcone). H is scaled to [0, 1) meaning [0, 360) degrees."""
    require_channels(img, 3, "to_hsv")
    r = img[..., 0]
    g = img[..., 1]
    b = img[..., 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    c = maxc - minc
    chroma = c > 0.0
    safe_c = np.where(chroma, c, 1.0)
    hr = ((g - b) / safe_c) % 6.0
    hg = (b - r) / safe_c + 2.0
    hb = (r - g) / safe_c + 4.0
    hp = np.where(maxc == r, hr, np.where(maxc == g, hg, hb))
    h = np.where(chroma, hp / 6.0, 0.0)
    s = np.where(maxc > 0.0, c / np.where(maxc > 0.0, maxc, 1.0), 0.0)
    return np.stack([h, s, maxc], axis=-1)


def gaussian_kernel(sigma):
    """Half kernel (centre tap first) of a normalized Gaussian."""
    if sigma <= 0.0:
        raise InvalidSigma(f"sigma must be > 0, got {sigma}")
    radius = max(1, int(np.ceil(3.0 * sigma)))
    d = np.arange(radius + 1, dtype=np.float64)
    half = np.exp(-0.5 * (d / sigma) ** 2)
    total = half[0] + 2.0 * np.sum(half[1:])
    return half / total


def gaussian_blur(img, sigma):
    """Separable Gaussian, replicate border; preserves constants exactly."""
    weights = gaussian_kernel(sigma)
    if image_channels(img) == 1:
        return kernels.convolve_v(kernels.convolve_h(np.ascontiguousarray(img), weights), weights)
    out = np.empty_like(img)
    for ch in range(3):
        plane = np.ascontiguousarray(img[..., ch])
        out[..., ch] = kernels.convolve_v(kernels.convolve_h(plane, weights), weights)
    return out


def tile_stats(img, tile):
    """Per-tile mean and variance on a ceil(h/tile) x ceil(w/tile) grid.

    Edge tiles may be smaller; their stats cover the actual pixels.
    Returns (means, variances, centers_y, centers_x).
    """
    h, w = img.shape
    ys = np.arange(0, h, tile)
    xs = np.arange(0, w, tile)
    s1 = np.add.reduceat(np.add.reduceat(img, ys, axis=0), xs, axis=1)
    s2 = np.add.reduceat(np.add.reduceat(img * img, ys, axis=0), xs, axis=1)
    hy = np.minimum(ys + tile, h) - ys
    wx = np.minimum(xs + tile, w) - xs
    counts = np.outer(hy, wx).astype(np.float64)
    means = s1 / counts
    variances = np.maximum(s2 / counts - means * means, 0.0)
    centers_y = ys + (hy - 1) / 2.0
    centers_x = xs + (wx - 1) / 2.0
    return means, variances, centers_y, centers_x


def _tile_bilinear(grid, centers_y, centers_x, h, w):
    """Upsample a tile-grid map to full resolution, clamped past the rim."""
    if grid.shape == (1, 1):
        return np.full((h, w), grid[0, 0])
    ny, nx = grid.shape
    fy = np.interp(np.arange(h, dtype=np.float64), centers_y, np.arange(ny, dtype=np.float64))
    fx = np.interp(np.arange(w, dtype=np.float64), centers_x, np.arange(nx, dtype=np.float64))
    y0 = np.floor(fy).astype(np.int64)
    x0 = np.floor(fx).astype(np.int64)
    y1 = np.minimum(y0 + 1, ny - 1)
    x1 = np.minimum(x0 + 1, nx - 1)
    ty = (fy - y0)[:, None]
    tx = (fx - x0)[None, :]
    g00 = grid[y0[:, None], x0[None, :]]
    g01 = grid[y0[:, None], x1[None, :]]
    g10 = grid[y1[:, None], x0[None, :]]
    g11 = grid[y1[:, None], x1[None, :]]
    return (g00 * (1.0 - tx) + g01 * tx) * (1.0 - ty) + (g10 * (1.0 - tx) + g11 * tx) * ty


def correct_illumination(img, tile=32, target_mean=0.5, target_std=0.2,
                         flat_std=0.02, eps=1e-6):
    """Local mean/contrast equalization of the V channel of an HSV image.

    Per-tile V statistics are bilinearly blended between tile centres and
    each pixel is pulled toward the target mean/contrast. The pull is gated
    by local contrast (full strength above flat_std, none at zero) so flat
    regions pass through untouched; because the gate saturates, the result
    is insensitive to a global gain on V wherever the scene has texture.
    H and S are returned unchanged; V is clipped to [0, 1].
    """
    require_channels(img, 3, "correct_illumination")
    v = img[..., 2]
    h, w = v.shape
    t = min(tile, h, w)
    means, variances, cy, cx = tile_stats(v, t)
    m_map = _tile_bilinear(means, cy, cx, h, w)
    s_map = _tile_bilinear(np.sqrt(variances), cy, cx, h, w)
    lam = np.clip(s_map / flat_std, 0.0, 1.0)
    eq = (v - m_map) / (s_map + eps) * target_std + target_mean
    out_v = np.clip((1.0 - lam) * v + lam * eq, 0.0, 1.0)
    out = img.copy()
    out[..., 2] = out_v
    return out


def edge_detect(img, low, high):
    """Sobel magnitude + thinning + hysteresis, thresholds in [0, 1].

    The returned magnitude is the raw (pre-thinning) normalized gradient,
    so every retained binary pixel satisfies magnitude >= low.
    """
    require_channels(img, 1, "edge_detect")
    if not (0.0 <= low <= high <= 1.0):
        raise BadThresholds(f"need 0 <= low <= high <= 1, got low={low} high={high}")
    gx, gy = kernels.sobel(np.ascontiguousarray(img))
    mag = np.sqrt(gx * gx + gy * gy) / SOBEL_NORM
    thin = kernels.nms(mag, gx, gy)
    strong = (thin >= high) & (thin > 0.0)
    weak = (thin >= low) & (thin > 0.0)
    binary = kernels.hysteresis(strong, weak)
    return EdgeMap(magnitude=mag, binary=np.asarray(binary, dtype=bool))


# ---------------------------------------------------------------------------
# binary PGM (P5) / PPM (P6), 8-bit


def read_pnm(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] == b"P5":
        channels = 1
    elif data[:2] == b"P6":
        channels = 3
    else:
        raise ValueError(f"{path}: not a binary PGM/PPM file")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit files supported (maxval={maxval})")
    n = w * h * channels
    raw = np.frombuffer(data, dtype=np.uint8, count=n, offset=pos)
    img = raw.astype(np.float64) / 255.0
    if channels == 1:
        return img.reshape(h, w)
    return img.reshape(h, w, 3)


def write_pnm(path, img):
    channels = image_channels(img)
    h, w = img.shape[:2]
    magic = b"P5" if channels == 1 else b"P6"
    payload = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n255\n" % (w, h))
        f.write(payload.tobytes())
