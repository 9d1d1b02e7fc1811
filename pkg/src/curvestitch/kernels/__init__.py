"""Backend selection for the hot kernels.

By default the numba JIT implementations are used. Set
CURVESTITCH_DISABLE_NUMBA=1 (or "true"/"yes") to force the pure-numpy
fallbacks, e.g. on platforms without a working numba, or to compare the two
paths (see benchmarks/bench_kernels.py). The active backend name is exposed
as ``BACKEND``.
"""

import os

_DISABLE = os.environ.get("CURVESTITCH_DISABLE_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on",
)

if _DISABLE:
    from . import numpy_impl as _impl
    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dep, but degrade anyway
        from . import numpy_impl as _impl
        BACKEND = "numpy"

convolve_h = _impl.convolve_h
convolve_v = _impl.convolve_v
sobel = _impl.sobel
nms = _impl.nms
hysteresis = _impl.hysteresis
hough_accumulate = _impl.hough_accumulate
ppht = _impl.ppht
warp_bilinear = _impl.warp_bilinear
segment_centroids = _impl.segment_centroids
min_dist_sq_field = _impl.min_dist_sq_field
stamp_min_dist = _impl.stamp_min_dist

__all__ = [
    "BACKEND",
    "convolve_h",
    "convolve_v",
    "sobel",
    "nms",
    "hysteresis",
    "hough_accumulate",
    "ppht",
    "warp_bilinear",
    "segment_centroids",
    "min_dist_sq_field",
    "stamp_min_dist",
]
