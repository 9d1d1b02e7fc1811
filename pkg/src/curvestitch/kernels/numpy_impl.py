"""Pure-numpy fallbacks for the JIT kernels.

Same contracts as ``numba_impl``; selected via CURVESTITCH_DISABLE_NUMBA or
when numba is unavailable. The per-pixel math is written in the same
operation order as the JIT versions, so the integer-valued kernels match
bit-for-bit; only the centroid reductions differ in summation order (numpy
sums pairwise) and agree to ~1e-12 instead.
"""

import numpy as np

TAN_22_5 = 0.41421356237309503
TAN_67_5 = 2.414213562373095


def convolve_h(src, weights):
    r = weights.shape[0] - 1
    w = src.shape[1]
    pad = np.pad(src, ((0, 0), (r, r)), mode="edge")
    acc = weights[0] * pad[:, r:r + w]
    for d in range(1, r + 1):
        acc = acc + weights[d] * (pad[:, r - d:r - d + w] + pad[:, r + d:r + d + w])
    return acc


def convolve_v(src, weights):
    r = weights.shape[0] - 1
    h = src.shape[0]
    pad = np.pad(src, ((r, r), (0, 0)), mode="edge")
    acc = weights[0] * pad[r:r + h, :]
    for d in range(1, r + 1):
        acc = acc + weights[d] * (pad[r - d:r - d + h, :] + pad[r + d:r + d + h, :])
    return acc


def sobel(src):
    p = np.pad(src, 1, mode="edge")
    h, w = src.shape
    tl = p[0:h, 0:w]
    tc = p[0:h, 1:w + 1]
    tr = p[0:h, 2:w + 2]
    ml = p[1:h + 1, 0:w]
    mr = p[1:h + 1, 2:w + 2]
    bl = p[2:h + 2, 0:w]
    bc = p[2:h + 2, 1:w + 1]
    br = p[2:h + 2, 2:w + 2]
    right = tr + 2.0 * mr + br
    left = tl + 2.0 * ml + bl
    bottom = bl + 2.0 * bc + br
    top = tl + 2.0 * tc + tr
    return right - left, bottom - top


def nms(mag, gx, gy):
    h, w = mag.shape
    ax = np.abs(gx)
    ay = np.abs(gy)
    sector_h = ay <= ax * TAN_22_5
    sector_v = ay >= ax * TAN_67_5
    sector_d1 = ~sector_h & ~sector_v & (gx * gy > 0.0)
    sector_d2 = ~sector_h & ~sector_v & ~sector_d1
    p = np.zeros((h + 2, w + 2), dtype=np.float64)
    p[1:h + 1, 1:w + 1] = mag
    n0 = np.where(sector_h, p[1:h + 1, 0:w],
         np.where(sector_v, p[0:h, 1:w + 1],
         np.where(sector_d1, p[0:h, 0:w], p[0:h, 2:w + 2])))
    n1 = np.where(sector_h, p[1:h + 1, 2:w + 2],
         np.where(sector_v, p[2:h + 2, 1:w + 1],
         np.where(sector_d1, p[2:h + 2, 2:w + 2], p[2:h + 2, 0:w])))
    keep = (mag > 0.0) & (mag >= n0) & (mag > n1)
    return np.where(keep, mag, 0.0)


def hysteresis(strong, weak):
    cur = strong.copy()
    h, w = strong.shape
    while True:
        p = np.zeros((h + 2, w + 2), dtype=bool)
        p[1:h + 1, 1:w + 1] = cur
        grown = (p[0:h, 0:w] | p[0:h, 1:w + 1] | p[0:h, 2:w + 2] |
                 p[1:h + 1, 0:w] | p[1:h + 1, 2:w + 2] |
                 p[2:h + 2, 0:w] | p[2:h + 2, 1:w + 1] | p[2:h + 2, 2:w + 2])
        nxt = cur | (weak & grown)
        if np.array_equal(nxt, cur):
            return cur
        cur = nxt


def hough_accumulate(xs, ys, cos_t, sin_t, r_min, r_res, n_rbins):
    nt = cos_t.shape[0]
    grid = np.zeros((nt, n_rbins), dtype=np.int32)
    x = xs.astype(np.float64)
    y = ys.astype(np.float64)
    for k in range(nt):
        r = x * cos_t[k] + y * sin_t[k]
        b = np.floor((r - r_min) / r_res + 0.5).astype(np.int64)
        np.add.at(grid[k], b, 1)
    return grid


def ppht(mask, order, cos_t, sin_t, r_min, r_res, n_rbins, votes_min,
         min_length, max_gap):
    h, w = mask.shape
    nt = cos_t.shape[0]
    grid = np.zeros((nt, n_rbins), dtype=np.int32)
    voted = np.zeros((h, w), dtype=np.uint8)
    kidx = np.arange(nt)
    segs = []
    for idx in order:
        y0 = int(idx) // w
        x0 = int(idx) - y0 * w
        if mask[y0, x0] == 0:
            continue
        r = x0 * cos_t + y0 * sin_t
        b = np.floor((r - r_min) / r_res + 0.5).astype(np.int64)
        grid[kidx, b] += 1
        vals = grid[kidx, b]
        best_k = int(np.argmax(vals))
        best_v = int(vals[best_k])
        voted[y0, x0] = 1
        if best_v < votes_min:
            continue
        dx = -sin_t[best_k]
        dy = cos_t[best_k]
        adx = abs(dx)
        ady = abs(dy)
        scale = 1.0 / adx if adx >= ady else 1.0 / ady
        sx = dx * scale
        sy = dy * scale
        run = [(x0, y0)]
        ex0, ey0, ex1, ey1 = x0, y0, x0, y0
        for sgn in (1.0, -1.0):
            gap = 0
            t = 1.0
            while True:
                fx = x0 + sgn * t * sx
                fy = y0 + sgn * t * sy
                xi = int(np.floor(fx + 0.5))
                yi = int(np.floor(fy + 0.5))
                if xi < 0 or xi >= w or yi < 0 or yi >= h:
                    break
                if mask[yi, xi] != 0:
                    gap = 0
                    run.append((xi, yi))
                    if sgn > 0.0:
                        ex1, ey1 = xi, yi
                    else:
                        ex0, ey0 = xi, yi
                else:
                    gap += 1
                    if gap > max_gap:
                        break
                t += 1.0
        for xi, yi in run:
            if mask[yi, xi] != 0:
                mask[yi, xi] = 0
                if voted[yi, xi] != 0:
                    voted[yi, xi] = 0
                    rr = xi * cos_t + yi * sin_t
                    bb = np.floor((rr - r_min) / r_res + 0.5).astype(np.int64)
                    grid[kidx, bb] -= 1
        ddx = float(ex1 - ex0)
        ddy = float(ey1 - ey0)
        if np.sqrt(ddx * ddx + ddy * ddy) >= min_length:
            segs.append((float(ex0), float(ey0), float(ex1), float(ey1)))
    if not segs:
        return np.empty((0, 4), dtype=np.float64)
    return np.asarray(segs, dtype=np.float64)


def warp_bilinear(src, hinv, out_h, out_w):
    h, w = src.shape
    jj, ii = np.meshgrid(np.arange(out_w, dtype=np.float64),
                         np.arange(out_h, dtype=np.float64))
    dw = hinv[2, 0] * jj + hinv[2, 1] * ii + hinv[2, 2]
    safe = dw != 0.0
    dw_safe = np.where(safe, dw, 1.0)
    sx = (hinv[0, 0] * jj + hinv[0, 1] * ii + hinv[0, 2]) / dw_safe
    sy = (hinv[1, 0] * jj + hinv[1, 1] * ii + hinv[1, 2]) / dw_safe
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    def sample(yy, xx):
        inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        yc = np.clip(yy, 0, h - 1)
        xc = np.clip(xx, 0, w - 1)
        return np.where(inside, src[yc, xc], 0.0)

    v00 = sample(y0, x0)
    v01 = sample(y0, x0 + 1)
    v10 = sample(y0 + 1, x0)
    v11 = sample(y0 + 1, x0 + 1)
    out = (v00 * (1.0 - fx) + v01 * fx) * (1.0 - fy) + \
          (v10 * (1.0 - fx) + v11 * fx) * fy
    return np.where(safe, out, 0.0)


def segment_centroids(weights, segs, band):
    h, w = weights.shape
    n = segs.shape[0]
    out = np.zeros((n, 3), dtype=np.float64)
    rad = band + 0.5
    rad2 = rad * rad
    for s in range(n):
        ax, ay, bx, by = segs[s]
        vx = bx - ax
        vy = by - ay
        vv = vx * vx + vy * vy
        xlo = max(int(np.floor(min(ax, bx) - rad)), 0)
        xhi = min(int(np.ceil(max(ax, bx) + rad)), w - 1)
        ylo = max(int(np.floor(min(ay, by) - rad)), 0)
        yhi = min(int(np.ceil(max(ay, by) + rad)), h - 1)
        if xlo > xhi or ylo > yhi:
            continue
        xs, ys = np.meshgrid(np.arange(xlo, xhi + 1, dtype=np.float64),
                             np.arange(ylo, yhi + 1, dtype=np.float64))
        px = xs - ax
        py = ys - ay
        if vv > 0.0:
            t = np.clip((px * vx + py * vy) / vv, 0.0, 1.0)
        else:
            t = np.zeros_like(px)
        dx = px - t * vx
        dy = py - t * vy
        m = (dx * dx + dy * dy) <= rad2
        f = weights[ylo:yhi + 1, xlo:xhi + 1]
        fm = np.where(m, f, 0.0)
        out[s, 0] = np.sum(fm * xs)
        out[s, 1] = np.sum(fm * ys)
        out[s, 2] = np.sum(fm)
    return out


def min_dist_sq_field(px, py, h, w):
    jj = np.arange(w, dtype=np.float64)
    ii = np.arange(h, dtype=np.float64)
    out = np.full((h, w), 1e300)
    # chunk over points to bound the broadcast working set
    step = max(1, 4_000_000 // (h * w))
    for start in range(0, px.shape[0], step):
        cx = px[start:start + step]
        cy = py[start:start + step]
        d = (jj[None, None, :] - cx[:, None, None]) ** 2 + \
            (ii[None, :, None] - cy[:, None, None]) ** 2
        np.minimum(out, d.min(axis=0), out=out)
    return out


def stamp_min_dist(field, px, py, radius):
    h, w = field.shape
    r = int(np.ceil(radius))
    for p in range(px.shape[0]):
        cx = px[p]
        cy = py[p]
        xlo = max(int(np.floor(cx)) - r, 0)
        xhi = min(int(np.ceil(cx)) + r, w - 1)
        ylo = max(int(np.floor(cy)) - r, 0)
        yhi = min(int(np.ceil(cy)) + r, h - 1)
        if xlo > xhi or ylo > yhi:
            continue
        xs, ys = np.meshgrid(np.arange(xlo, xhi + 1, dtype=np.float64),
                             np.arange(ylo, yhi + 1, dtype=np.float64))
        d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
        np.minimum(field[ylo:yhi + 1, xlo:xhi + 1], d,
                   out=field[ylo:yhi + 1, xlo:xhi + 1])
    return field
