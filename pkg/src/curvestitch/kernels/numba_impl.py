"""Hot inner loops, JIT-compiled with numba.

Every function here has a matching pure-numpy twin in ``numpy_impl`` with
identical semantics; the arithmetic is written in the same order in both so
the integer-valued kernels (Hough voting, segment walking, hysteresis) agree
bit-for-bit and the float kernels agree to the last ulp or within ~1e-12
where the reduction order necessarily differs (centroid sums).

All image arrays are float64, row-major, (h, w).
"""

import numpy as np
from numba import njit

TAN_22_5 = 0.41421356237309503
TAN_67_5 = 2.414213562373095


@njit(cache=True)
def convolve_h(src, weights):
    """Horizontal pass of a separable symmetric kernel, replicate border.

    weights is the half kernel: weights[0] is the centre tap, weights[d]
    the tap at offset +-d. Accumulating the mirrored pair (left + right)
    before scaling keeps the pass exactly symmetric under image mirroring.
    """
    h, w = src.shape
    r = weights.shape[0] - 1
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = weights[0] * src[y, x]
            for d in range(1, r + 1):
                xl = x - d
                if xl < 0:
                    xl = 0
                xr = x + d
                if xr > w - 1:
                    xr = w - 1
                acc += weights[d] * (src[y, xl] + src[y, xr])
            out[y, x] = acc
    return out


@njit(cache=True)
def convolve_v(src, weights):
    """Vertical pass of a separable symmetric kernel, replicate border."""
    h, w = src.shape
    r = weights.shape[0] - 1
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = weights[0] * src[y, x]
            for d in range(1, r + 1):
                yl = y - d
                if yl < 0:
                    yl = 0
                yr = y + d
                if yr > h - 1:
                    yr = h - 1
                acc += weights[d] * (src[yl, x] + src[yr, x])
            out[y, x] = acc
    return out


@njit(cache=True)
def sobel(src):
    """3x3 Sobel gradients with replicate border. Returns (gx, gy)."""
    h, w = src.shape
    gx = np.empty((h, w), dtype=np.float64)
    gy = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        ym = y - 1 if y > 0 else 0
        yp = y + 1 if y < h - 1 else h - 1
        for x in range(w):
            xm = x - 1 if x > 0 else 0
            xp = x + 1 if x < w - 1 else w - 1
            right = src[ym, xp] + 2.0 * src[y, xp] + src[yp, xp]
            left = src[ym, xm] + 2.0 * src[y, xm] + src[yp, xm]
            bottom = src[yp, xm] + 2.0 * src[yp, x] + src[yp, xp]
            top = src[ym, xm] + 2.0 * src[ym, x] + src[ym, xp]
            gx[y, x] = right - left
            gy[y, x] = bottom - top
    return gx, gy


@njit(cache=True)
def nms(mag, gx, gy):
    """Non-maximum suppression along the quantized gradient direction.

    Ties are broken asymmetrically (>= toward the negative neighbour,
    > toward the positive one) so a two-pixel plateau keeps exactly one
    pixel. Out-of-bounds neighbours count as 0.
    """
    h, w = mag.shape
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            m = mag[y, x]
            if m <= 0.0:
                continue
            ax = abs(gx[y, x])
            ay = abs(gy[y, x])
            if ay <= ax * TAN_22_5:
                ay0, ax0, ay1, ax1 = y, x - 1, y, x + 1
            elif ay >= ax * TAN_67_5:
                ay0, ax0, ay1, ax1 = y - 1, x, y + 1, x
            elif gx[y, x] * gy[y, x] > 0.0:
                ay0, ax0, ay1, ax1 = y - 1, x - 1, y + 1, x + 1
            else:
                ay0, ax0, ay1, ax1 = y - 1, x + 1, y + 1, x - 1
            n0 = mag[ay0, ax0] if 0 <= ay0 < h and 0 <= ax0 < w else 0.0
            n1 = mag[ay1, ax1] if 0 <= ay1 < h and 0 <= ax1 < w else 0.0
            if m >= n0 and m > n1:
                out[y, x] = m
    return out


@njit(cache=True)
def hysteresis(strong, weak):
    """Grow strong seeds through weak pixels, 8-connected."""
    h, w = strong.shape
    out = np.zeros((h, w), dtype=np.uint8)
    stack_y = np.empty(h * w, dtype=np.int64)
    stack_x = np.empty(h * w, dtype=np.int64)
    top = 0
    for y in range(h):
        for x in range(w):
            if strong[y, x] and not out[y, x]:
                out[y, x] = 1
                stack_y[top] = y
                stack_x[top] = x
                top += 1
                while top > 0:
                    top -= 1
                    cy = stack_y[top]
                    cx = stack_x[top]
                    for dy in range(-1, 2):
                        ny = cy + dy
                        if ny < 0 or ny >= h:
                            continue
                        for dx in range(-1, 2):
                            nx = cx + dx
                            if nx < 0 or nx >= w:
                                continue
                            if weak[ny, nx] and not out[ny, nx]:
                                out[ny, nx] = 1
                                stack_y[top] = ny
                                stack_x[top] = nx
                                top += 1
    return out.astype(np.bool_)


@njit(cache=True)
def hough_accumulate(xs, ys, cos_t, sin_t, r_min, r_res, n_rbins):
    """Dense vote grid: grid[theta_bin, r_bin] over the given edge pixels."""
    nt = cos_t.shape[0]
    grid = np.zeros((nt, n_rbins), dtype=np.int32)
    for i in range(xs.shape[0]):
        x = float(xs[i])
        y = float(ys[i])
        for k in range(nt):
            r = x * cos_t[k] + y * sin_t[k]
            b = int(np.floor((r - r_min) / r_res + 0.5))
            grid[k, b] += 1
    return grid


@njit(cache=True)
def ppht(mask, order, cos_t, sin_t, r_min, r_res, n_rbins, votes_min,
         min_length, max_gap):
    """Progressive probabilistic Hough: sample, vote, walk, retire.

    mask is consumed in place (pass a copy). order lists flattened pixel
    indices in the randomized visiting order. Each visited live pixel votes
    its full sinusoid; when its best bin reaches votes_min the matching line
    is walked through the mask in both directions, chaining runs separated
    by <= max_gap. The walked pixels are always retired (cleared and
    un-voted); the run is emitted as a segment only when its chord is at
    least min_length. Returns an (n, 4) array of x0, y0, x1, y1.
    """
    h, w = mask.shape
    nt = cos_t.shape[0]
    grid = np.zeros((nt, n_rbins), dtype=np.int32)
    voted = np.zeros((h, w), dtype=np.uint8)
    cap_run = 2 * (h + w) + 8
    run_x = np.empty(cap_run, dtype=np.int64)
    run_y = np.empty(cap_run, dtype=np.int64)
    segs = np.empty((order.shape[0], 4), dtype=np.float64)
    nseg = 0
    for oi in range(order.shape[0]):
        idx = order[oi]
        y0 = idx // w
        x0 = idx - y0 * w
        if mask[y0, x0] == 0:
            continue
        best_v = -1
        best_k = 0
        for k in range(nt):
            r = x0 * cos_t[k] + y0 * sin_t[k]
            b = int(np.floor((r - r_min) / r_res + 0.5))
            grid[k, b] += 1
            if grid[k, b] > best_v:
                best_v = grid[k, b]
                best_k = k
        voted[y0, x0] = 1
        if best_v < votes_min:
            continue
        # unit step along the dominant axis of the line direction
        dx = -sin_t[best_k]
        dy = cos_t[best_k]
        adx = abs(dx)
        ady = abs(dy)
        scale = 1.0 / adx if adx >= ady else 1.0 / ady
        sx = dx * scale
        sy = dy * scale
        nrun = 0
        run_x[nrun] = x0
        run_y[nrun] = y0
        nrun += 1
        ex0 = x0
        ey0 = y0
        ex1 = x0
        ey1 = y0
        for direction in range(2):
            sgn = 1.0 if direction == 0 else -1.0
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
                    run_x[nrun] = xi
                    run_y[nrun] = yi
                    nrun += 1
                    if direction == 0:
                        ex1 = xi
                        ey1 = yi
                    else:
                        ex0 = xi
                        ey0 = yi
                else:
                    gap += 1
                    if gap > max_gap:
                        break
                t += 1.0
        for i in range(nrun):
            xi = run_x[i]
            yi = run_y[i]
            if mask[yi, xi] != 0:
                mask[yi, xi] = 0
                if voted[yi, xi] != 0:
                    voted[yi, xi] = 0
                    for k in range(nt):
                        r = xi * cos_t[k] + yi * sin_t[k]
                        b = int(np.floor((r - r_min) / r_res + 0.5))
                        grid[k, b] -= 1
        ddx = float(ex1 - ex0)
        ddy = float(ey1 - ey0)
        if np.sqrt(ddx * ddx + ddy * ddy) >= min_length:
            segs[nseg, 0] = ex0
            segs[nseg, 1] = ey0
            segs[nseg, 2] = ex1
            segs[nseg, 3] = ey1
            nseg += 1
    return segs[:nseg].copy()


@njit(cache=True)
def warp_bilinear(src, hinv, out_h, out_w):
    """Inverse-map warp with bilinear sampling; outside-source reads 0."""
    h, w = src.shape
    out = np.zeros((out_h, out_w), dtype=np.float64)
    for i in range(out_h):
        for j in range(out_w):
            dw = hinv[2, 0] * j + hinv[2, 1] * i + hinv[2, 2]
            if dw == 0.0:
                continue
            sx = (hinv[0, 0] * j + hinv[0, 1] * i + hinv[0, 2]) / dw
            sy = (hinv[1, 0] * j + hinv[1, 1] * i + hinv[1, 2]) / dw
            x0 = int(np.floor(sx))
            y0 = int(np.floor(sy))
            fx = sx - x0
            fy = sy - y0
            v00 = src[y0, x0] if 0 <= y0 < h and 0 <= x0 < w else 0.0
            v01 = src[y0, x0 + 1] if 0 <= y0 < h and 0 <= x0 + 1 < w else 0.0
            v10 = src[y0 + 1, x0] if 0 <= y0 + 1 < h and 0 <= x0 < w else 0.0
            v11 = src[y0 + 1, x0 + 1] if 0 <= y0 + 1 < h and 0 <= x0 + 1 < w else 0.0
            out[i, j] = (v00 * (1.0 - fx) + v01 * fx) * (1.0 - fy) + \
                        (v10 * (1.0 - fx) + v11 * fx) * fy
    return out


@njit(cache=True)
def segment_centroids(weights, segs, band):
    """Intensity-weighted first moments over a thickened segment corridor.

    For each segment, pixels whose centre lies within band + 0.5 of the
    segment contribute weight w = weights[y, x]. Returns (n, 3) sums:
    sum(w*x), sum(w*y), sum(w).
    """
    h, w = weights.shape
    n = segs.shape[0]
    out = np.zeros((n, 3), dtype=np.float64)
    rad = band + 0.5
    rad2 = rad * rad
    for s in range(n):
        ax = segs[s, 0]
        ay = segs[s, 1]
        bx = segs[s, 2]
        by = segs[s, 3]
        vx = bx - ax
        vy = by - ay
        vv = vx * vx + vy * vy
        xlo = int(np.floor(min(ax, bx) - rad))
        xhi = int(np.ceil(max(ax, bx) + rad))
        ylo = int(np.floor(min(ay, by) - rad))
        yhi = int(np.ceil(max(ay, by) + rad))
        if xlo < 0:
            xlo = 0
        if ylo < 0:
            ylo = 0
        if xhi > w - 1:
            xhi = w - 1
        if yhi > h - 1:
            yhi = h - 1
        swx = 0.0
        swy = 0.0
        sw = 0.0
        for yi in range(ylo, yhi + 1):
            for xi in range(xlo, xhi + 1):
                px = xi - ax
                py = yi - ay
                t = 0.0
                if vv > 0.0:
                    t = (px * vx + py * vy) / vv
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                dx = px - t * vx
                dy = py - t * vy
                if dx * dx + dy * dy <= rad2:
                    f = weights[yi, xi]
                    sw += f
                    swx += f * xi
                    swy += f * yi
        out[s, 0] = swx
        out[s, 1] = swy
        out[s, 2] = sw
    return out


@njit(cache=True)
def min_dist_sq_field(px, py, h, w):
    """Brute-force squared distance from every pixel centre to a point set."""
    out = np.empty((h, w), dtype=np.float64)
    n = px.shape[0]
    for i in range(h):
        for j in range(w):
            best = 1e300
            for p in range(n):
                dx = j - px[p]
                dy = i - py[p]
                d = dx * dx + dy * dy
                if d < best:
                    best = d
            out[i, j] = best
    return out


@njit(cache=True)
def stamp_min_dist(field, px, py, radius):
    """Lower a min-distance field around each point, within a square box.

    field holds distances (not squared) and is updated in place; used for
    anti-aliased stroke rendering where only a narrow corridor matters.
    """
    h, w = field.shape
    r = int(np.ceil(radius))
    for p in range(px.shape[0]):
        cx = px[p]
        cy = py[p]
        xlo = int(np.floor(cx)) - r
        xhi = int(np.ceil(cx)) + r
        ylo = int(np.floor(cy)) - r
        yhi = int(np.ceil(cy)) + r
        if xlo < 0:
            xlo = 0
        if ylo < 0:
            ylo = 0
        if xhi > w - 1:
            xhi = w - 1
        if yhi > h - 1:
            yhi = h - 1
        for yi in range(ylo, yhi + 1):
            for xi in range(xlo, xhi + 1):
                dx = xi - cx
                dy = yi - cy
                d = np.sqrt(dx * dx + dy * dy)
                if d < field[yi, xi]:
                    field[yi, xi] = d
    return field
