"""Slow, literal reference implementations used as test oracles.

Nothing here imports the package's numerical code; each function restates a
definition directly (explicit loops or window enumeration).
"""
import math
from collections import deque

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def bilinear_resize(img, out_h, out_w):
    """Evaluate the half-pixel-center bilinear formula at every output pixel."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    out = np.zeros((out_h, out_w) + img.shape[2:])
    for i in range(out_h):
        sy = min(max((i + 0.5) * h / out_h - 0.5, 0.0), h - 1)
        y0 = int(math.floor(sy))
        y1 = min(y0 + 1, h - 1)
        fy = sy - y0
        for j in range(out_w):
            sx = min(max((j + 0.5) * w / out_w - 0.5, 0.0), w - 1)
            x0 = int(math.floor(sx))
            x1 = min(x0 + 1, w - 1)
            fx = sx - x0
            out[i, j] = ((1 - fy) * ((1 - fx) * img[y0, x0] + fx * img[y0, x1])
                         + fy * ((1 - fx) * img[y1, x0] + fx * img[y1, x1]))
    return out


def edge_pad(img, r):
    """Replicate padding written out with index clamping."""
    img = np.asarray(img)
    h, w = img.shape[:2]
    rows = np.clip(np.arange(-r, h + r), 0, h - 1)
    cols = np.clip(np.arange(-r, w + r), 0, w - 1)
    return img[rows][:, cols]


def mean_filter_shifts(img, k):
    """Sum of the k*k shifted copies of an edge-padded image, divided by k*k."""
    r = k // 2
    p = edge_pad(np.asarray(img, dtype=np.float64), r)
    h, w = img.shape[:2]
    acc = np.zeros_like(np.asarray(img, dtype=np.float64))
    for dy in range(k):
        for dx in range(k):
            acc += p[dy:dy + h, dx:dx + w]
    return acc / (k * k)


def guided_filter(p, guide, r, eps):
    """Per-window linear model fit, then per-pixel averaging, all by explicit window loops."""
    p = np.asarray(p, dtype=np.float64)
    guide = np.asarray(guide, dtype=np.float64)
    h, w = p.shape
    gp, pp = edge_pad(guide, r), edge_pad(p, r)
    k = 2 * r + 1
    a = np.zeros((h, w))
    b = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            wi = gp[i:i + k, j:j + k]
            wp = pp[i:i + k, j:j + k]
            mi, mp = wi.mean(), wp.mean()
            var = ((wi - mi) ** 2).mean()
            cov = ((wi - mi) * (wp - mp)).mean()
            a[i, j] = cov / (var + eps) if var > 1e-12 else 0.0
            b[i, j] = mp - a[i, j] * mi
    ap, bp = edge_pad(a, r), edge_pad(b, r)
    q = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            q[i, j] = ap[i:i + k, j:j + k].mean() * guide[i, j] + bp[i:i + k, j:j + k].mean()
    return q


def disk_offsets(radius):
    return [(i, j) for i in range(-radius, radius + 1) for j in range(-radius, radius + 1)
            if i * i + j * j <= radius * radius]


def dilate_loops(mask, radius):
    """out[p] = 1 iff some offset o has mask[p - o] = 1 (double loop)."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    offs = disk_offsets(radius)
    out = np.zeros((h, w), dtype=bool)
    for i in range(h):
        for j in range(w):
            for di, dj in offs:
                si, sj = i - di, j - dj
                if 0 <= si < h and 0 <= sj < w and mask[si, sj]:
                    out[i, j] = True
                    break
    return out


def erode_loops(mask, radius):
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    offs = disk_offsets(radius)
    out = np.zeros((h, w), dtype=bool)
    for i in range(h):
        for j in range(w):
            out[i, j] = all(0 <= i + di < h and 0 <= j + dj < w and mask[i + di, j + dj] for di, dj in offs)
    return out


def _disk_window(radius):
    span = np.arange(-radius, radius + 1)
    return (span[:, None] ** 2 + span[None, :] ** 2) <= radius * radius


def dilate_windows(mask, radius):
    """Window enumeration: any foreground under the (point-symmetric) disk, zeros outside."""
    mask = np.asarray(mask, dtype=bool)
    win = sliding_window_view(np.pad(mask, radius), (2 * radius + 1,) * 2)
    return (win & _disk_window(radius)).any(axis=(2, 3))


def erode_windows(mask, radius):
    mask = np.asarray(mask, dtype=bool)
    win = sliding_window_view(np.pad(mask, radius), (2 * radius + 1,) * 2)
    return (win | ~_disk_window(radius)).all(axis=(2, 3))


def flood_labels(mask, connectivity):
    """Label components by flood fill from each unvisited pixel in raster order."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    if connectivity == 8:
        steps = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    else:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    labels = np.zeros((h, w), dtype=int)
    sizes = [0]
    for i in range(h):
        for j in range(w):
            if mask[i, j] and labels[i, j] == 0:
                lab = len(sizes)
                stack = [(i, j)]
                labels[i, j] = lab
                n = 0
                while stack:
                    y, x = stack.pop()
                    n += 1
                    for dy, dx in steps:
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and labels[ny, nx] == 0:
                            labels[ny, nx] = lab
                            stack.append((ny, nx))
                sizes.append(n)
    return labels, sizes


def fill_holes_flood(mask):
    """Flood background from every border pixel (4-connected); everything unreached is foreground."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    reached = np.zeros((h, w), dtype=bool)
    queue = deque()
    for i in range(h):
        for j in range(w):
            if (i in (0, h - 1) or j in (0, w - 1)) and not mask[i, j]:
                reached[i, j] = True
                queue.append((i, j))
    while queue:
        y, x = queue.popleft()
        for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and not mask[ny, nx] and not reached[ny, nx]:
                reached[ny, nx] = True
                queue.append((ny, nx))
    return ~reached


def confusion_loop(pred, gt):
    tp = fp = tn = fn = 0
    for pv, gv in zip(np.asarray(pred, dtype=bool).ravel().tolist(), np.asarray(gt, dtype=bool).ravel().tolist()):
        if pv and gv:
            tp += 1
        elif pv:
            fp += 1
        elif gv:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def conv_valid_loops(x, w, b):
    """Single-sample (H, W, C) valid correlation + bias + ReLU with explicit loops."""
    k = w.shape[0]
    h, wd, _ = x.shape
    ho, wo = h - k + 1, wd - k + 1
    out = np.zeros((ho, wo, w.shape[3]))
    for i in range(ho):
        for j in range(wo):
            for m in range(w.shape[3]):
                out[i, j, m] = max(0.0, float(np.sum(x[i:i + k, j:j + k, :] * w[:, :, :, m])) + b[m])
    return out


def padded_smoothed(img, pad, k):
    """Replicate-pad, mean-filter the padded canvas, keep the filter only on the band."""
    p = edge_pad(np.asarray(img, dtype=np.float64), pad)
    sm = mean_filter_shifts(p, k)
    h, w = img.shape[:2]
    band = np.ones(p.shape[:2], dtype=bool)
    band[pad:pad + h, pad:pad + w] = False
    p[band] = sm[band]
    return p


def in_margin(gt, coords, radius):
    """Per-coordinate set test: inside the dilation and outside the erosion of ``gt``."""
    gt = np.asarray(gt, dtype=bool)
    h, w = gt.shape
    offs = np.array(disk_offsets(radius))
    pts = np.asarray(coords)[:, None, :]
    out = []
    for sign in (-1, 1):
        q = pts + sign * offs[None]
        inside = (q[..., 0] >= 0) & (q[..., 0] < h) & (q[..., 1] >= 0) & (q[..., 1] < w)
        vals = np.zeros(inside.shape, dtype=bool)
        vals[inside] = gt[q[..., 0][inside], q[..., 1][inside]]
        out.append(vals)
    in_dilation = out[0].any(axis=1)
    in_erosion = out[1].all(axis=1)
    return in_dilation & ~in_erosion
