"""Pure numpy/Python versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _shift_rows(a, di, fill):
    """out[i] = a[i + di], reading ``fill`` outside the frame."""
    h = a.shape[0]
    out = np.full_like(a, fill)
    if abs(di) < h:
        out[max(-di, 0):h + min(-di, 0)] = a[max(di, 0):h + min(di, 0)]
    return out


def _run_counts(mask, half):
    """Foreground count in the horizontal window ``[j - half, j + half]`` (zeros outside)."""
    h, w = mask.shape
    csum = np.zeros((h, w + 2 * half + 1), dtype=np.int32)
    np.cumsum(np.pad(mask, ((0, 0), (half, half))), axis=1, out=csum[:, 1:])
    return csum[:, 2 * half + 1:] - csum[:, :w]


def _row_runs(offsets):
    """Group offsets by row: ``{di: half_width}``; valid for disks, which are convex per row."""
    rows = {}
    for di, dj in np.asarray(offsets).tolist():
        rows.setdefault(di, []).append(dj)
    runs = {}
    for di, cols in rows.items():
        half = max(abs(c) for c in cols)
        if sorted(cols) != list(range(-half, half + 1)):
            raise ValueError("structuring element rows must be centered contiguous runs")
        runs[di] = half
    return runs


def dilate(mask, offsets):
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    out = np.zeros_like(mask)
    cache = {}
    for di, half in _row_runs(offsets).items():
        if half not in cache:
            cache[half] = (_run_counts(mask, half) > 0).astype(np.uint8)
        out |= _shift_rows(cache[half], -di, 0)
    return out


def erode(mask, offsets):
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    out = mask.copy()
    cache = {}
    for di, half in _row_runs(offsets).items():
        if half not in cache:
            cache[half] = (_run_counts(mask, half) == 2 * half + 1).astype(np.uint8)
        out &= _shift_rows(cache[half], di, 0)
    return out


def label(mask, connectivity):
    """Min-index label propagation with pointer jumping, renumbered in raster order."""
    fg = np.asarray(mask, dtype=bool)
    h, w = fg.shape
    n = h * w
    if connectivity == 8:
        steps = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        steps = [(-1, 0), (0, -1), (0, 1), (1, 0)]
    idx = np.arange(n, dtype=np.int64)
    lab = np.where(fg.ravel(), idx, n).reshape(h, w)
    padded = np.full((h + 2, w + 2), n, dtype=np.int64)
    while True:
        padded[1:-1, 1:-1] = lab
        best = lab.copy()
        for dy, dx in steps:
            np.minimum(best, padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w], out=best)
        best[~fg] = n
        flat = np.append(best.ravel(), n)
        # every label is the index of a pixel in the same component, so chase pointers
        while True:
            jumped = flat[flat]
            if np.array_equal(jumped, flat):
                break
            flat = jumped
        best = flat[:n].reshape(h, w)
        if np.array_equal(best, lab):
            break
        lab = best
    roots = np.flatnonzero(fg.ravel() & (lab.ravel() == idx))
    labels = np.zeros(n, dtype=np.int32)
    fg_flat = fg.ravel()
    labels[fg_flat] = np.searchsorted(roots, lab.ravel()[fg_flat]) + 1
    sizes = np.bincount(labels, minlength=len(roots) + 1).astype(np.int64)
    sizes[0] = 0
    return labels.reshape(h, w), sizes


def maxpool_forward(x, k, s):
    b, h, w, c = x.shape
    win = sliding_window_view(x, (k, k), axis=(1, 2))[:, ::s, ::s]
    ho, wo = win.shape[1], win.shape[2]
    flat = win.reshape(b, ho, wo, c, k * k)
    pos = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, pos[..., None], axis=-1)[..., 0]
    ky, kx = np.divmod(pos, k)
    oy = (np.arange(ho) * s)[None, :, None, None]
    ox = (np.arange(wo) * s)[None, None, :, None]
    arg = ((oy + ky) * w + ox + kx).astype(np.int32)
    return np.ascontiguousarray(out), arg


def maxpool_backward(dout, arg, h, w):
    b, ho, wo, c = dout.shape
    n_idx = np.arange(b, dtype=np.int64)[:, None, None, None]
    c_idx = np.arange(c, dtype=np.int64)[None, None, None, :]
    flat = ((n_idx * (h * w) + arg) * c + c_idx).ravel()
    dx = np.bincount(flat, weights=dout.ravel(), minlength=b * h * w * c)
    return dx.astype(dout.dtype).reshape(b, h, w, c)


def col2im(dcols, h, w):
    b, ho, wo, k, _, c = dcols.shape
    dx = np.zeros((b, h, w, c), dtype=dcols.dtype)
    for ky in range(k):
        for kx in range(k):
            dx[:, ky:ky + ho, kx:kx + wo, :] += dcols[:, :, :, ky, kx, :]
    return dx
