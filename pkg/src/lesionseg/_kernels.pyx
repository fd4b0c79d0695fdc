# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a numpy twin in :mod:`lesionseg._fallback` with the
same signature and results; :mod:`lesionseg._backend` picks one at import.
"""
import numpy as np
cimport numpy as cnp

ctypedef fused real:
    float
    double


def _row_runs(offsets):
    """Offsets grouped by row as ``(di, half_width)`` arrays; rows must be centered contiguous runs."""
    rows = {}
    for di, dj in np.asarray(offsets).tolist():
        rows.setdefault(di, []).append(dj)
    dis, halves = [], []
    for di, cols in sorted(rows.items()):
        half = max(abs(c) for c in cols)
        if sorted(cols) != list(range(-half, half + 1)):
            raise ValueError("structuring element rows must be centered contiguous runs")
        dis.append(di)
        halves.append(half)
    return np.asarray(dis, dtype=np.intp), np.asarray(halves, dtype=np.intp)


def _prefix(const unsigned char[:, ::1] mask):
    """Row-wise prefix sums with a leading zero column."""
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1], i, j
    out_arr = np.zeros((h, w + 1), dtype=np.int32)
    cdef int[:, ::1] out = out_arr
    for i in range(h):
        for j in range(w):
            out[i, j + 1] = out[i, j] + mask[i, j]
    return out_arr


def dilate(const unsigned char[:, ::1] mask, offsets):
    """out[p] = 1 iff mask[p - o] = 1 for some offset o; outside the frame reads 0."""
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    dis_arr, halves_arr = _row_runs(offsets)
    cdef Py_ssize_t[::1] dis = dis_arr, halves = halves_arr
    cdef int[:, ::1] pre = _prefix(mask)
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t n = dis.shape[0], i, j, k, si, lo, hi
    with nogil:
        for i in range(h):
            for k in range(n):
                si = i - dis[k]
                if si < 0 or si >= h:
                    continue
                for j in range(w):
                    if out[i, j]:
                        continue
                    lo = j - halves[k]
                    hi = j + halves[k] + 1
                    if lo < 0:
                        lo = 0
                    if hi > w:
                        hi = w
                    if pre[si, hi] > pre[si, lo]:
                        out[i, j] = 1
    return out_arr


def erode(const unsigned char[:, ::1] mask, offsets):
    """out[p] = 1 iff mask[p + o] = 1 for every offset o; outside the frame reads 0."""
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    dis_arr, halves_arr = _row_runs(offsets)
    cdef Py_ssize_t[::1] dis = dis_arr, halves = halves_arr
    cdef int[:, ::1] pre = _prefix(mask)
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t n = dis.shape[0], i, j, k, si, half
    cdef unsigned char keep
    with nogil:
        for i in range(h):
            for j in range(w):
                if not mask[i, j]:
                    continue
                keep = 1
                for k in range(n):
                    si = i + dis[k]
                    half = halves[k]
                    if si < 0 or si >= h or j - half < 0 or j + half >= w \
                            or pre[si, j + half + 1] - pre[si, j - half] != 2 * half + 1:
                        keep = 0
                        break
                out[i, j] = keep
    return out_arr


cdef Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t x) noexcept nogil:
    cdef Py_ssize_t root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


cdef inline void _union(Py_ssize_t[::1] parent, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    a = _find(parent, a)
    b = _find(parent, b)
    # smaller index wins, so roots are each component's first raster pixel
    if a < b:
        parent[b] = a
    elif b < a:
        parent[a] = b


def label(const unsigned char[:, ::1] mask, int connectivity):
    """Two-pass union-find labeling; labels numbered by first raster pixel."""
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    cdef Py_ssize_t i, j, p, root, nlab = 0
    parent_arr = np.arange(h * w, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = parent_arr
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    cdef int[::1] root_label
    cdef bint diag = connectivity == 8
    for i in range(h):
        for j in range(w):
            if not mask[i, j]:
                continue
            p = i * w + j
            if j > 0 and mask[i, j - 1]:
                _union(parent, p, p - 1)
            if i > 0:
                if mask[i - 1, j]:
                    _union(parent, p, p - w)
                if diag:
                    if j > 0 and mask[i - 1, j - 1]:
                        _union(parent, p, p - w - 1)
                    if j + 1 < w and mask[i - 1, j + 1]:
                        _union(parent, p, p - w + 1)
    root_label_arr = np.zeros(h * w, dtype=np.int32)
    root_label = root_label_arr
    for i in range(h):
        for j in range(w):
            if not mask[i, j]:
                continue
            root = _find(parent, i * w + j)
            if root_label[root] == 0:
                nlab += 1
                root_label[root] = nlab
            labels[i, j] = root_label[root]
    sizes = np.bincount(labels_arr.ravel(), minlength=nlab + 1).astype(np.int64)
    sizes[0] = 0
    return labels_arr, sizes


def maxpool_forward(real[:, :, :, ::1] x, int k, int s):
    cdef Py_ssize_t b = x.shape[0], h = x.shape[1], w = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t ho = (h - k) // s + 1, wo = (w - k) // s + 1
    dtype = np.float32 if real is float else np.float64
    out_arr = np.empty((b, ho, wo, c), dtype=dtype)
    arg_arr = np.empty((b, ho, wo, c), dtype=np.int32)
    cdef real[:, :, :, ::1] out = out_arr
    cdef int[:, :, :, ::1] arg = arg_arr
    cdef Py_ssize_t n, oy, ox, ch, dy, dx, y, xx
    cdef real best, v
    cdef int best_idx
    with nogil:
        for n in range(b):
            for oy in range(ho):
                for ox in range(wo):
                    for ch in range(c):
                        y = oy * s
                        xx = ox * s
                        best = x[n, y, xx, ch]
                        best_idx = <int>(y * w + xx)
                        for dy in range(k):
                            for dx in range(k):
                                v = x[n, y + dy, xx + dx, ch]
                                if v > best:
                                    best = v
                                    best_idx = <int>((y + dy) * w + xx + dx)
                        out[n, oy, ox, ch] = best
                        arg[n, oy, ox, ch] = best_idx
    return out_arr, arg_arr


def maxpool_backward(real[:, :, :, ::1] dout, const int[:, :, :, ::1] arg, int h, int w):
    cdef Py_ssize_t b = dout.shape[0], ho = dout.shape[1], wo = dout.shape[2], c = dout.shape[3]
    dtype = np.float32 if real is float else np.float64
    dx_arr = np.zeros((b, h, w, c), dtype=dtype)
    cdef real[:, :, :, ::1] dx = dx_arr
    cdef Py_ssize_t n, oy, ox, ch
    cdef int idx
    with nogil:
        for n in range(b):
            for oy in range(ho):
                for ox in range(wo):
                    for ch in range(c):
                        idx = arg[n, oy, ox, ch]
                        dx[n, idx // w, idx % w, ch] += dout[n, oy, ox, ch]
    return dx_arr


def col2im(real[:, :, :, :, :, ::1] dcols, int h, int w):
    """Scatter-add (B, Ho, Wo, k, k, C) column gradients back to (B, H, W, C)."""
    cdef Py_ssize_t b = dcols.shape[0], ho = dcols.shape[1], wo = dcols.shape[2]
    cdef Py_ssize_t k = dcols.shape[3], c = dcols.shape[5]
    dtype = np.float32 if real is float else np.float64
    dx_arr = np.zeros((b, h, w, c), dtype=dtype)
    cdef real[:, :, :, ::1] dx = dx_arr
    cdef Py_ssize_t n, oy, ox, ky, kx, ch
    with nogil:
        for n in range(b):
            for oy in range(ho):
                for ox in range(wo):
                    for ky in range(k):
                        for kx in range(k):
                            for ch in range(c):
                                dx[n, oy + ky, ox + kx, ch] += dcols[n, oy, ox, ky, kx, ch]
    return dx_arr
