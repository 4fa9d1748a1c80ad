# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the ray-cast feature loop, ring distances and the
graph-segmentation merge. Semantics must stay bit-identical to _fallback:
same libm calls, same channel accumulation order, same emission order."""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan, ceil, floor, hypot, sqrt

cnp.import_array()


cdef inline long _round_away(double v) noexcept nogil:
    if v >= 0.0:
        return <long> floor(v + 0.5)
    return <long> (-floor(0.5 - v))


cdef inline bint _march_one(double px, double py, double dx, double dy,
                            const unsigned char[:, ::1] ctx,
                            long width, long height, long max_steps,
                            long* out_x, long* out_y) noexcept nogil:
    cdef long t, ix, iy
    cdef long prev_x = <long> px
    cdef long prev_y = <long> py
    for t in range(1, max_steps + 1):
        ix = _round_away(px + t * dx)
        iy = _round_away(py + t * dy)
        if ix == prev_x and iy == prev_y:
            continue
        prev_x = ix
        prev_y = iy
        if ix < 0 or ix >= width or iy < 0 or iy >= height:
            return False
        if ctx[iy, ix]:
            out_x[0] = ix
            out_y[0] = iy
            return True
    return False


def ray_feature_samples(const unsigned char[:, ::1] mask,
                        const unsigned char[:, ::1] ctx,
                        const float[:, :, ::1] raw,
                        const float[:, :, ::1] smooth,
                        const double[:, ::1] dirs,
                        double lam):
    """See _fallback.ray_feature_samples; identical contract and bits."""
    cdef long height = mask.shape[0]
    cdef long width = mask.shape[1]
    cdef long n_ch = raw.shape[0]
    cdef long n_dirs = dirs.shape[0]
    cdef long max_steps = <long> ceil(hypot(<double> width, <double> height)) + 2

    cdef long cap = 0
    cdef long x, y
    for y in range(height):
        for x in range(width):
            if mask[y, x]:
                cap += 1
    cap *= n_dirs

    out_dir = np.empty(cap, dtype=np.int32)
    out_c1 = np.empty(cap, dtype=np.float64)
    out_c2 = np.empty(cap, dtype=np.float64)
    cdef int[::1] dir_v = out_dir
    cdef double[::1] c1_v = out_c1
    cdef double[::1] c2_v = out_c2

    cdef long n_out = 0
    cdef long k, ch
    cdef long ux = 0, uy = 0, dxp = 0, dyp = 0
    cdef double dx, dy, diff, acc, s_u, s_d, s_du, mn, fm_ch
    cdef bint got_u, got_d

    with nogil:
        for y in range(height):
            for x in range(width):
                if not mask[y, x]:
                    continue
                for k in range(n_dirs):
                    dx = dirs[k, 0]
                    dy = dirs[k, 1]
                    got_u = _march_one(<double> x, <double> y, dx, dy,
                                       ctx, width, height, max_steps, &ux, &uy)
                    if not got_u:
                        continue
                    got_d = _march_one(<double> x, <double> y, -dx, -dy,
                                       ctx, width, height, max_steps, &dxp, &dyp)
                    if not got_d:
                        continue
                    acc = 0.0
                    for ch in range(n_ch):
                        diff = (<double> smooth[ch, uy, ux]) - (<double> raw[ch, y, x])
                        acc += diff * diff
                    s_u = sqrt(acc)
                    acc = 0.0
                    for ch in range(n_ch):
                        diff = (<double> smooth[ch, dyp, dxp]) - (<double> raw[ch, y, x])
                        acc += diff * diff
                    s_d = sqrt(acc)
                    acc = 0.0
                    for ch in range(n_ch):
                        diff = (<double> smooth[ch, dyp, dxp]) - (<double> smooth[ch, uy, ux])
                        acc += diff * diff
                    s_du = sqrt(acc)
                    mn = s_d if s_d < s_u else s_u
                    dir_v[n_out] = <int> k
                    c1_v[n_out] = atan(mn / (s_du + lam))
                    c2_v[n_out] = atan(1.0 / (s_du + lam))
                    n_out += 1

    return out_dir[:n_out].copy(), out_c1[:n_out].copy(), out_c2[:n_out].copy()


def chebyshev_ring_distance(const unsigned char[:, ::1] mask):
    """Chebyshev distance to the mask per pixel (0 inside), via layered BFS."""
    cdef long height = mask.shape[0]
    cdef long width = mask.shape[1]
    dist_arr = np.full((height, width), -1, dtype=np.int32)
    queue_arr = np.empty(height * width, dtype=np.int64)
    cdef int[:, ::1] dist = dist_arr
    cdef long[::1] queue = queue_arr

    cdef long head = 0, tail = 0
    cdef long x, y, nx, ny, v
    cdef int nd
    with nogil:
        for y in range(height):
            for x in range(width):
                if mask[y, x]:
                    dist[y, x] = 0
                    queue[tail] = y * width + x
                    tail += 1
        while head < tail:
            v = queue[head]
            head += 1
            y = v / width
            x = v - y * width
            nd = dist[y, x] + 1
            for ny in range(y - 1, y + 2):
                if ny < 0 or ny >= height:
                    continue
                for nx in range(x - 1, x + 2):
                    if nx < 0 or nx >= width:
                        continue
                    if dist[ny, nx] < 0:
                        dist[ny, nx] = nd
                        queue[tail] = ny * width + nx
                        tail += 1
    return dist_arr


def felzenszwalb_labels(long n_vertices,
                        const long[::1] edge_a,
                        const long[::1] edge_b,
                        const double[::1] weights,
                        const long[::1] order,
                        double k):
    """Union-find merge pass; edge order and union rule match _fallback."""
    parent_arr = np.arange(n_vertices, dtype=np.int64)
    size_arr = np.ones(n_vertices, dtype=np.int64)
    thr_arr = np.full(n_vertices, k, dtype=np.float64)
    cdef long[::1] parent = parent_arr
    cdef long[::1] size = size_arr
    cdef double[::1] thr = thr_arr

    cdef long i, idx, a, b, root, walk, nxt
    cdef double w
    cdef long n_edges = order.shape[0]

    with nogil:
        for i in range(n_edges):
            idx = order[i]
            root = edge_a[idx]
            while parent[root] != root:
                root = parent[root]
            walk = edge_a[idx]
            while parent[walk] != root:
                nxt = parent[walk]
                parent[walk] = root
                walk = nxt
            a = root
            root = edge_b[idx]
            while parent[root] != root:
                root = parent[root]
            walk = edge_b[idx]
            while parent[walk] != root:
                nxt = parent[walk]
                parent[walk] = root
                walk = nxt
            b = root
            if a == b:
                continue
            w = weights[idx]
            if w <= thr[a] and w <= thr[b]:
                parent[a] = b
                size[b] += size[a]
                thr[b] = w + k / (<double> size[b])

    labels_arr = np.empty(n_vertices, dtype=np.int32)
    cdef int[::1] labels = labels_arr
    with nogil:
        for i in range(n_vertices):
            root = i
            while parent[root] != root:
                root = parent[root]
            labels[i] = <int> root
    return labels_arr
