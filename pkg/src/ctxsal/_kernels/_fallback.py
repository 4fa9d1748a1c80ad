"""Pure-Python kernels, used when the compiled extension is unavailable.

These are the reference semantics for the hot loops. The compiled module
must produce bit-identical output: scalar math goes through libm (via
``math``) rather than numpy's vectorized transcendentals, and per-channel
accumulations run in fixed channel order.
"""

import math

import numpy as np


def _round_away(v: np.ndarray) -> np.ndarray:
    # round half away from zero, like C's round()
    return np.where(v >= 0.0, np.floor(v + 0.5), -np.floor(0.5 - v)).astype(np.int64)


def _march(xs, ys, dx, dy, ctx, width, height, max_steps):
    """March every start pixel along (dx, dy); first context hit wins.

    Returns (found, hit_x, hit_y). Pixels whose ray leaves the image before
    touching context report found=False.
    """
    n = xs.shape[0]
    found = np.zeros(n, dtype=bool)
    exited = np.zeros(n, dtype=bool)
    hit_x = np.full(n, -1, dtype=np.int64)
    hit_y = np.full(n, -1, dtype=np.int64)
    prev_x = xs.astype(np.int64).copy()
    prev_y = ys.astype(np.int64).copy()

    for t in range(1, max_steps + 1):
        active = ~(found | exited)
        if not active.any():
            break
        ix = _round_away(xs + t * dx)
        iy = _round_away(ys + t * dy)
        dup = (ix == prev_x) & (iy == prev_y)
        prev_x = np.where(active, ix, prev_x)
        prev_y = np.where(active, iy, prev_y)
        test = active & ~dup
        out = test & ((ix < 0) | (ix >= width) | (iy < 0) | (iy >= height))
        exited |= out
        inb = test & ~out
        if inb.any():
            cx = np.clip(ix, 0, width - 1)
            cy = np.clip(iy, 0, height - 1)
            hit = inb & (ctx[cy, cx] != 0)
            newly = hit & ~found
            found |= newly
            hit_x = np.where(newly, ix, hit_x)
            hit_y = np.where(newly, iy, hit_y)
    return found, hit_x, hit_y


def _channel_norm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # sequential channel accumulation; must match the compiled loop order
    acc = np.zeros(a.shape[1], dtype=np.float64)
    for ch in range(a.shape[0]):
        d = a[ch] - b[ch]
        acc += d * d
    return np.sqrt(acc)


def ray_feature_samples(mask, ctx, raw, smooth, dirs, lam):
    """Per-(pixel, direction) contrast and continuity samples.

    mask, ctx: uint8 (H, W); raw, smooth: float32 (D, H, W), planar;
    dirs: float64 (K, 2) unit direction vectors for orientations in [0, pi).

    Returns (dir_idx int32, c1 float64, c2 float64) for every pair whose
    rays reach context on both sides, ordered by (row-major pixel,
    direction index).
    """
    height, width = mask.shape
    ys, xs = np.nonzero(mask)
    n_px = xs.shape[0]
    n_dirs = dirs.shape[0]
    if n_px == 0 or n_dirs == 0:
        empty = np.zeros(0)
        return empty.astype(np.int32), empty.copy(), empty.copy()

    max_steps = int(math.ceil(math.hypot(width, height))) + 2
    xs_f = xs.astype(np.float64)
    ys_f = ys.astype(np.float64)

    pix_idx_all = []
    dir_idx_all = []
    c1_all = []
    c2_all = []
    for k in range(n_dirs):
        dx, dy = float(dirs[k, 0]), float(dirs[k, 1])
        fu, ux, uy = _march(xs_f, ys_f, dx, dy, ctx, width, height, max_steps)
        fd, dxp, dyp = _march(xs_f, ys_f, -dx, -dy, ctx, width, height, max_steps)
        valid = fu & fd
        if not valid.any():
            continue
        vi = np.nonzero(valid)[0]
        fm = raw[:, ys[vi], xs[vi]].astype(np.float64)
        fuv = smooth[:, uy[vi], ux[vi]].astype(np.float64)
        fdv = smooth[:, dyp[vi], dxp[vi]].astype(np.float64)
        s_u = _channel_norm(fuv, fm)
        s_d = _channel_norm(fdv, fm)
        s_du = _channel_norm(fdv, fuv)
        ratio = np.minimum(s_d, s_u) / (s_du + lam)
        # math.atan keeps both backends on the same libm code path
        c1 = np.array([math.atan(r) for r in ratio], dtype=np.float64)
        c2 = np.array([math.atan(1.0 / (s + lam)) for s in s_du], dtype=np.float64)
        pix_idx_all.append(vi)
        dir_idx_all.append(np.full(vi.shape[0], k, dtype=np.int32))
        c1_all.append(c1)
        c2_all.append(c2)

    if not pix_idx_all:
        empty = np.zeros(0)
        return empty.astype(np.int32), empty.copy(), empty.copy()

    pix_idx = np.concatenate(pix_idx_all)
    dir_idx = np.concatenate(dir_idx_all)
    c1 = np.concatenate(c1_all)
    c2 = np.concatenate(c2_all)
    order = np.lexsort((dir_idx, pix_idx))
    return dir_idx[order], c1[order], c2[order]


def chebyshev_ring_distance(mask):
    """Chebyshev distance to the mask for every pixel (0 inside the mask).

    Equivalent to counting how many N8 dilations it takes to reach a pixel.
    """
    inside = mask != 0
    dist = np.where(inside, 0, -1).astype(np.int32)
    cur = inside.copy()
    d = 0
    while True:
        grown = cur.copy()
        grown[1:, :] |= cur[:-1, :]
        grown[:-1, :] |= cur[1:, :]
        grown[:, 1:] |= cur[:, :-1]
        grown[:, :-1] |= cur[:, 1:]
        grown[1:, 1:] |= cur[:-1, :-1]
        grown[1:, :-1] |= cur[:-1, 1:]
        grown[:-1, 1:] |= cur[1:, :-1]
        grown[:-1, :-1] |= cur[1:, 1:]
        new = grown & ~cur
        if not new.any():
            break
        d += 1
        dist[new] = d
        cur = grown
    return dist


def felzenszwalb_labels(n_vertices, edge_a, edge_b, weights, order, k):
    """Minimum-spanning-forest merge with threshold tau(C) = k/|C|.

    Edges are visited in the given order (ascending weight, stable). The
    returned labels are union-find roots; both backends apply unions in the
    same order so the raw roots agree.
    """
    parent = list(range(n_vertices))
    size = [1] * n_vertices
    thr = [float(k)] * n_vertices

    def find(v):
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    for idx in order:
        a = find(int(edge_a[idx]))
        b = find(int(edge_b[idx]))
        if a == b:
            continue
        w = float(weights[idx])
        if w <= thr[a] and w <= thr[b]:
            parent[a] = b
            size[b] += size[a]
            thr[b] = w + k / size[b]

    return np.array([find(v) for v in range(n_vertices)], dtype=np.int32)
