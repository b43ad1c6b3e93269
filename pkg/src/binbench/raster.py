"""Pixel-buffer primitives and classical image operators.

Conventions used throughout the toolkit:

- A gray image is a 2-D ``numpy.uint8`` array indexed ``[row, col]``.
- A binary image (mask) is a 2-D ``numpy.bool_`` array; True = ink/text.
  In 8-bit files ink is 0 (black) and background is 255.
- Foreground connectivity is 8-connectivity everywhere.
- Sliding windows clamp coordinates to the image bounds (replicate padding).

All operations are pure: inputs are never mutated and identical inputs
produce identical outputs.
"""
from __future__ import annotations

import numpy as np

from .errors import EmptySeedError

GrayImage = np.ndarray
BinaryImage = np.ndarray


def as_gray(a) -> GrayImage:
    """Validate/convert an array-like into a 2-D uint8 gray image."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ValueError(f"gray image must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("gray image must be non-empty")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.number):
            raise ValueError(f"gray image must be numeric, got {arr.dtype}")
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("gray values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_mask(a) -> BinaryImage:
    """Validate/convert an array-like into a 2-D boolean mask."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("mask must be non-empty")
    if arr.dtype != np.bool_:
        arr = arr.astype(bool)
    return arr


def histogram(img: GrayImage) -> np.ndarray:
    """256-bin intensity histogram; bins sum to width*height."""
    img = as_gray(img)
    return np.bincount(img.ravel(), minlength=256).astype(np.int64)


def _check_window(window: int) -> int:
    window = int(window)
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    return window


def local_stats(img: GrayImage, window: int = 31) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel mean and population standard deviation over a square window.

    Window coordinates are clamped to the image bounds, so every pixel is
    averaged over exactly ``window**2`` samples.  Sums are accumulated in
    int64, so the variance numerator is exact; the only rounding is the
    final division and square root.
    """
    img = as_gray(img)
    window = _check_window(window)
    r = window // 2
    padded = np.pad(img, r, mode="edge").astype(np.int64)

    # integral images over values and squared values
    ii = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    ii2 = np.zeros_like(ii)
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=ii[1:, 1:])
    np.cumsum(np.cumsum(padded * padded, axis=0), axis=1, out=ii2[1:, 1:])

    h, w = img.shape
    y0 = np.arange(h)[:, None]
    x0 = np.arange(w)[None, :]
    y1, x1 = y0 + window, x0 + window
    s = ii[y1, x1] - ii[y0, x1] - ii[y1, x0] + ii[y0, x0]
    s2 = ii2[y1, x1] - ii2[y0, x1] - ii2[y1, x0] + ii2[y0, x0]

    n = window * window
    mean = s / n
    var_num = n * s2 - s * s  # exact integer, >= 0
    std = np.sqrt(var_num) / n
    return mean, std


def distance_transform_squared(seed: BinaryImage) -> np.ndarray:
    """Exact squared Euclidean distance from every pixel to the nearest seed.

    Two-pass separable transform: a column sweep finds, for every pixel, the
    squared distance to the nearest seed within its own column; a row sweep
    then minimises ``(x - x')**2 + colsq[y, x']`` over the row.  All
    arithmetic is integral, so results are exact.
    """
    seed = as_mask(seed)
    if not seed.any():
        raise EmptySeedError("distance transform needs at least one seed pixel")
    h, w = seed.shape

    # pass 1: per-column vertical distance (two directional scans)
    big = h + w + 1
    updown = np.full((h, w), big, dtype=np.int64)
    updown[seed] = 0
    for y in range(1, h):
        np.minimum(updown[y], updown[y - 1] + 1, out=updown[y])
    for y in range(h - 2, -1, -1):
        np.minimum(updown[y], updown[y + 1] + 1, out=updown[y])
    colsq = updown * updown
    colsq[updown >= big] = np.iinfo(np.int64).max // 4  # unreachable columns

    # pass 2: horizontal minimisation, vectorised over row chunks
    xs = np.arange(w, dtype=np.int64)
    dx2 = (xs[:, None] - xs[None, :]) ** 2  # (x, x')
    out = np.empty((h, w), dtype=np.int64)
    chunk = max(1, 4_000_000 // (w * w + 1))
    for y0 in range(0, h, chunk):
        block = colsq[y0:y0 + chunk]  # (rows, x')
        out[y0:y0 + chunk] = (block[:, None, :] + dx2[None, :, :]).min(axis=2)
    return out


def distance_transform(seed: BinaryImage) -> np.ndarray:
    """Exact Euclidean distance field; 0 exactly on the seed set."""
    return np.sqrt(distance_transform_squared(seed).astype(np.float64))


def extract_contour(mask: BinaryImage) -> BinaryImage:
    """Foreground pixels with at least one background 4-neighbor.

    The image border counts as background, so foreground touching the edge
    is always contour.
    """
    mask = as_mask(mask)
    p = np.pad(mask, 1, mode="constant", constant_values=False)
    interior = p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    return mask & ~interior


def _zhang_suen_neighbors(mask: BinaryImage):
    """The eight neighbor planes P2..P9 (N, NE, E, SE, S, SW, W, NW)."""
    p = np.pad(mask, 1, mode="constant", constant_values=False)
    return (
        p[:-2, 1:-1],  # P2 N
        p[:-2, 2:],    # P3 NE
        p[1:-1, 2:],   # P4 E
        p[2:, 2:],     # P5 SE
        p[2:, 1:-1],   # P6 S
        p[2:, :-2],    # P7 SW
        p[1:-1, :-2],  # P8 W
        p[:-2, :-2],   # P9 NW
    )


def skeletonize(mask: BinaryImage) -> BinaryImage:
    """Thin foreground to 1-pixel-wide curves by iterative 3x3 thinning.

    Two-subpass thinning with the classic deletion tests (neighbor count in
    [2, 6], a single 0->1 transition around the pixel, directional border
    conditions), iterated until a full pass removes nothing.  The plain
    parallel rule can annihilate a small blob in one subpass (a 2x2 square
    satisfies the tests at all four pixels); whenever a subpass would wipe
    out an entire component, its first pixel in raster order is kept so the
    component count never changes.  The result is a subset of the input and
    thinning it again is a no-op.
    """
    mask = as_mask(mask)
    cur = mask.copy()
    if not cur.any():
        return cur
    labels, _ = connected_components(mask)

    while True:
        changed = False
        for subpass in (0, 1):
            n = _zhang_suen_neighbors(cur)
            p2, p3, p4, p5, p6, p7, p8, p9 = n
            bsum = sum(x.astype(np.uint8) for x in n)
            ring = (p2, p3, p4, p5, p6, p7, p8, p9, p2)
            trans = sum(
                (~a & b).astype(np.uint8) for a, b in zip(ring[:-1], ring[1:])
            )
            if subpass == 0:
                direc = ~(p2 & p4 & p6) & ~(p4 & p6 & p8)
            else:
                direc = ~(p2 & p4 & p8) & ~(p2 & p6 & p8)
            delete = cur & (bsum >= 2) & (bsum <= 6) & (trans == 1) & direc
            if not delete.any():
                continue
            nxt = cur & ~delete
            # keep the raster-first pixel of any component that would vanish
            idx = np.flatnonzero(cur.ravel())
            labs = labels.ravel()[idx]
            alive = np.unique(labels.ravel()[np.flatnonzero(nxt.ravel())])
            firsts, first_pos = np.unique(labs, return_index=True)
            dead = ~np.isin(firsts, alive)
            if dead.any():
                nxt.ravel()[idx[first_pos[dead]]] = True
            if not np.array_equal(nxt, cur):
                cur = nxt
                changed = True
        if not changed:
            return cur


def _stable_gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(3.0 * sigma + 0.5))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def _separable_filter(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Convolve rows then columns with a 1-D kernel, replicate borders."""
    r = len(kernel) // 2
    out = img.astype(np.float64)
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (r, r)
        p = np.pad(out, pad, mode="edge")
        acc = np.zeros_like(out)
        for i, wgt in enumerate(kernel):
            if axis == 0:
                acc += wgt * p[i:i + out.shape[0], :]
            else:
                acc += wgt * p[:, i:i + out.shape[1]]
        out = acc
    return out


def _sobel(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.pad(img, 1, mode="edge")
    nw, n_, ne = p[:-2, :-2], p[:-2, 1:-1], p[:-2, 2:]
    w_, e_ = p[1:-1, :-2], p[1:-1, 2:]
    sw, s_, se = p[2:, :-2], p[2:, 1:-1], p[2:, 2:]
    gx = (ne + 2 * e_ + se) - (nw + 2 * w_ + sw)
    gy = (sw + 2 * s_ + se) - (nw + 2 * n_ + ne)
    return gx, gy


def detect_edges(
    img: GrayImage,
    low: float = 20.0,
    high: float = 60.0,
    sigma: float = 1.0,
) -> BinaryImage:
    """Canny-style edge detector.

    Gaussian smoothing (skipped when ``sigma`` <= 0), Sobel gradients,
    non-maximum suppression along the quantised gradient direction, then
    hysteresis: pixels above ``high`` seed edges, pixels above ``low`` extend
    them through 8-connected linking.  Ties in the suppression step break
    toward the lexicographically earlier pixel, so a symmetric step edge
    yields a single 1-pixel line.
    """
    img = as_gray(img)
    if not (0.0 <= low <= high):
        raise ValueError(f"thresholds must satisfy 0 <= low <= high, got {low}, {high}")
    smooth = img.astype(np.float64)
    if sigma > 0:
        smooth = _separable_filter(smooth, _stable_gaussian_kernel(sigma))
    gx, gy = _sobel(smooth)
    mag = np.hypot(gx, gy)

    ax, ay = np.abs(gx), np.abs(gy)
    t_low, t_high = 0.4142135623730951, 2.414213562373095  # tan(22.5/67.5 deg)
    horiz = ay <= t_low * ax
    verti = ay > t_high * ax
    same_sign = (gx >= 0) == (gy >= 0)
    diag_main = ~horiz & ~verti & same_sign       # neighbors (-1,-1)/(1,1)
    diag_anti = ~horiz & ~verti & ~same_sign      # neighbors (-1,1)/(1,-1)

    p = np.pad(mag, 1, mode="constant")
    neigh = {
        (-1, -1): p[:-2, :-2], (-1, 0): p[:-2, 1:-1], (-1, 1): p[:-2, 2:],
        (0, -1): p[1:-1, :-2], (0, 1): p[1:-1, 2:],
        (1, -1): p[2:, :-2], (1, 0): p[2:, 1:-1], (1, 1): p[2:, 2:],
    }
    keep = np.zeros(img.shape, dtype=bool)
    # strict > against the earlier neighbor, >= against the later one
    for sector, (neg, pos) in (
        (horiz, ((0, -1), (0, 1))),
        (verti, ((-1, 0), (1, 0))),
        (diag_main, ((-1, -1), (1, 1))),
        (diag_anti, ((-1, 1), (1, -1))),
    ):
        keep |= sector & (mag > neigh[neg]) & (mag >= neigh[pos])

    nms = np.where(keep, mag, 0.0)
    weak = nms > low
    strong = nms > high
    if not strong.any():
        return np.zeros(img.shape, dtype=bool)
    labels, _ = connected_components(weak)
    good = np.unique(labels[strong])
    return weak & np.isin(labels, good)


def connected_components(mask: BinaryImage) -> tuple[np.ndarray, np.ndarray]:
    """8-connected labeling.

    Returns ``(labels, counts)`` where ``labels`` is int32 with 0 for
    background and components numbered 1..K in the raster order of their
    first pixel; ``counts[k-1]`` is the pixel count of component k.

    Run-length based: foreground runs per row are unioned with overlapping
    runs of the previous row, so cost scales with the number of runs.
    """
    mask = as_mask(mask)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)

    parent: list[int] = []

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    run_rows: list[int] = []
    run_starts: list[np.ndarray] = []
    run_ends: list[np.ndarray] = []
    run_ids: list[np.ndarray] = []
    prev: list[tuple[int, int, int]] = []  # (start, end, run id) of previous row

    next_id = 0
    for y in range(h):
        row = mask[y]
        if not row.any():
            prev = []
            continue
        d = np.diff(np.concatenate(([0], row.view(np.int8), [0])))
        starts = np.flatnonzero(d == 1)
        ends = np.flatnonzero(d == -1)
        ids = np.arange(next_id, next_id + len(starts))
        parent.extend(range(next_id, next_id + len(starts)))
        next_id += len(starts)

        # 8-connectivity: run [s, e) touches a previous run [ps, pe)
        # iff ps <= e and pe >= s (runs widened by one column diagonally)
        j = 0
        cur = []
        for s, e, rid in zip(starts, ends, ids):
            while j < len(prev) and prev[j][1] < s:
                j += 1
            k = j
            while k < len(prev) and prev[k][0] <= e:
                ra, rb = find(rid), find(prev[k][2])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
                k += 1
            cur.append((int(s), int(e), int(rid)))
        prev = cur
        run_rows.append(y)
        run_starts.append(starts)
        run_ends.append(ends)
        run_ids.append(ids)

    if next_id == 0:
        return labels, np.zeros(0, dtype=np.int64)

    # final labels in raster order of each component's first run
    root_of = np.fromiter((find(i) for i in range(next_id)), dtype=np.int64)
    final = np.zeros(next_id, dtype=np.int32)
    n_components = 0
    for i in range(next_id):
        r = root_of[i]
        if final[r] == 0:
            n_components += 1
            final[r] = n_components
    counts = np.zeros(n_components, dtype=np.int64)
    for y, starts, ends, ids in zip(run_rows, run_starts, run_ends, run_ids):
        for s, e, rid in zip(starts, ends, ids):
            lab = final[root_of[rid]]
            labels[y, s:e] = lab
            counts[lab - 1] += e - s
    return labels, counts


def remove_small_components(mask: BinaryImage, min_size: int) -> BinaryImage:
    """Drop 8-connected foreground components smaller than ``min_size``."""
    mask = as_mask(mask)
    if min_size <= 1 or not mask.any():
        return mask.copy()
    labels, counts = connected_components(mask)
    keep = np.concatenate(([False], counts >= min_size))
    return keep[labels]
