"""Reference binarization algorithms.

Five methods, all deterministic and all sharing the toolkit polarity
(pixel below threshold = ink = True):

- ``otsu``: global threshold maximizing between-class variance.
- ``niblack``: T = mean + k*std over a sliding window.
- ``sauvola-grid``: Sauvola thresholds computed at grid-cell centers and
  bilinearly interpolated per pixel.
- ``su-contrast``: local-contrast/edge based binarization with stroke-width
  estimation and small-component cleanup.
- ``niblack-ensemble``: mean of four local threshold formulas (Niblack,
  Sauvola, Wolf-Jolion, NICK) after conditional median denoising, with
  component cleanup and a constrained 3x3 closing.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .raster import (
    BinaryImage,
    GrayImage,
    as_gray,
    detect_edges,
    histogram,
    local_stats,
    remove_small_components,
)

METHODS = ("otsu", "niblack", "sauvola-grid", "su-contrast", "niblack-ensemble")

_EPS = 1e-6  # contrast denominator guard
_MEDIAN_DEVIATION = 50  # conditional prefilter trigger, 8-bit levels


@dataclass(frozen=True)
class BinarizerParams:
    """Free parameters of the binarization methods.

    ``k`` defaults per method when left as None: -0.2 for niblack,
    +0.2 for sauvola-grid.
    """

    method: str = "otsu"
    window: int = 31
    k: float | None = None
    r_dynamic: float = 128.0
    grid_cell: int = 32
    gamma: float = 1.0
    canny_low: float = 20.0
    canny_high: float = 60.0
    min_component: int = 6
    edge_density_min: int = 4

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.grid_cell < 8:
            raise ValueError(f"grid_cell must be >= 8, got {self.grid_cell}")
        if not (0 < self.canny_low <= self.canny_high):
            raise ValueError(
                f"need 0 < canny_low <= canny_high, got {self.canny_low}, {self.canny_high}"
            )
        if self.min_component < 1:
            raise ValueError("min_component must be >= 1")
        if self.edge_density_min < 1:
            raise ValueError("edge_density_min must be >= 1")

    @property
    def resolved_k(self) -> float:
        if self.k is not None:
            return self.k
        return -0.2 if self.method == "niblack" else 0.2

    @classmethod
    def from_json(cls, source, method: str | None = None) -> "BinarizerParams":
        """Build params from a JSON file path or dict; unknown keys rejected."""
        if isinstance(source, (str, Path)):
            doc = json.loads(Path(source).read_text())
        else:
            doc = dict(source)
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        if method is not None:
            doc["method"] = method
        return cls(**doc)


def otsu_threshold(img: GrayImage) -> int:
    """Global threshold t maximizing between-class variance of the split
    [0, t) vs [t, 255]; ties break toward the smallest t."""
    hist = histogram(img).astype(np.float64)
    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)          # weight of [0, t] inclusive
    m0 = np.cumsum(hist * levels)  # first moment of [0, t]
    mu_total = m0[-1]

    best_t, best_var = 0, -1.0
    for t in range(256):
        # classes split below/at-or-above t
        n_lo = w0[t - 1] if t > 0 else 0.0
        n_hi = total - n_lo
        if n_lo == 0.0 or n_hi == 0.0:
            var = 0.0
        else:
            s_lo = m0[t - 1] if t > 0 else 0.0
            mean_lo = s_lo / n_lo
            mean_hi = (mu_total - s_lo) / n_hi
            var = n_lo * n_hi * (mean_lo - mean_hi) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return best_t


def otsu(img: GrayImage, params: BinarizerParams | None = None) -> BinaryImage:
    img = as_gray(img)
    return img < otsu_threshold(img)


def niblack(img: GrayImage, params: BinarizerParams | None = None) -> BinaryImage:
    img = as_gray(img)
    p = params or BinarizerParams(method="niblack")
    mean, std = local_stats(img, p.window)
    k = p.k if p.k is not None else -0.2
    return img < mean + k * std


def sauvola_grid_threshold(img: GrayImage, params: BinarizerParams | None = None) -> np.ndarray:
    """Per-pixel threshold surface of the grid-based Sauvola method.

    Window statistics are evaluated only at grid-cell centers; per-pixel
    thresholds come from bilinear interpolation between the four
    surrounding centers, clamped at the borders.
    """
    img = as_gray(img)
    p = params or BinarizerParams(method="sauvola-grid")
    mean, std = local_stats(img, p.window)
    k = p.k if p.k is not None else 0.2
    h, w = img.shape
    g = p.grid_cell
    cy = np.minimum(np.arange(0, h, g) + g // 2, h - 1)
    cx = np.minimum(np.arange(0, w, g) + g // 2, w - 1)
    t_cells = mean[np.ix_(cy, cx)] * (1.0 + k * (std[np.ix_(cy, cx)] / p.r_dynamic - 1.0))

    # separable bilinear interpolation, clamped outside the center range
    rows = _interp_axis0(cy.astype(np.float64), t_cells, h)
    return _interp_axis0(cx.astype(np.float64), rows.T, w).T


def sauvola_grid(img: GrayImage, params: BinarizerParams | None = None) -> BinaryImage:
    return as_gray(img) < sauvola_grid_threshold(img, params)


def _interp_axis0(centers: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    """Linear interpolation along axis 0 from samples at ``centers`` onto
    coordinates 0..n-1, clamping beyond the first/last center."""
    if len(centers) == 1:
        return np.broadcast_to(values[0], (n,) + values.shape[1:]).copy()
    q = np.arange(n, dtype=np.float64)
    hi = np.clip(np.searchsorted(centers, q, side="right"), 1, len(centers) - 1)
    lo = hi - 1
    t = (q - centers[lo]) / (centers[hi] - centers[lo])
    t = np.clip(t, 0.0, 1.0).reshape((n,) + (1,) * (values.ndim - 1))
    return (1.0 - t) * values[lo] + t * values[hi]


# ---------------------------------------------------------------------------
# su-contrast


def _minmax3(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.pad(img, 1, mode="edge")
    shifts = [p[dy:dy + img.shape[0], dx:dx + img.shape[1]]
              for dy in range(3) for dx in range(3)]
    stack = np.stack(shifts)
    return stack.max(axis=0), stack.min(axis=0)


def _box_count(mask: BinaryImage, radius: int) -> np.ndarray:
    """Count of True cells within a (2r+1) window, zero outside the image."""
    a = np.pad(mask.astype(np.int64), 1 + radius, mode="constant")
    ii = a.cumsum(axis=0).cumsum(axis=1)
    h, w = mask.shape
    y0 = np.arange(h)[:, None]
    x0 = np.arange(w)[None, :]
    side = 2 * radius + 1
    return (ii[y0 + side, x0 + side] - ii[y0, x0 + side]
            - ii[y0 + side, x0] + ii[y0, x0])


def _box_sum(values: np.ndarray, radius: int) -> np.ndarray:
    a = np.pad(values.astype(np.float64), 1 + radius, mode="constant")
    ii = a.cumsum(axis=0).cumsum(axis=1)
    h, w = values.shape
    y0 = np.arange(h)[:, None]
    x0 = np.arange(w)[None, :]
    side = 2 * radius + 1
    return (ii[y0 + side, x0 + side] - ii[y0, x0 + side]
            - ii[y0 + side, x0] + ii[y0, x0])


def estimate_stroke_width(text_edges: BinaryImage) -> int:
    """Dominant gap between consecutive edge-pixel runs along rows.

    Per row, consecutive edge pixels collapse into runs; the gap from a
    run's end to the next run's start enters a histogram whose mode is the
    stroke width.  Falls back to 3 when no gaps exist.
    """
    gaps: list[np.ndarray] = []
    for row in text_edges:
        d = np.diff(np.concatenate(([0], row.view(np.int8), [0])))
        starts = np.flatnonzero(d == 1)
        ends = np.flatnonzero(d == -1)
        if len(starts) > 1:
            gaps.append(starts[1:] - ends[:-1])
    if not gaps:
        return 3
    allgaps = np.concatenate(gaps)
    hist = np.bincount(allgaps)
    return max(1, int(hist.argmax()))


@dataclass(frozen=True)
class SuStages:
    """Inspectable intermediates of the su-contrast pipeline."""

    contrast: np.ndarray        # combined contrast map scaled to [0,255]
    high_contrast: BinaryImage  # bright side of the contrast map's otsu split
    text_edges: BinaryImage     # high-contrast pixels that are also edges
    stroke_width: int
    raw_mask: BinaryImage       # classification before cleanup
    mask: BinaryImage           # final output


def su_contrast_stages(img: GrayImage, params: BinarizerParams | None = None) -> SuStages:
    img = as_gray(img)
    p = params or BinarizerParams(method="su-contrast")
    f = img.astype(np.float64)

    # stage 1: local contrast blended with the local gradient
    fmax, fmin = _minmax3(f)
    contrast = (fmax - fmin) / (fmax + fmin + _EPS)
    gradient = (fmax - fmin) / 255.0
    sigma_global = float(f.std())
    alpha = (sigma_global / 128.0) ** p.gamma
    combined = alpha * contrast + (1.0 - alpha) * gradient
    # sqrt companding before the 8-bit scale: stroke boundaries of very
    # different strength (strong vs faded ink) would otherwise straddle the
    # otsu split of a histogram dominated by the near-zero background
    cmap = np.clip(np.rint(np.sqrt(np.clip(combined, 0.0, 1.0)) * 255.0), 0, 255).astype(np.uint8)

    # stage 2: keep high-contrast pixels that coincide with real edges
    t = otsu_threshold(cmap)
    high_contrast = cmap >= t if t > 0 else cmap > 0
    edges = detect_edges(img, low=p.canny_low, high=p.canny_high)
    text_edges = high_contrast & edges

    # stage 3: classify via edge density and edge-pixel intensity stats.
    # An NMS edge line may sit on either side of a stroke boundary, so the
    # mean uses the darkest intensity in each edge pixel's 3x3 patch (the
    # ink level the edge witnesses) while the spread comes from the raw
    # edge intensities; a small floor keeps the slack alive when every
    # line lands on the same side.
    sw = estimate_stroke_width(text_edges)
    radius = sw  # (2*sw + 1) window
    n_e = _box_count(text_edges, radius)
    n_safe = np.maximum(n_e, 1)
    dark = np.where(text_edges, fmin, 0.0)
    raw_vals = np.where(text_edges, f, 0.0)
    mean_dark = _box_sum(dark, radius) / n_safe
    mean_raw = _box_sum(raw_vals, radius) / n_safe
    var_raw = np.maximum(_box_sum(raw_vals * raw_vals, radius) / n_safe - mean_raw**2, 0.0)
    spread = np.maximum(np.sqrt(var_raw), 12.0)
    raw = (n_e >= p.edge_density_min) & (f <= mean_dark + spread / 2.0)

    # stage 4: small-component cleanup
    mask = remove_small_components(raw, p.min_component)
    return SuStages(
        contrast=cmap,
        high_contrast=high_contrast,
        text_edges=text_edges,
        stroke_width=sw,
        raw_mask=raw,
        mask=mask,
    )


def su_contrast(img: GrayImage, params: BinarizerParams | None = None) -> BinaryImage:
    return su_contrast_stages(img, params).mask


# ---------------------------------------------------------------------------
# niblack-ensemble


def conditional_median_filter(img: GrayImage, deviation: int = _MEDIAN_DEVIATION) -> GrayImage:
    """Replace pixels deviating from their 3x3 median by more than
    ``deviation`` with that median; all other pixels pass through."""
    img = as_gray(img)
    p = np.pad(img, 1, mode="edge")
    shifts = [p[dy:dy + img.shape[0], dx:dx + img.shape[1]]
              for dy in range(3) for dx in range(3)]
    med = np.median(np.stack(shifts), axis=0)
    out = img.copy()
    noisy = np.abs(img.astype(np.float64) - med) > deviation
    out[noisy] = np.rint(med[noisy]).astype(np.uint8)
    return out


def ensemble_threshold_maps(img: GrayImage, params: BinarizerParams | None = None) -> dict[str, np.ndarray]:
    """Four local threshold maps plus their mean, on the prefiltered image.

    Formulas (m = window mean, s = window std, R = dynamic range,
    M = image minimum, s_max = maximum window std over the image):

    - niblack:     m - 0.2 s
    - sauvola:     m (1 + 0.2 (s/R - 1))
    - wolf:        m - 0.5 (1 - s/s_max)(m - M)
    - nick:        m - 0.1 sqrt(s^2 + m^2)
    """
    img = as_gray(img)
    p = params or BinarizerParams(method="niblack-ensemble")
    m, s = local_stats(img, p.window)
    s_max = float(s.max())
    if s_max == 0.0:
        s_max = 1.0
    img_min = float(img.min())
    maps = {
        "niblack": m - 0.2 * s,
        "sauvola": m * (1.0 + 0.2 * (s / p.r_dynamic - 1.0)),
        "wolf": m - 0.5 * (1.0 - s / s_max) * (m - img_min),
        "nick": m - 0.1 * np.sqrt(s * s + m * m),
    }
    maps["mean"] = (maps["niblack"] + maps["sauvola"] + maps["wolf"] + maps["nick"]) / 4.0
    return maps


def _closing3(mask: BinaryImage) -> BinaryImage:
    """One 3x3 morphological closing pass.

    Dilation only reaches pixels 8-adjacent to existing foreground, so the
    fill stays within distance 1 of the input mask.
    """
    p = np.pad(mask, 1, mode="constant", constant_values=False)
    dil = np.zeros_like(mask)
    for dy in range(3):
        for dx in range(3):
            dil |= p[dy:dy + mask.shape[0], dx:dx + mask.shape[1]]
    # erosion treats outside-of-image as foreground so closing never
    # strips original border pixels
    q = np.pad(dil, 1, mode="constant", constant_values=True)
    ero = np.ones_like(mask)
    for dy in range(3):
        for dx in range(3):
            ero &= q[dy:dy + mask.shape[0], dx:dx + mask.shape[1]]
    return ero


def niblack_ensemble(img: GrayImage, params: BinarizerParams | None = None) -> BinaryImage:
    img = as_gray(img)
    p = params or BinarizerParams(method="niblack-ensemble")
    filtered = conditional_median_filter(img)
    t_mean = ensemble_threshold_maps(filtered, p)["mean"]
    mask = filtered < t_mean
    mask = remove_small_components(mask, p.min_component)
    return _closing3(mask)


# ---------------------------------------------------------------------------

_DISPATCH = {
    "otsu": otsu,
    "niblack": niblack,
    "sauvola-grid": sauvola_grid,
    "su-contrast": su_contrast,
    "niblack-ensemble": niblack_ensemble,
}


def binarize(img: GrayImage, method: str, params: BinarizerParams | None = None) -> BinaryImage:
    """Run one of the reference methods by name."""
    if method not in _DISPATCH:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if params is not None and params.method != method:
        params = replace(params, method=method)
    return _DISPATCH[method](img, params)
