"""Evaluation measures for binarization quality.

Six measures over a (ground truth, binarization) pair of equal-size masks:
F-Measure, pseudo F-Measure (recall against the skeletonized ground truth),
PSNR, DRD (distance reciprocal distortion), MPM (misclassification penalty
metric), and NRM (negative rate metric).

Positive class = foreground = ink.  F-Measure and pseudo F-Measure are
percentages in [0, 100]; PSNR is in dB with +inf for a perfect match; DRD,
MPM and NRM are nonnegative, lower is better.

NRM ships in two variants.  The default ``paper-literal`` mode uses
NR_FN = FN/(FN+FP); ``standard`` mode uses the miss-rate convention
NR_FN = FN/(FN+TP).  Both share NR_FP = FP/(FP+TN) and any 0/0 term is 0.

MPM's normalizer D also has two readings: ``all-pixels`` (default) sums
the contour-distance field over the whole image, ``gt-foreground`` only
over ground-truth ink pixels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyForegroundError, ShapeMismatchError
from .raster import (
    BinaryImage,
    as_mask,
    distance_transform,
    extract_contour,
    skeletonize,
)

NRM_MODES = ("paper-literal", "standard")
MPM_D_MODES = ("all-pixels", "gt-foreground")

#: serialization order of the measure keys
MEASURE_KEYS = ("fmeasure", "pfmeasure", "psnr", "drd", "mpm", "nrm")

#: measures where a higher value is better; the rest are lower-is-better
HIGHER_IS_BETTER = frozenset({"fmeasure", "pfmeasure", "psnr"})


def _check_pair(gt, b) -> tuple[np.ndarray, np.ndarray]:
    gt, b = as_mask(gt), as_mask(b)
    if gt.shape != b.shape:
        raise ShapeMismatchError(
            f"ground truth {gt.shape} and binarization {b.shape} differ in size"
        )
    return gt, b


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel tallies between a binarization and a ground truth."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion_counts(gt: BinaryImage, b: BinaryImage) -> ConfusionCounts:
    gt, b = _check_pair(gt, b)
    tp = int(np.count_nonzero(gt & b))
    fp = int(np.count_nonzero(~gt & b))
    fn = int(np.count_nonzero(gt & ~b))
    tn = gt.size - tp - fp - fn
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def recall(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0


def precision(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0


def f_measure(c: ConfusionCounts) -> float:
    """Harmonic mean of recall and precision, as a percentage."""
    r, p = recall(c), precision(c)
    if r + p == 0.0:
        return 0.0
    return 100.0 * 2.0 * r * p / (r + p)


def pseudo_f_measure(gt: BinaryImage, b: BinaryImage, gt_skeleton: BinaryImage | None = None) -> float:
    """F-Measure whose recall is computed against the skeletonized gt.

    ``gt_skeleton`` may be passed to reuse a precomputed skeleton; it must
    be ``skeletonize(gt)``.
    """
    gt, b = _check_pair(gt, b)
    skel = skeletonize(gt) if gt_skeleton is None else as_mask(gt_skeleton)
    n_skel = int(np.count_nonzero(skel))
    if n_skel == 0:
        return 0.0
    r_skel = int(np.count_nonzero(skel & b)) / n_skel
    p = precision(confusion_counts(gt, b))
    if r_skel + p == 0.0:
        return 0.0
    return 100.0 * 2.0 * r_skel * p / (r_skel + p)


def psnr(gt: BinaryImage, b: BinaryImage) -> float:
    """10*log10(1/MSE) with pixel values in {0,1}; +inf on a perfect match.

    For binary images the squared error at a pixel is 0 or 1, so MSE is the
    fraction of mismatched pixels.
    """
    gt, b = _check_pair(gt, b)
    wrong = int(np.count_nonzero(gt != b))
    if wrong == 0:
        return math.inf
    mse = wrong / gt.size
    return 10.0 * math.log10(1.0 / mse)


def nrm(c: ConfusionCounts, mode: str = "paper-literal") -> float:
    """Negative rate metric: mean of the FN-rate and FP-rate terms."""
    if mode not in NRM_MODES:
        raise ValueError(f"nrm mode must be one of {NRM_MODES}, got {mode!r}")
    fn_den = c.fn + c.fp if mode == "paper-literal" else c.fn + c.tp
    nr_fn = c.fn / fn_den if fn_den else 0.0
    fp_den = c.fp + c.tn
    nr_fp = c.fp / fp_den if fp_den else 0.0
    return (nr_fn + nr_fp) / 2.0


def drd_weight_matrix() -> np.ndarray:
    """5x5 reciprocal-distance weights: 1/hypot(i,j) off center, 0 at the
    center, normalized to sum to 1."""
    ij = np.arange(-2, 3, dtype=np.float64)
    d = np.hypot(ij[:, None], ij[None, :])
    w = np.zeros((5, 5), dtype=np.float64)
    nz = d > 0
    w[nz] = 1.0 / d[nz]
    return w / w.sum()


def nubn(gt: BinaryImage) -> int:
    """Count of non-uniform 8x8 blocks (both ink and background present).

    Blocks tile from the top-left corner; trailing partial blocks are
    tested over their actual pixels.
    """
    gt = as_mask(gt)
    h, w = gt.shape
    rows = np.arange(0, h, 8)
    cols = np.arange(0, w, 8)
    counts = np.add.reduceat(np.add.reduceat(gt.astype(np.int64), rows, axis=0), cols, axis=1)
    rsize = np.diff(np.append(rows, h))
    csize = np.diff(np.append(cols, w))
    areas = rsize[:, None] * csize[None, :]
    return int(np.count_nonzero((counts > 0) & (counts < areas)))


def drd(gt: BinaryImage, b: BinaryImage) -> float:
    """Distance reciprocal distortion over all flipped pixels.

    Every pixel where ``b`` differs from ``gt`` contributes the weighted
    count of ground-truth pixels in its 5x5 neighborhood that disagree with
    the flipped value; reads outside the image count as background.  The
    total is divided by max(NUBN, 1).
    """
    gt, b = _check_pair(gt, b)
    flipped = gt != b
    if not flipped.any():
        return 0.0
    w = drd_weight_matrix()
    gt_pad = np.pad(gt, 2, mode="constant", constant_values=False)
    ys, xs = np.nonzero(flipped)
    bvals = b[ys, xs].astype(np.float64)
    acc = np.zeros(len(ys), dtype=np.float64)
    for i in range(-2, 3):
        for j in range(-2, 3):
            wij = w[i + 2, j + 2]
            if wij == 0.0:
                continue
            gvals = gt_pad[ys + 2 + i, xs + 2 + j].astype(np.float64)
            acc += wij * np.abs(gvals - bvals)
    return float(acc.sum()) / max(nubn(gt), 1)


def mpm(gt: BinaryImage, b: BinaryImage, d_mode: str = "all-pixels",
        contour_distance: np.ndarray | None = None) -> float:
    """Misclassification penalty metric.

    Wrong pixels are charged their Euclidean distance to the ground-truth
    contour; the total is normalized by 2D where D sums the contour
    distance field per ``d_mode``.  ``contour_distance`` may be passed to
    reuse ``distance_transform(extract_contour(gt))``.
    """
    gt, b = _check_pair(gt, b)
    if d_mode not in MPM_D_MODES:
        raise ValueError(f"mpm d_mode must be one of {MPM_D_MODES}, got {d_mode!r}")
    if not gt.any():
        raise EmptyForegroundError("MPM needs a ground truth with foreground")
    if contour_distance is None:
        contour_distance = distance_transform(extract_contour(gt))
    wrong = gt != b
    num = float(contour_distance[wrong].sum())
    if d_mode == "all-pixels":
        d_total = float(contour_distance.sum())
    else:
        d_total = float(contour_distance[gt].sum())
    if d_total == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / (2.0 * d_total)


@dataclass(frozen=True)
class MetricReport:
    """The six measure values for one (ground truth, binarization) pair."""

    f_measure: float
    pseudo_f_measure: float
    psnr: float
    drd: float
    mpm: float
    nrm: float

    def values(self) -> dict[str, float]:
        return {
            "fmeasure": self.f_measure,
            "pfmeasure": self.pseudo_f_measure,
            "psnr": self.psnr,
            "drd": self.drd,
            "mpm": self.mpm,
            "nrm": self.nrm,
        }

    def to_json_dict(self) -> dict[str, object]:
        out: dict[str, object] = dict(self.values())
        if math.isinf(self.psnr):
            out["psnr"] = "inf"
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "MetricReport":
        psnr_val = d["psnr"]
        if isinstance(psnr_val, str):
            psnr_val = math.inf if psnr_val == "inf" else float(psnr_val)
        return cls(
            f_measure=float(d["fmeasure"]),
            pseudo_f_measure=float(d["pfmeasure"]),
            psnr=float(psnr_val),
            drd=float(d["drd"]),
            mpm=float(d["mpm"]),
            nrm=float(d["nrm"]),
        )

    def csv_fields(self) -> list[str]:
        """Human-readable CSV cells: percents/PSNR/DRD at 2 decimals,
        MPM and NRM at 6 (their magnitudes sit well below 1)."""
        return [
            f"{self.f_measure:.2f}",
            f"{self.pseudo_f_measure:.2f}",
            "inf" if math.isinf(self.psnr) else f"{self.psnr:.2f}",
            f"{self.drd:.2f}",
            f"{self.mpm:.6f}",
            f"{self.nrm:.6f}",
        ]


class PreparedGroundTruth:
    """Ground-truth artifacts shared across many binarizations.

    Precomputes the skeleton, the contour distance field, and NUBN once so
    one image can be scored against several methods cheaply.
    """

    def __init__(self, gt: BinaryImage):
        self.gt = as_mask(gt)
        self.skeleton = skeletonize(self.gt)
        if self.gt.any():
            self.contour_distance = distance_transform(extract_contour(self.gt))
        else:
            self.contour_distance = None

    def evaluate(self, b: BinaryImage, nrm_mode: str = "paper-literal",
                 mpm_d_mode: str = "all-pixels") -> MetricReport:
        gt, b = _check_pair(self.gt, b)
        c = confusion_counts(gt, b)
        if self.contour_distance is None:
            raise EmptyForegroundError("MPM needs a ground truth with foreground")
        return MetricReport(
            f_measure=f_measure(c),
            pseudo_f_measure=pseudo_f_measure(gt, b, gt_skeleton=self.skeleton),
            psnr=psnr(gt, b),
            drd=drd(gt, b),
            mpm=mpm(gt, b, d_mode=mpm_d_mode, contour_distance=self.contour_distance),
            nrm=nrm(c, mode=nrm_mode),
        )


def evaluate_pair(gt: BinaryImage, b: BinaryImage, nrm_mode: str = "paper-literal",
                  mpm_d_mode: str = "all-pixels") -> MetricReport:
    """Assemble all six measures for one pair."""
    return PreparedGroundTruth(gt).evaluate(b, nrm_mode=nrm_mode, mpm_d_mode=mpm_d_mode)
