"""Document-image binarization toolkit.

Reference binarization algorithms, the six classic evaluation measures for
binarization quality, relative scoring/ranking of methods, and a
deterministic generator of synthetic degraded manuscript pages.
"""

from .binarizers import (
    METHODS,
    BinarizerParams,
    binarize,
    niblack,
    niblack_ensemble,
    otsu,
    otsu_threshold,
    sauvola_grid,
    sauvola_grid_threshold,
    su_contrast,
    su_contrast_stages,
)
from .errors import (
    BinbenchError,
    DecodeError,
    EmptyForegroundError,
    EmptySeedError,
    InsufficientMethodsError,
    InvalidSpecError,
    ShapeMismatchError,
)
from .metrics import (
    ConfusionCounts,
    MetricReport,
    PreparedGroundTruth,
    confusion_counts,
    drd,
    drd_weight_matrix,
    evaluate_pair,
    f_measure,
    mpm,
    nrm,
    nubn,
    pseudo_f_measure,
    psnr,
)
from .pnm import read_gray, read_mask, write_gray, write_mask
from .raster import (
    connected_components,
    detect_edges,
    distance_transform,
    distance_transform_squared,
    extract_contour,
    histogram,
    local_stats,
    remove_small_components,
    skeletonize,
)
from .scoring import ResultTable, ScoreBoard, best_per_cell, rank_scores, score
from .synthgen import DEGRADATIONS, PROFILES, DegradationSpec, generate, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "METHODS",
    "BinarizerParams",
    "binarize",
    "niblack",
    "niblack_ensemble",
    "otsu",
    "otsu_threshold",
    "sauvola_grid",
    "sauvola_grid_threshold",
    "su_contrast",
    "su_contrast_stages",
    "BinbenchError",
    "DecodeError",
    "EmptyForegroundError",
    "EmptySeedError",
    "InsufficientMethodsError",
    "InvalidSpecError",
    "ShapeMismatchError",
    "ConfusionCounts",
    "MetricReport",
    "PreparedGroundTruth",
    "confusion_counts",
    "drd",
    "drd_weight_matrix",
    "evaluate_pair",
    "f_measure",
    "mpm",
    "nrm",
    "nubn",
    "pseudo_f_measure",
    "psnr",
    "read_gray",
    "read_mask",
    "write_gray",
    "write_mask",
    "connected_components",
    "detect_edges",
    "distance_transform",
    "distance_transform_squared",
    "extract_contour",
    "histogram",
    "local_stats",
    "remove_small_components",
    "skeletonize",
    "ResultTable",
    "ScoreBoard",
    "best_per_cell",
    "rank_scores",
    "score",
    "DEGRADATIONS",
    "PROFILES",
    "DegradationSpec",
    "generate",
    "generate_corpus",
]
