"""Filter-and-refine subsequence matching for univariate time series."""

__version__ = "0.1.0"

from .core import Dataset, Sequence, Window, load_dataset, normalize, slice_values
from .distances import DistanceSpec, DtwConstraint, dtw, edr, erp, lp_norm
from .index import IndexConfig, SubsequenceIndex, build_index, load_index, save_index
from .matcher import (
    MatchResult,
    brute_force_knn,
    brute_force_range,
    dualmatch_range,
    frm_range,
    generalmatch_range,
    knn,
    range_query,
)
from .transforms import ReducedVector, TransformSpec

__all__ = [
    "Dataset",
    "Sequence",
    "Window",
    "load_dataset",
    "normalize",
    "slice_values",
    "DistanceSpec",
    "DtwConstraint",
    "dtw",
    "edr",
    "erp",
    "lp_norm",
    "IndexConfig",
    "SubsequenceIndex",
    "build_index",
    "load_index",
    "save_index",
    "MatchResult",
    "brute_force_knn",
    "brute_force_range",
    "dualmatch_range",
    "frm_range",
    "generalmatch_range",
    "knn",
    "range_query",
    "ReducedVector",
    "TransformSpec",
]
