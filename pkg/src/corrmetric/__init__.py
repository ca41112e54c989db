"""Metric distances derived from cosine similarity and Pearson/Spearman correlation."""

from .correlation import (
    Similarity,
    as_vector,
    center,
    cosine,
    pearson,
    rank_transform,
    similarity,
    spearman,
    unit_normalize,
)
from .errors import (
    CorrMetricError,
    DimensionMismatch,
    InvalidInput,
    NonMetricRefused,
    NotApplicable,
    ProbeFailure,
    ZeroNorm,
    ZeroVariance,
)
from .index import VpTree, brute_force_knn, brute_force_range, build
from .mpf import FunctionProbe, MpfReport, classify_transform, named_function
from .transforms import (
    ABSOLUTE_CORRELATION,
    ACUTE_ANGULAR,
    ANGULAR,
    CORRELATION,
    ONE_MINUS,
    DistanceMatrix,
    Metricity,
    Transform,
    angle_of,
    apply_transform,
    distance_matrix,
    pair_distance,
    power_sine,
)
from .verify import planar_counterexample, triangle_suite

__version__ = "0.1.0"
