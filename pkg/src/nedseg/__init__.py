"""Group-theoretic image algebra, the natural entropy distance (NED) and
mean shift iterative segmentation with entropy-based stopping rules."""

from .algebra import (
    GrayImage,
    Histogram,
    ScalarWitness,
    add_mod,
    canonical_representative,
    entropy,
    histogram,
    is_scalar,
    negate_mod,
    new_image,
    null_image,
    scalar_image,
    strongly_equivalent,
    sub_abs,
    sub_mod,
    sub_truncate,
    weakly_equivalent,
)
from .evaluation import LabelMap, expected_pri, label_regions, normalize_pri, npri, pri, rand_index
from .mshi import (
    Bandwidths,
    IterationTrace,
    StoppingRule,
    TraceEntry,
    evaluate_rule,
    mean_shift_filter_pass,
    mshi_segment,
)
from .similarity import SimilarityValue, ned, ned_normalized, weak_distance

__version__ = "0.1.0"
