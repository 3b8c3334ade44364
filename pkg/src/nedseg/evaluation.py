"""Region extraction and partition-agreement scores (RI, PRI, NPRI).

Scores are computed from contingency tables in O(N log N) rather than by
enumerating the N(N-1)/2 pixel pairs.  Agreement counts are kept as exact
integers and combined with :class:`fractions.Fraction`, so identities such as
``pri(S, [G]) == rand_index(S, G)`` hold bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import ndimage

from .algebra import GrayImage
from .errors import (
    DegenerateNormalizationError,
    DimensionError,
    EmptyGroundTruthError,
    ShapeMismatchError,
)


def densify(labels: np.ndarray) -> np.ndarray:
    """Renumber labels to ``0..R-1`` in order of first appearance (row-major)."""
    flat = np.asarray(labels).ravel()
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.ravel()].reshape(np.shape(labels))


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel region identifiers, stored densely as a ``(height, width)`` array."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.labels)
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionError(f"label map must be a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype.kind not in "iub":
            raise ValueError("labels must be integers")
        if arr.min() < 0:
            raise ValueError("labels must be nonnegative")
        dense = densify(arr)
        dense.setflags(write=False)
        object.__setattr__(self, "labels", dense)

    @classmethod
    def from_flat(cls, width: int, height: int, labels: Sequence[int]) -> "LabelMap":
        flat = np.asarray(labels)
        if flat.size != width * height:
            raise DimensionError(f"expected {width * height} labels, got {flat.size}")
        return cls(flat.reshape(height, width))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def n_regions(self) -> int:
        return int(self.labels.max()) + 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.labels, other.labels))

    def __hash__(self) -> int:
        return hash((self.shape, self.labels.tobytes()))


GroundTruthSet = Sequence[LabelMap]


def label_regions(image: GrayImage, connectivity: int = 4) -> LabelMap:
    """Connected components of exactly-equal intensity."""
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    structure = ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)
    data = image.data
    out = np.empty(data.shape, dtype=np.int64)
    offset = 0
    for value in np.unique(data):
        comp, n = ndimage.label(data == value, structure=structure)
        mask = comp > 0
        out[mask] = comp[mask] - 1 + offset
        offset += n
    return LabelMap(out)


def _check_same_shape(a: LabelMap, b: LabelMap) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"label maps differ in size: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def _check_ground_truth(gts: GroundTruthSet, shape: tuple[int, int] | None = None) -> None:
    if len(gts) == 0:
        raise EmptyGroundTruthError("ground-truth set is empty")
    ref = shape or gts[0].shape
    for g in gts:
        if g.shape != ref:
            raise ShapeMismatchError(f"ground truth of shape {g.shape} does not match {ref}")


def _together(counts: np.ndarray) -> int:
    c = counts.astype(np.int64)
    return int(np.sum(c * (c - 1) // 2))


def _agreements(a: LabelMap, b: LabelMap) -> int:
    """Number of unordered pixel pairs on which two partitions agree."""
    x = a.labels.ravel()
    y = b.labels.ravel()
    n = x.size
    # unique over encoded pairs keeps memory O(N) even with many regions
    _, joint = np.unique(x * (int(y.max()) + 1) + y, return_counts=True)
    both = _together(joint)
    in_a = _together(np.bincount(x))
    in_b = _together(np.bincount(y))
    # pairs apart in both = total - in_a - in_b + both
    return n * (n - 1) // 2 - in_a - in_b + 2 * both


def _n_pairs(shape: tuple[int, int]) -> int:
    n = shape[0] * shape[1]
    return n * (n - 1) // 2


def _ratio(num: int, den: int) -> Fraction:
    # A single pixel has no pairs; treat it as perfect agreement.
    return Fraction(1) if den == 0 else Fraction(num, den)


def rand_index(s: LabelMap, g: LabelMap) -> float:
    """Fraction of pixel pairs on which ``s`` and ``g`` agree (together or apart)."""
    _check_same_shape(s, g)
    return float(_ratio(_agreements(s, g), _n_pairs(s.shape)))


def _pri_exact(s: LabelMap, gts: GroundTruthSet) -> Fraction:
    _check_ground_truth(gts, s.shape)
    total = sum(_agreements(s, g) for g in gts)
    return _ratio(total, len(gts) * _n_pairs(s.shape))


def _expected_pri_exact(gts: GroundTruthSet) -> Fraction:
    _check_ground_truth(gts)
    k = len(gts)
    total = 0
    for i in range(k):
        total += _n_pairs(gts[i].shape)
        for j in range(i + 1, k):
            total += 2 * _agreements(gts[i], gts[j])
    return _ratio(total, k * k * _n_pairs(gts[0].shape))


def pri(s: LabelMap, gts: GroundTruthSet) -> float:
    """Probabilistic Rand index of ``s`` against a set of ground truths.

    Equal to the mean Rand index over the set, since the per-pair score is
    linear in the empirical co-labelling probability.
    """
    return float(_pri_exact(s, gts))


def expected_pri(gts: GroundTruthSet) -> float:
    """Baseline PRI with the co-labelling probability estimated from ``gts`` itself.

    With ``q = p`` the per-pair term is ``p**2 + (1 - p)**2``, which expands
    to the mean Rand index over all ordered pairs of ground truths
    (self-pairs included).
    """
    return float(_expected_pri_exact(gts))


def normalize_pri(pri_value, expected):
    """Map a PRI onto ``[-1, 1]`` relative to a baseline expectation.

    ``(pri - expected) / (1 - expected)``, with 1 as the maximum attainable
    index, clipped below at -1.  Works on floats or Fractions.  Raises :class:`DegenerateNormalizationError` if ``expected``
    is 1.
    """
    if expected == 1:
        raise DegenerateNormalizationError(
            "expected PRI is 1 (ground truths leave no room for normalization)"
        )
    value = (pri_value - expected) / (1 - expected)
    return max(value, -1)


def npri(s: LabelMap, gts: GroundTruthSet) -> float:
    """Normalized PRI of ``s`` using :func:`expected_pri` of ``gts`` as baseline.

    With the per-image baseline the raw ratio can fall under -1 when the
    ground truths nearly agree with each other, hence the clip in
    :func:`normalize_pri`.  A single ground truth always gives an expected PRI
    of 1 and raises :class:`DegenerateNormalizationError`.
    """
    return float(normalize_pri(_pri_exact(s, gts), _expected_pri_exact(gts)))
