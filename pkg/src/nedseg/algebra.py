"""The abelian group of gray images over Z_n.

Images of a fixed ``height x width`` whose pixels are residues modulo
``levels`` form an abelian group under pixel-wise modular addition.  This
module provides that group (``add_mod``, ``negate_mod``, ``sub_mod``), the two
classical non-group subtractions it replaces (``sub_truncate``, ``sub_abs``),
histograms and Shannon entropy, and the weak/strong equivalence relations
together with a canonical representative of each class modulo scalar images.

All functions are pure; images are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, LevelsError, PixelRangeError, ShapeMismatchError

DEFAULT_LEVELS = 256
DEFAULT_WEAK_TOL = 1e-12


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class GrayImage:
    """A ``height x width`` image with pixels in ``[0, levels - 1]``.

    ``data`` is a read-only ``int64`` array of shape ``(height, width)``.
    Use :func:`new_image` or :meth:`from_array` rather than the raw
    constructor when the input may be untrusted; both validate.
    """

    data: np.ndarray
    levels: int = DEFAULT_LEVELS

    def __post_init__(self) -> None:
        levels = int(self.levels)
        if not _is_power_of_two(levels):
            raise LevelsError(f"levels must be a power of two >= 2, got {self.levels}")
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"image data must be a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype.kind not in "iub":
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise PixelRangeError("pixel values must be integers")
        arr = arr.astype(np.int64, copy=True)
        if arr.min() < 0 or arr.max() >= levels:
            raise PixelRangeError(
                f"pixel values must lie in [0, {levels - 1}], "
                f"found range [{arr.min()}, {arr.max()}]"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_array(cls, array, levels: int = DEFAULT_LEVELS) -> "GrayImage":
        return cls(np.asarray(array), levels)

    @classmethod
    def _trusted(cls, array: np.ndarray, levels: int) -> "GrayImage":
        # Skips validation for results of closed group operations.
        obj = object.__new__(cls)
        array = np.ascontiguousarray(array, dtype=np.int64)
        array.setflags(write=False)
        object.__setattr__(obj, "data", array)
        object.__setattr__(obj, "levels", levels)
        return obj

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def pixels(self) -> list[int]:
        """Row-major pixel values."""
        return self.data.ravel().tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.levels == other.levels
            and self.shape == other.shape
            and bool(np.array_equal(self.data, other.data))
        )

    def __hash__(self) -> int:
        return hash((self.levels, self.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height}, levels={self.levels})"

    def __add__(self, other: "GrayImage") -> "GrayImage":
        return add_mod(self, other)

    def __sub__(self, other: "GrayImage") -> "GrayImage":
        return sub_mod(self, other)

    def __neg__(self) -> "GrayImage":
        return negate_mod(self)


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray
    total: int

    @property
    def levels(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class ScalarWitness:
    is_scalar: bool
    value: int | None = None

    def __bool__(self) -> bool:
        return self.is_scalar


def new_image(width: int, height: int, levels: int, pixels: Sequence[int]) -> GrayImage:
    """Build a validated image from a row-major pixel sequence."""
    if width < 1 or height < 1:
        raise DimensionError(f"width and height must be >= 1, got {width}x{height}")
    if not _is_power_of_two(int(levels)):
        raise LevelsError(f"levels must be a power of two >= 2, got {levels}")
    flat = np.asarray(pixels)
    if flat.ndim != 1 or flat.size != width * height:
        raise DimensionError(
            f"expected {width * height} pixels for a {width}x{height} image, got {flat.size}"
        )
    return GrayImage(flat.reshape(height, width), levels)


def scalar_image(width: int, height: int, levels: int, s: int) -> GrayImage:
    """Image whose every pixel equals ``s``; ``s = 0`` gives the group identity."""
    if not 0 <= s < levels:
        raise PixelRangeError(f"scalar value {s} outside [0, {levels - 1}]")
    return GrayImage(np.full((height, width), s, dtype=np.int64), levels)


def null_image(width: int, height: int, levels: int = DEFAULT_LEVELS) -> GrayImage:
    return scalar_image(width, height, levels, 0)


def check_compatible(a: GrayImage, b: GrayImage) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"image shapes differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    if a.levels != b.levels:
        raise ShapeMismatchError(f"gray level counts differ: {a.levels} vs {b.levels}")


def add_mod(a: GrayImage, b: GrayImage) -> GrayImage:
    check_compatible(a, b)
    return GrayImage._trusted((a.data + b.data) % a.levels, a.levels)


def negate_mod(a: GrayImage) -> GrayImage:
    return GrayImage._trusted((a.levels - a.data) % a.levels, a.levels)


def sub_mod(a: GrayImage, b: GrayImage) -> GrayImage:
    """Group difference ``a + (-b)``; never produces negative values."""
    check_compatible(a, b)
    return GrayImage._trusted((a.data - b.data) % a.levels, a.levels)


def sub_truncate(a: GrayImage, b: GrayImage) -> GrayImage:
    """Ordinary difference with negative results clipped to zero."""
    check_compatible(a, b)
    return GrayImage._trusted(np.maximum(a.data - b.data, 0), a.levels)


def sub_abs(a: GrayImage, b: GrayImage) -> GrayImage:
    check_compatible(a, b)
    return GrayImage._trusted(np.abs(a.data - b.data), a.levels)


def histogram(a: GrayImage) -> Histogram:
    counts = np.bincount(a.data.ravel(), minlength=a.levels).astype(np.int64)
    counts.setflags(write=False)
    return Histogram(counts=counts, total=a.data.size)


def entropy_of_counts(counts, total: int | None = None) -> float:
    """Shannon entropy in bits of a frequency table.

    Zero counts contribute nothing.  The per-level terms are combined with
    :func:`math.fsum`, so the result depends only on the multiset of counts and
    not on which levels hold them; this is what makes ``E(A) == E(-A)`` and
    shift invariance hold exactly rather than to rounding error.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if total is None:
        total = int(counts.sum())
    nz = counts[counts > 0]
    if nz.size <= 1:
        return 0.0
    p = nz / float(total)
    h = -math.fsum((p * np.log2(p)).tolist())
    return max(h, 0.0)


def entropy(a: GrayImage) -> float:
    """Shannon entropy (bits) of the gray-level distribution, in ``[0, log2(levels)]``."""
    h = histogram(a)
    return entropy_of_counts(h.counts, h.total)


def is_scalar(a: GrayImage) -> ScalarWitness:
    first = int(a.data.flat[0])
    if np.all(a.data == first):
        return ScalarWitness(True, first)
    return ScalarWitness(False, None)


def weakly_equivalent(a: GrayImage, b: GrayImage, tol: float = DEFAULT_WEAK_TOL) -> bool:
    """Equal entropies up to ``tol``."""
    check_compatible(a, b)
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return abs(entropy(a) - entropy(b)) <= tol


def strongly_equivalent(a: GrayImage, b: GrayImage) -> bool:
    """True iff ``a = b + S`` for some scalar image ``S``."""
    return is_scalar(sub_mod(a, b)).is_scalar


def canonical_representative(a: GrayImage) -> GrayImage:
    """Representative of ``a``'s class modulo scalar images.

    Shifts ``a`` so that its top-left pixel becomes 0.  Two images get the
    same representative exactly when they are strongly equivalent.
    """
    return GrayImage._trusted((a.data - a.data[0, 0]) % a.levels, a.levels)
