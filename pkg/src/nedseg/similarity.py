"""Entropy-based similarity indices between two images.

``weak_distance`` compares the entropies of the two images and is blind to
where the gray levels sit.  ``ned`` (natural entropy distance) instead takes
the entropy of their group difference, so it is zero exactly when the images
differ by a uniform intensity shift.

Computing ``ned`` costs one pass over the pixels plus a histogram, i.e.
O(width * height), not constant time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .algebra import GrayImage, check_compatible, entropy, sub_mod

SimilarityKind = Literal["weak-entropy", "ned", "ned-normalized"]


@dataclass(frozen=True)
class SimilarityValue:
    value: float
    kind: SimilarityKind

    def __float__(self) -> float:
        return self.value


def weak_distance(a: GrayImage, b: GrayImage) -> SimilarityValue:
    """``|E(a) - E(b)|``, the classical entropy stopping criterion."""
    check_compatible(a, b)
    return SimilarityValue(abs(entropy(a) - entropy(b)), "weak-entropy")


def ned(a: GrayImage, b: GrayImage) -> SimilarityValue:
    """Natural entropy distance: entropy of the modular difference ``a - b``.

    Bounded by ``log2(levels)``; symmetric; zero iff ``a`` and ``b`` are
    strongly equivalent.
    """
    return SimilarityValue(entropy(sub_mod(a, b)), "ned")


def ned_normalized(a: GrayImage, b: GrayImage) -> SimilarityValue:
    """``ned`` divided by ``log2(levels)``, so it lies in ``[0, 1]``."""
    raw = ned(a, b).value
    return SimilarityValue(min(raw / math.log2(a.levels), 1.0), "ned-normalized")
