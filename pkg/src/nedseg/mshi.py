"""Mean shift iterative (MSHi) segmentation with pluggable stopping rules.

Each outer iteration applies one flat-kernel mean shift filtering pass over
the joint spatial-range domain, then compares the new image with the previous
one.  The loop stops once the comparison drops to ``epsilon`` or after
``max_iterations`` passes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .algebra import GrayImage, check_compatible, entropy
from .similarity import ned, weak_distance

log = logging.getLogger(__name__)

RuleKind = Literal["ned", "weak-entropy"]

DEFAULT_HR = 15.0
DEFAULT_HS = 12
DEFAULT_EPSILON = {"ned": 0.5, "weak-entropy": 0.002}
DEFAULT_MAX_ITERATIONS = 500


@dataclass(frozen=True)
class Bandwidths:
    """Range radius ``h_r`` (gray levels) and spatial radius ``h_s`` (pixels)."""

    h_r: float = DEFAULT_HR
    h_s: int = DEFAULT_HS

    def __post_init__(self) -> None:
        if not self.h_r > 0:
            raise ValueError(f"h_r must be positive, got {self.h_r}")
        if int(self.h_s) != self.h_s or self.h_s < 1:
            raise ValueError(f"h_s must be an integer >= 1, got {self.h_s}")


@dataclass(frozen=True)
class StoppingRule:
    kind: RuleKind = "ned"
    epsilon: float | None = None
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self) -> None:
        if self.kind not in DEFAULT_EPSILON:
            raise ValueError(f"unknown stopping rule kind {self.kind!r}")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", DEFAULT_EPSILON[self.kind])
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    criterion: float
    entropy: float


@dataclass
class IterationTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    terminated_by: Literal["threshold", "cap"] | None = None

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def criteria(self) -> list[float]:
        return [e.criterion for e in self.entries]


def mean_shift_filter_pass(image: GrayImage, h: Bandwidths) -> GrayImage:
    """One flat-kernel mean shift filtering pass.

    Every output pixel is the mean of the input values ``v_j`` with
    Chebyshev distance ``<= h_s`` from the pixel and ``|v_j - v_i| <= h_r``,
    rounded half up.  Windows are clipped at the image border.  Range
    distance is the ordinary integer difference, not the modular one.
    """
    v = image.data
    rows, cols = v.shape
    hs = int(h.h_s)
    # |v_j - v_i| never exceeds levels - 1, so larger radii are equivalent
    radius = min(float(h.h_r), float(image.levels))
    # the pad value is out of range of every real pixel, which clips the window
    padded = np.pad(v, hs, mode="constant", constant_values=-(1 << 40))
    sums = np.zeros_like(v)
    counts = np.zeros_like(v)
    diff = np.empty_like(v)
    mask = np.empty(v.shape, dtype=bool)
    for dy in range(2 * hs + 1):
        for dx in range(2 * hs + 1):
            nb = padded[dy:dy + rows, dx:dx + cols]
            np.subtract(nb, v, out=diff)
            np.abs(diff, out=diff)
            np.less_equal(diff, radius, out=mask)
            np.multiply(nb, mask, out=diff)
            sums += diff
            counts += mask
    # round half up: floor(s / c + 1/2) in exact integer arithmetic
    out = (2 * sums + counts) // (2 * counts)
    np.clip(out, 0, image.levels - 1, out=out)
    return GrayImage._trusted(out, image.levels)


def evaluate_rule(rule: StoppingRule, previous: GrayImage, current: GrayImage) -> float:
    check_compatible(previous, current)
    if rule.kind == "ned":
        return ned(previous, current).value
    return weak_distance(previous, current).value


def mshi_segment(
    image: GrayImage,
    h: Bandwidths | None = None,
    rule: StoppingRule | None = None,
) -> tuple[GrayImage, IterationTrace]:
    """Iterate filtering passes until the stopping rule fires.

    At least one pass always runs.  Returns the last filtered image and the
    per-iteration trace; ``trace.terminated_by`` is ``"cap"`` when
    ``rule.max_iterations`` was reached with the criterion still above
    ``rule.epsilon``.
    """
    h = h or Bandwidths()
    rule = rule or StoppingRule()
    trace = IterationTrace()
    current = image
    for k in range(1, rule.max_iterations + 1):
        filtered = mean_shift_filter_pass(current, h)
        criterion = evaluate_rule(rule, current, filtered)
        trace.entries.append(TraceEntry(k, criterion, entropy(filtered)))
        log.debug("iteration %d: %s=%.6f", k, rule.kind, criterion)
        current = filtered
        if criterion <= rule.epsilon:
            trace.terminated_by = "threshold"
            break
    else:
        trace.terminated_by = "cap"
    return current, trace
