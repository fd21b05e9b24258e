"""Frame differencing, adaptive thresholding, and per-pixel vote accumulation.

Given one query frame and the remaining frames of its clip, each pair
produces an absolute difference frame, each difference frame is
thresholded into a binary mask at mean + standard deviation of its own
pixels, and the masks are summed into a per-pixel vote map. Pixels voted
dynamic by more than a configurable fraction of the masks survive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ClipMismatch, DimensionMismatch, EmptyFrameSetError
from .imagecore import BinaryMask, Frame

DEFAULT_VOTE_FRACTION = 0.65


@dataclass(frozen=True, eq=False)
class DiffFrame:
    """Per-pixel absolute gray-level difference between two frames."""

    values: np.ndarray

    def __post_init__(self):
        if not isinstance(self.values, np.ndarray) or self.values.ndim != 2 or self.values.dtype != np.uint8:
            raise ValueError("values must be a 2-D uint8 array")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ThresholdStats:
    """Whole-image intensity statistics of one difference frame."""

    mu: float
    sigma: float


@dataclass(frozen=True, eq=False)
class VoteMap:
    """Per-pixel count of binary difference masks that voted dynamic."""

    counts: np.ndarray
    cardinality: int

    def __post_init__(self):
        if not isinstance(self.counts, np.ndarray) or self.counts.ndim != 2:
            raise ValueError("counts must be a 2-D integer array")
        if self.cardinality < 1:
            raise ValueError("cardinality must be >= 1")
        if self.counts.min() < 0 or self.counts.max() > self.cardinality:
            raise ValueError("counts must lie in [0, cardinality]")

    @property
    def width(self) -> int:
        return self.counts.shape[1]

    @property
    def height(self) -> int:
        return self.counts.shape[0]


@dataclass(frozen=True)
class VoteConfig:
    """Vote-stage parameter: fraction of masks that must agree."""

    tau_c: float = DEFAULT_VOTE_FRACTION

    def __post_init__(self):
        if not 0.0 < self.tau_c < 1.0:
            raise ValueError("tau_c must be strictly between 0 and 1")


def abs_diff(query: Frame, other: Frame) -> DiffFrame:
    """Absolute per-pixel difference of two gray planes from the same clip."""
    if query.gray.shape != other.gray.shape:
        raise DimensionMismatch(
            f"frame dimensions differ: {query.width}x{query.height} vs {other.width}x{other.height}"
        )
    if query.clip_id != other.clip_id:
        raise ClipMismatch(f"frames from different clips: {query.clip_id!r} vs {other.clip_id!r}")
    d = np.abs(query.gray.astype(np.int16) - other.gray.astype(np.int16))
    return DiffFrame(d.astype(np.uint8))


def compute_threshold_stats(diff: DiffFrame) -> ThresholdStats:
    """Mean and population standard deviation of all pixels, in float64."""
    values = diff.values
    return ThresholdStats(mu=float(values.mean()), sigma=float(values.std()))


def threshold_diff(diff: DiffFrame) -> BinaryMask:
    """Mark pixels strictly above mean + sigma of this difference frame.

    The strict inequality makes a uniform difference frame (sigma = 0)
    come out all-static.
    """
    stats = compute_threshold_stats(diff)
    return BinaryMask(diff.values > (stats.mu + stats.sigma))


def accumulate_votes(masks: Sequence[BinaryMask]) -> VoteMap:
    """Sum a non-empty collection of binary difference masks pixel-wise."""
    if len(masks) == 0:
        raise EmptyFrameSetError("cannot accumulate votes over an empty mask set")
    shape = masks[0].bits.shape
    counts = np.zeros(shape, dtype=np.int32)
    for m in masks:
        if m.bits.shape != shape:
            raise DimensionMismatch("all masks in a vote set must share dimensions")
        counts += m.bits
    return VoteMap(counts=counts, cardinality=len(masks))


def vote_threshold(votes: VoteMap, cfg: VoteConfig = VoteConfig()) -> BinaryMask:
    """Keep pixels whose vote count strictly exceeds tau_c * cardinality."""
    cutoff = cfg.tau_c * votes.cardinality
    return BinaryMask(votes.counts > cutoff)
