"""Pixel-level scoring of predicted masks against ground truth.

Ground truth arrives either as binary masks or as semantic label rasters
whose movable classes are fused into a single dynamic class. Each frame
is scored by F1 with dynamic as the positive class; frames where both
masks are empty have no defined F1 and are excluded from averages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch
from .imagecore import BinaryMask

# Cityscapes ids commonly treated as movable: dynamic(5), person(24),
# rider(25), car(26), truck(27), bus(28), caravan(29), trailer(30),
# train(31), motorcycle(32), bicycle(33). Fully overridable.
DEFAULT_DYNAMIC_LABEL_IDS = frozenset({5, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33})


@dataclass(frozen=True)
class LabelFusionSpec:
    """Set of semantic label ids that collapse into the dynamic class."""

    dynamic_label_ids: frozenset[int] = DEFAULT_DYNAMIC_LABEL_IDS

    def __post_init__(self):
        if not self.dynamic_label_ids:
            raise ValueError("dynamic_label_ids must be non-empty")


@dataclass(frozen=True)
class EvalRecord:
    """Pixel confusion counts and F1 for one frame."""

    key: str
    tp: int
    fp: int
    fn: int
    tn: int
    f1: float | None  # None when both masks are all-static

    @property
    def defined(self) -> bool:
        return self.f1 is not None


@dataclass(frozen=True)
class GroupScore:
    f1: float | None
    frames: int  # frames with a defined F1 that entered the mean


@dataclass(frozen=True)
class EvalReport:
    """Per-frame records plus per-group and overall aggregates."""

    records: tuple[EvalRecord, ...]
    groups: dict[str, GroupScore]
    overall_f1: float | None
    undefined_frames: int
    average: str = "macro"

    def to_dict(self) -> dict:
        return {
            "average": self.average,
            "overall_f1": self.overall_f1,
            "undefined_frames": self.undefined_frames,
            "groups": {
                name: {"f1": score.f1, "frames": score.frames}
                for name, score in sorted(self.groups.items())
            },
            "records": [
                {
                    "key": r.key,
                    "tp": r.tp,
                    "fp": r.fp,
                    "fn": r.fn,
                    "tn": r.tn,
                    "f1": r.f1,
                }
                for r in self.records
            ],
        }


def fuse_ground_truth(label_image: np.ndarray, spec: LabelFusionSpec = LabelFusionSpec()) -> BinaryMask:
    """Binary dynamic mask from a per-pixel semantic label raster."""
    arr = np.asarray(label_image)
    if arr.ndim != 2:
        raise ValueError("label image must be 2-D")
    return BinaryMask(np.isin(arr, sorted(spec.dynamic_label_ids)))


def score_frame(pred: BinaryMask, truth: BinaryMask, *, key: str = "") -> EvalRecord:
    """Confusion counts and F1 for one frame, dynamic as positive class."""
    if pred.bits.shape != truth.bits.shape:
        raise DimensionMismatch(
            f"prediction {pred.width}x{pred.height} vs truth {truth.width}x{truth.height}"
        )
    p = pred.bits
    t = truth.bits
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = p.size - tp - fp - fn
    denom = 2 * tp + fp + fn
    f1 = (2 * tp / denom) if denom > 0 else None
    return EvalRecord(key=key, tp=tp, fp=fp, fn=fn, tn=tn, f1=f1)


def _pooled_f1(records: Sequence[EvalRecord]) -> float | None:
    tp = sum(r.tp for r in records)
    fp = sum(r.fp for r in records)
    fn = sum(r.fn for r in records)
    denom = 2 * tp + fp + fn
    return (2 * tp / denom) if denom > 0 else None


def aggregate(
    records: Sequence[EvalRecord],
    grouping: Mapping[str, str] | Callable[[str], str] | None = None,
    average: str = "macro",
) -> EvalReport:
    """Average per-frame F1 values per group and overall.

    Macro averaging (the default) takes the arithmetic mean of defined
    per-frame F1 values; micro averaging pools the confusion counts
    before computing a single F1. Undefined frames never contribute.
    """
    if average not in ("macro", "micro"):
        raise ValueError("average must be 'macro' or 'micro'")

    def group_of(key: str) -> str:
        if grouping is None:
            return "all"
        if callable(grouping):
            return grouping(key)
        return grouping.get(key, "all")

    by_group: dict[str, list[EvalRecord]] = {}
    for r in records:
        by_group.setdefault(group_of(r.key), []).append(r)

    groups: dict[str, GroupScore] = {}
    for name, rs in by_group.items():
        defined = [r for r in rs if r.defined]
        if average == "micro":
            groups[name] = GroupScore(f1=_pooled_f1(rs), frames=len(defined))
        else:
            mean = sum(r.f1 for r in defined) / len(defined) if defined else None
            groups[name] = GroupScore(f1=mean, frames=len(defined))

    all_defined = [r for r in records if r.defined]
    if average == "micro":
        overall = _pooled_f1(records)
    else:
        overall = sum(r.f1 for r in all_defined) / len(all_defined) if all_defined else None

    return EvalReport(
        records=tuple(records),
        groups=groups,
        overall_f1=overall,
        undefined_frames=len(records) - len(all_defined),
        average=average,
    )
