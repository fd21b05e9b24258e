"""Per-clip orchestration of the five extraction stages.

A clip is a set of frames recorded by one static camera at one location.
A handful of query frames is sampled from each clip; for every query
frame all remaining frames are differenced against it, the differences
are thresholded and voted, votes are promoted to superpixels, and the
result is morphologically refined into dynamic instances.

Directory layout contract: the input root holds one subdirectory per
clip with frames named by zero-padded index; the output root mirrors it
with masks/, instances/ and intermediates/ subfolders per clip.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .diffvote import VoteConfig, abs_diff, accumulate_votes, threshold_diff, vote_threshold
from .errors import CountError, DimensionMismatch
from .imagecore import (
    BinaryMask,
    Frame,
    load_frame,
    parse_frame_index,
    save_gray_png,
    save_mask,
    save_uint16_png,
)
from .morphology import InstanceSet, MorphConfig, refine
from .superpixel import SuperpixelConfig, promote, segment

DEFAULT_QUERY_COUNT = 5
MIN_CLIP_FRAMES = 6

FRAME_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class ClipFrameSet:
    """All frames of one clip plus the sampled query-frame indices."""

    clip_id: str
    frames: tuple[Frame, ...]
    query_indices: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.frames) < MIN_CLIP_FRAMES:
            raise CountError(
                f"clip {self.clip_id!r} has {len(self.frames)} frames, needs >= {MIN_CLIP_FRAMES}"
            )
        shape = self.frames[0].gray.shape
        for fr in self.frames:
            if fr.gray.shape != shape:
                raise DimensionMismatch(f"clip {self.clip_id!r} mixes frame dimensions")
        idx = self.query_indices
        if list(idx) != sorted(set(idx)):
            raise ValueError("query_indices must be distinct and sorted")
        if idx and (idx[0] < 0 or idx[-1] >= len(self.frames)):
            raise ValueError("query_indices out of range")


@dataclass(frozen=True)
class PipelineConfig:
    """Aggregated stage parameters and sampling policy."""

    vote: VoteConfig = field(default_factory=VoteConfig)
    superpixel: SuperpixelConfig = field(default_factory=SuperpixelConfig)
    morph: MorphConfig = field(default_factory=MorphConfig)
    query_count: int = DEFAULT_QUERY_COUNT
    query_sampling: str = "even"  # "even" or "random"
    sampling_seed: int = 0
    dump_intermediates: bool = False

    def __post_init__(self):
        if self.query_count < 1:
            raise ValueError("query_count must be >= 1")
        if self.query_sampling not in ("even", "random"):
            raise ValueError("query_sampling must be 'even' or 'random'")


def sample_query_frames(
    clip: ClipFrameSet, count: int, *, mode: str = "even", seed: int = 0
) -> ClipFrameSet:
    """Pick query frames from a clip.

    Even mode selects index floor(k * n / count) for k in [0, count); the
    spacing guarantees distinct indices. Random mode draws a sorted
    sample without replacement from the given seed.
    """
    n = len(clip.frames)
    if count > n - 1:
        raise CountError(f"cannot sample {count} query frames from a clip of {n}")
    if count < 1:
        raise CountError("query frame count must be >= 1")
    if mode == "random":
        rng = np.random.default_rng(seed)
        chosen = sorted(int(i) for i in rng.choice(n, size=count, replace=False))
    else:
        chosen = sorted({min(k * n // count, n - 1) for k in range(count)})
    return replace(clip, query_indices=tuple(chosen))


def extract_query_mask(
    clip: ClipFrameSet,
    query_index: int,
    cfg: PipelineConfig = PipelineConfig(),
    dump_dir: Path | None = None,
) -> tuple[BinaryMask, InstanceSet]:
    """Run all five stages for one query frame.

    Returns the union mask over all final instances plus the instance
    set itself; a frame with no moving content legitimately yields an
    empty instance set and an all-static mask.
    """
    if query_index not in clip.query_indices:
        raise ValueError(f"index {query_index} is not a sampled query frame")
    query = clip.frames[query_index]

    if dump_dir is not None:
        dump_dir.mkdir(parents=True, exist_ok=True)

    masks = []
    for i, other in enumerate(clip.frames):
        if i == query_index:
            continue
        diff = abs_diff(query, other)
        bdf = threshold_diff(diff)
        masks.append(bdf)
        if dump_dir is not None:
            save_gray_png(diff.values, dump_dir / f"adf_{other.frame_index:04d}.png")
            save_mask(bdf, dump_dir / f"bdf_{other.frame_index:04d}.png")

    votes = accumulate_votes(masks)
    voted = vote_threshold(votes, cfg.vote)
    labeling = segment(query, cfg.superpixel)
    promoted = promote(labeling, voted, cfg.superpixel)
    instances = refine(
        promoted, cfg.morph, clip_id=clip.clip_id, frame_index=query.frame_index
    )

    if dump_dir is not None:
        save_uint16_png(votes.counts, dump_dir / "votes.png")
        save_mask(voted, dump_dir / "voted.png")
        save_uint16_png(labeling.labels, dump_dir / "superpixels.png")
        save_mask(promoted, dump_dir / "promoted.png")

    return instances.union_mask(), instances


def extract_clip(
    clip: ClipFrameSet,
    cfg: PipelineConfig = PipelineConfig(),
    *,
    jobs: int = 1,
    dump_root: Path | None = None,
) -> list[tuple[int, BinaryMask, InstanceSet]]:
    """Extract masks for every query frame of a clip.

    Query frames are sampled first if the clip has none. Results are
    ordered by frame index regardless of the number of worker threads;
    query frames share no mutable state so they can run concurrently.
    """
    if not clip.query_indices:
        clip = sample_query_frames(
            clip, cfg.query_count, mode=cfg.query_sampling, seed=cfg.sampling_seed
        )

    def dump_dir_for(idx: int) -> Path | None:
        if dump_root is None:
            return None
        return dump_root / f"{clip.frames[idx].frame_index:04d}"

    def run(idx: int) -> tuple[int, BinaryMask, InstanceSet]:
        union, instances = extract_query_mask(clip, idx, cfg, dump_dir=dump_dir_for(idx))
        return clip.frames[idx].frame_index, union, instances

    indices = sorted(clip.query_indices)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(i) for i in indices]
    results.sort(key=lambda r: r[0])
    return results


def scan_clip_dir(clip_dir: Path) -> list[Path]:
    """Frame files of a clip directory, ordered by parsed index then name."""
    files = [
        p
        for p in clip_dir.iterdir()
        if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES
    ]
    files.sort(key=lambda p: (parse_frame_index(p.name), p.name))
    return files


def load_clip(clip_dir: Path) -> tuple[ClipFrameSet, dict[int, Path]]:
    """Load every frame of a clip directory.

    Frame identity comes from the filename digits; if those collide the
    frames are renumbered by position. The returned mapping links each
    frame index to its source file for output naming.
    """
    clip_dir = Path(clip_dir)
    files = scan_clip_dir(clip_dir)
    parsed = [parse_frame_index(p.name) for p in files]
    if len(set(parsed)) != len(files):
        parsed = list(range(len(files)))
    frames = []
    sources: dict[int, Path] = {}
    for idx, path in zip(parsed, files):
        frame = load_frame(path, clip_id=clip_dir.name)
        if frame.frame_index != idx:
            frame = replace(frame, frame_index=idx)
        frames.append(frame)
        sources[idx] = path
    return ClipFrameSet(clip_id=clip_dir.name, frames=tuple(frames)), sources
