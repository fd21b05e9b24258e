"""dynamask: dynamic-object instance mask extraction from static-camera clips."""

from .diffvote import (
    DiffFrame,
    ThresholdStats,
    VoteConfig,
    VoteMap,
    abs_diff,
    accumulate_votes,
    compute_threshold_stats,
    threshold_diff,
    vote_threshold,
)
from .errors import (
    ClipMismatch,
    ConfigError,
    CountError,
    DecodeError,
    DimensionError,
    DimensionMismatch,
    DynamaskError,
    EmptyFrameSetError,
    ImageIoError,
    SceneSpecError,
)
from .evaluation import (
    DEFAULT_DYNAMIC_LABEL_IDS,
    EvalRecord,
    EvalReport,
    LabelFusionSpec,
    aggregate,
    fuse_ground_truth,
    score_frame,
)
from .imagecore import BinaryMask, Frame, load_frame, load_mask, save_mask, to_grayscale
from .morphology import (
    Instance,
    InstanceSet,
    MorphConfig,
    connected_components,
    dilate,
    erode,
    filter_components,
    refine,
)
from .pipeline import (
    ClipFrameSet,
    PipelineConfig,
    extract_clip,
    extract_query_mask,
    load_clip,
    sample_query_frames,
)
from .superpixel import SuperpixelConfig, SuperpixelLabeling, fill_holes, promote, segment
from .synthgen import BackgroundSpec, MoverSpec, SceneSpec, generate, load_scene_spec

__version__ = "0.1.0"

__all__ = [
    "BackgroundSpec",
    "BinaryMask",
    "ClipFrameSet",
    "ClipMismatch",
    "ConfigError",
    "CountError",
    "DecodeError",
    "DEFAULT_DYNAMIC_LABEL_IDS",
    "DiffFrame",
    "DimensionError",
    "DimensionMismatch",
    "DynamaskError",
    "EmptyFrameSetError",
    "EvalRecord",
    "EvalReport",
    "Frame",
    "ImageIoError",
    "Instance",
    "InstanceSet",
    "LabelFusionSpec",
    "MorphConfig",
    "MoverSpec",
    "PipelineConfig",
    "SceneSpec",
    "SceneSpecError",
    "SuperpixelConfig",
    "SuperpixelLabeling",
    "ThresholdStats",
    "VoteConfig",
    "VoteMap",
    "abs_diff",
    "accumulate_votes",
    "aggregate",
    "compute_threshold_stats",
    "connected_components",
    "dilate",
    "erode",
    "extract_clip",
    "extract_query_mask",
    "fill_holes",
    "filter_components",
    "fuse_ground_truth",
    "generate",
    "load_clip",
    "load_frame",
    "load_mask",
    "load_scene_spec",
    "promote",
    "refine",
    "sample_query_frames",
    "save_mask",
    "score_frame",
    "segment",
    "threshold_diff",
    "to_grayscale",
    "vote_threshold",
]
