"""Deterministic synthetic clips with known moving-object ground truth.

Scenes are a static background (uniform or seeded texture) with simple
movers painted on top in list order, per-frame additive Gaussian sensor
noise, and an exact per-frame ground-truth mask of the mover footprints.
The same seed always renders bit-identical frames, which makes these
clips usable as an end-to-end oracle for the extraction pipeline.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SceneSpecError
from .imagecore import BinaryMask, Frame
from .pipeline import ClipFrameSet, MIN_CLIP_FRAMES

SHAPES = ("rectangle", "ellipse")


@dataclass(frozen=True)
class BackgroundSpec:
    """Uniform intensity, or a static noise texture around it."""

    kind: str = "uniform"  # "uniform" or "noise"
    intensity: int = 90
    amplitude: float = 0.0  # texture std-dev, only for kind="noise"

    def __post_init__(self):
        if self.kind not in ("uniform", "noise"):
            raise SceneSpecError(f"unknown background kind {self.kind!r}")
        if not 0 <= self.intensity <= 255:
            raise SceneSpecError("background intensity must be in [0, 255]")
        if self.amplitude < 0:
            raise SceneSpecError("background amplitude must be >= 0")


@dataclass(frozen=True)
class MoverSpec:
    """One moving object: shape, size, intensity, start position, velocity."""

    shape: str
    width: int
    height: int
    intensity: int
    x: float
    y: float
    vx: float
    vy: float

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise SceneSpecError(f"unknown mover shape {self.shape!r}")
        if self.width < 1 or self.height < 1:
            raise SceneSpecError("mover size must be positive")
        if not 0 <= self.intensity <= 255:
            raise SceneSpecError("mover intensity must be in [0, 255]")

    def position(self, frame: int) -> tuple[int, int]:
        return round(self.x + self.vx * frame), round(self.y + self.vy * frame)


@dataclass(frozen=True)
class SceneSpec:
    """Full description of a synthetic clip."""

    width: int = 128
    height: int = 128
    frame_count: int = 12
    background: BackgroundSpec = BackgroundSpec()
    movers: tuple[MoverSpec, ...] = ()
    noise_sigma: float = 0.0
    seed: int = 0
    clip_id: str = "synthetic"

    def __post_init__(self):
        if self.width < 16 or self.height < 16:
            raise SceneSpecError("scene must be at least 16x16")
        if self.frame_count < MIN_CLIP_FRAMES:
            raise SceneSpecError(f"frame_count must be >= {MIN_CLIP_FRAMES}")
        if self.noise_sigma < 0:
            raise SceneSpecError("noise_sigma must be >= 0")
        for i, mover in enumerate(self.movers):
            for k in range(self.frame_count):
                px, py = mover.position(k)
                if px < 0 or py < 0 or px + mover.width > self.width or py + mover.height > self.height:
                    raise SceneSpecError(
                        f"mover {i} leaves the frame at frame {k} "
                        f"(position {px},{py}, size {mover.width}x{mover.height})"
                    )


def _footprint(mover: MoverSpec, frame: int, width: int, height: int) -> np.ndarray:
    px, py = mover.position(frame)
    fp = np.zeros((height, width), dtype=bool)
    if mover.shape == "rectangle":
        fp[py : py + mover.height, px : px + mover.width] = True
    else:
        cy = py + mover.height / 2.0
        cx = px + mover.width / 2.0
        a = mover.width / 2.0
        b = mover.height / 2.0
        yy, xx = np.mgrid[0:height, 0:width]
        fp = ((xx + 0.5 - cx) / a) ** 2 + ((yy + 0.5 - cy) / b) ** 2 <= 1.0
    return fp


def generate(spec: SceneSpec) -> tuple[ClipFrameSet, list[BinaryMask]]:
    """Render a clip and its per-frame ground-truth masks.

    Per-frame noise uses seed streams spawned from the scene seed, so
    frames are independent of render order and reproducible.
    """
    streams = np.random.SeedSequence(spec.seed).spawn(spec.frame_count + 1)

    background = np.full((spec.height, spec.width), float(spec.background.intensity))
    if spec.background.kind == "noise" and spec.background.amplitude > 0:
        rng = np.random.default_rng(streams[0])
        background += rng.normal(0.0, spec.background.amplitude, background.shape)

    frames = []
    truths = []
    for k in range(spec.frame_count):
        canvas = background.copy()
        truth = np.zeros((spec.height, spec.width), dtype=bool)
        for mover in spec.movers:
            fp = _footprint(mover, k, spec.width, spec.height)
            canvas[fp] = float(mover.intensity)
            truth |= fp
        if spec.noise_sigma > 0:
            rng = np.random.default_rng(streams[k + 1])
            canvas += rng.normal(0.0, spec.noise_sigma, canvas.shape)
        gray = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
        frames.append(Frame(gray=gray, clip_id=spec.clip_id, frame_index=k))
        truths.append(BinaryMask(truth))

    return ClipFrameSet(clip_id=spec.clip_id, frames=tuple(frames)), truths


def _get(section, key, conv, default=None, *, where=""):
    if key not in section:
        if default is None:
            raise SceneSpecError(f"missing key {key!r} in section [{where}]")
        return default
    try:
        return conv(section[key])
    except ValueError as e:
        raise SceneSpecError(f"bad value for {where}.{key}: {e}") from e


def load_scene_spec(path) -> SceneSpec:
    """Read a SceneSpec from an INI-style scene file.

    Expected sections: [scene] with width/height/frames/seed/noise_sigma
    and optional clip_id, an optional [background], and one [mover NAME]
    section per moving object.
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as e:
        raise SceneSpecError(f"cannot read scene file {path}: {e}") from e
    except configparser.Error as e:
        raise SceneSpecError(f"malformed scene file {path}: {e}") from e

    if "scene" not in parser:
        raise SceneSpecError("scene file needs a [scene] section")
    scene = parser["scene"]

    background = BackgroundSpec()
    if "background" in parser:
        bg = parser["background"]
        background = BackgroundSpec(
            kind=_get(bg, "kind", str, "uniform", where="background").strip(),
            intensity=_get(bg, "intensity", int, 90, where="background"),
            amplitude=_get(bg, "amplitude", float, 0.0, where="background"),
        )

    movers = []
    for name in parser.sections():
        if not name.startswith("mover"):
            continue
        sec = parser[name]
        movers.append(
            MoverSpec(
                shape=_get(sec, "shape", str, "rectangle", where=name).strip(),
                width=_get(sec, "width", int, where=name),
                height=_get(sec, "height", int, where=name),
                intensity=_get(sec, "intensity", int, where=name),
                x=_get(sec, "x", float, where=name),
                y=_get(sec, "y", float, where=name),
                vx=_get(sec, "vx", float, 0.0, where=name),
                vy=_get(sec, "vy", float, 0.0, where=name),
            )
        )

    return SceneSpec(
        width=_get(scene, "width", int, where="scene"),
        height=_get(scene, "height", int, where="scene"),
        frame_count=_get(scene, "frames", int, where="scene"),
        background=background,
        movers=tuple(movers),
        noise_sigma=_get(scene, "noise_sigma", float, 0.0, where="scene"),
        seed=_get(scene, "seed", int, 0, where="scene"),
        clip_id=_get(scene, "clip_id", str, path.stem, where="scene").strip(),
    )
