"""Fundamental raster types, grayscale conversion, and image file I/O.

Arrays are numpy, shape (height, width), row-major. Gray planes and
difference values are uint8, masks are bool. All types are frozen
dataclasses and safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionError, ImageIoError

MIN_SIDE = 16

_DIGITS = re.compile(r"\d+")


def _check_plane(arr: np.ndarray, name: str, dtype) -> None:
    if not isinstance(arr, np.ndarray) or arr.ndim != 2 or arr.dtype != dtype:
        raise ValueError(f"{name} must be a 2-D {np.dtype(dtype).name} array")


@dataclass(frozen=True, eq=False)
class Frame:
    """A single decoded image: gray plane, optional color plane, clip identity."""

    gray: np.ndarray
    color: np.ndarray | None = None
    clip_id: str = ""
    frame_index: int = 0

    def __post_init__(self):
        _check_plane(self.gray, "gray", np.uint8)
        h, w = self.gray.shape
        if w < MIN_SIDE or h < MIN_SIDE:
            raise DimensionError(f"frame is {w}x{h}, minimum is {MIN_SIDE}x{MIN_SIDE}")
        if self.color is not None:
            if (
                not isinstance(self.color, np.ndarray)
                or self.color.shape != (h, w, 3)
                or self.color.dtype != np.uint8
            ):
                raise ValueError("color must be a uint8 array of shape (height, width, 3)")

    @property
    def width(self) -> int:
        return self.gray.shape[1]

    @property
    def height(self) -> int:
        return self.gray.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Per-pixel boolean classification: True = dynamic, False = static."""

    bits: np.ndarray

    def __post_init__(self):
        _check_plane(self.bits, "bits", np.bool_)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def dynamic_count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    @classmethod
    def zeros(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))


def _rgb_to_gray(color: np.ndarray) -> np.ndarray:
    # Rec. 601 luma in exact integer arithmetic (round half up) so the
    # conversion is bit-reproducible across platforms.
    c = color.astype(np.int32)
    g = (299 * c[..., 0] + 587 * c[..., 1] + 114 * c[..., 2] + 500) // 1000
    return g.astype(np.uint8)


def to_grayscale(frame: Frame) -> Frame:
    """Derive the gray plane of a color frame using Rec. 601 weights."""
    if frame.color is None:
        raise ValueError("frame has no color plane")
    return Frame(
        gray=_rgb_to_gray(frame.color),
        color=frame.color,
        clip_id=frame.clip_id,
        frame_index=frame.frame_index,
    )


def parse_frame_index(name: str) -> int:
    """Frame ordinal from the last run of digits in a file name, 0 if none."""
    runs = _DIGITS.findall(Path(name).stem)
    return int(runs[-1]) if runs else 0


def load_frame(path, clip_id: str | None = None) -> Frame:
    """Decode a PNG or JPEG file into a Frame.

    The frame index is parsed from the filename digits; the clip id
    defaults to the parent directory name.
    """
    p = Path(path)
    try:
        with Image.open(p) as img:
            img.load()
            if img.mode == "L":
                gray = np.asarray(img, dtype=np.uint8)
                color = None
            else:
                color = np.asarray(img.convert("RGB"), dtype=np.uint8)
                gray = _rgb_to_gray(color)
    except FileNotFoundError as e:
        raise ImageIoError(f"cannot read {p}: {e}") from e
    except UnidentifiedImageError as e:
        raise DecodeError(f"cannot decode {p}: {e}") from e
    except OSError as e:
        if p.exists():
            raise DecodeError(f"cannot decode {p}: {e}") from e
        raise ImageIoError(f"cannot read {p}: {e}") from e
    return Frame(
        gray=gray,
        color=color,
        clip_id=clip_id if clip_id is not None else p.parent.name,
        frame_index=parse_frame_index(p.name),
    )


def save_mask(mask: BinaryMask, path) -> None:
    """Write a mask as an 8-bit single-channel PNG, dynamic=255 / static=0."""
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    try:
        Image.fromarray(arr, mode="L").save(Path(path), format="PNG")
    except OSError as e:
        raise ImageIoError(f"cannot write {path}: {e}") from e


def load_mask(path) -> BinaryMask:
    """Read a mask PNG written by save_mask; any value >= 128 is dynamic."""
    p = Path(path)
    try:
        with Image.open(p) as img:
            arr = np.asarray(img.convert("L"), dtype=np.uint8)
    except FileNotFoundError as e:
        raise ImageIoError(f"cannot read {p}: {e}") from e
    except UnidentifiedImageError as e:
        raise DecodeError(f"cannot decode {p}: {e}") from e
    except OSError as e:
        if p.exists():
            raise DecodeError(f"cannot decode {p}: {e}") from e
        raise ImageIoError(f"cannot read {p}: {e}") from e
    return BinaryMask(arr >= 128)


def save_gray_png(values: np.ndarray, path) -> None:
    """Write a uint8 raster (e.g. a difference frame) as an 8-bit PNG."""
    try:
        Image.fromarray(np.asarray(values, dtype=np.uint8), mode="L").save(Path(path), format="PNG")
    except OSError as e:
        raise ImageIoError(f"cannot write {path}: {e}") from e


def save_uint16_png(values: np.ndarray, path) -> None:
    """Write an integer raster (vote counts, region labels) as a 16-bit PNG."""
    arr = np.asarray(values)
    if arr.min() < 0 or arr.max() > 65535:
        raise ValueError("values out of uint16 range")
    try:
        Image.fromarray(arr.astype(np.uint16)).save(Path(path), format="PNG")
    except OSError as e:
        raise ImageIoError(f"cannot write {path}: {e}") from e


def load_label_raster(path) -> np.ndarray:
    """Read a per-pixel integer label image (8-bit or 16-bit PNG) as int32."""
    p = Path(path)
    try:
        with Image.open(p) as img:
            img.load()
            arr = np.asarray(img)
    except FileNotFoundError as e:
        raise ImageIoError(f"cannot read {p}: {e}") from e
    except UnidentifiedImageError as e:
        raise DecodeError(f"cannot decode {p}: {e}") from e
    except OSError as e:
        if p.exists():
            raise DecodeError(f"cannot decode {p}: {e}") from e
        raise ImageIoError(f"cannot read {p}: {e}") from e
    if arr.ndim != 2:
        raise DecodeError(f"{p} is not a single-channel label image")
    return arr.astype(np.int32)
