"""Connected components, binary morphology, and final instance refinement.

Dilation and erosion use a square structuring element realized as an
OR/AND over all kernel offsets of a padded copy of the mask. Dilation
pads with static pixels (the kernel is clipped at the image border);
erosion pads with dynamic pixels so a component touching the border is
not eaten away from the image edge. Under these conventions
erode(m) == ~dilate(~m) holds exactly.

Refinement follows the order dilate -> label components -> drop small
components -> erode each kept component independently.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .imagecore import BinaryMask, save_mask

DEFAULT_KERNEL_SIZE = 5
DEFAULT_MIN_COMPONENT_FRACTION = 0.001

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class MorphConfig:
    """Structuring-element size and component area filter."""

    kernel_size: int = DEFAULT_KERNEL_SIZE
    min_component_fraction: float = DEFAULT_MIN_COMPONENT_FRACTION
    connectivity: int = 8

    def __post_init__(self):
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd and >= 3")
        if not 0.0 < self.min_component_fraction < 1.0:
            raise ValueError("min_component_fraction must be strictly between 0 and 1")
        if self.connectivity != 8:
            raise ValueError("connectivity is fixed to 8")


@dataclass(frozen=True)
class Instance:
    """One connected dynamic component of a frame."""

    instance_id: int
    mask: BinaryMask
    bbox: tuple[int, int, int, int]  # x, y, w, h
    area: int


@dataclass(frozen=True)
class InstanceSet:
    """All dynamic instances extracted from one frame."""

    width: int
    height: int
    instances: tuple[Instance, ...] = ()
    clip_id: str = ""
    frame_index: int = 0

    def __len__(self) -> int:
        return len(self.instances)

    def union_mask(self) -> BinaryMask:
        bits = np.zeros((self.height, self.width), dtype=bool)
        for inst in self.instances:
            bits |= inst.mask.bits
        return BinaryMask(bits)

    def save_instance_masks(self, directory, stem_pattern="{clip}_{frame:04d}_{instance:02d}.png"):
        """Write one PNG per instance; returns the written paths in id order."""
        paths = []
        for inst in self.instances:
            name = stem_pattern.format(
                clip=self.clip_id, frame=self.frame_index, instance=inst.instance_id
            )
            path = directory / name
            save_mask(inst.mask, path)
            paths.append(path)
        return paths


def connected_components(mask: BinaryMask, *, clip_id: str = "", frame_index: int = 0) -> InstanceSet:
    """Label 8-connected dynamic components.

    Instance ids follow the raster-scan order of each component's first
    pixel, so the labeling is deterministic.
    """
    h, w = mask.bits.shape
    lab, n = ndimage.label(mask.bits, structure=_EIGHT)
    if n == 0:
        return InstanceSet(width=w, height=h, clip_id=clip_id, frame_index=frame_index)
    flat = lab.ravel()
    values, firsts = np.unique(flat, return_index=True)
    keep = values > 0
    ordered = values[keep][np.argsort(firsts[keep])]
    areas = np.bincount(flat)
    slices = ndimage.find_objects(lab)
    instances = []
    for rank, lbl in enumerate(ordered):
        sl = slices[lbl - 1]
        x, y = sl[1].start, sl[0].start
        bbox = (int(x), int(y), int(sl[1].stop - x), int(sl[0].stop - y))
        instances.append(
            Instance(
                instance_id=rank,
                mask=BinaryMask(lab == lbl),
                bbox=bbox,
                area=int(areas[lbl]),
            )
        )
    return InstanceSet(
        width=w, height=h, instances=tuple(instances), clip_id=clip_id, frame_index=frame_index
    )


def dilate(mask: BinaryMask, cfg: MorphConfig = MorphConfig()) -> BinaryMask:
    """Square dilation; the kernel is clipped at the image border."""
    r = cfg.kernel_size // 2
    h, w = mask.bits.shape
    padded = np.pad(mask.bits, r, constant_values=False)
    out = np.zeros((h, w), dtype=bool)
    for dy in range(cfg.kernel_size):
        for dx in range(cfg.kernel_size):
            out |= padded[dy : dy + h, dx : dx + w]
    return BinaryMask(out)


def erode(mask: BinaryMask, cfg: MorphConfig = MorphConfig()) -> BinaryMask:
    """Square erosion; pixels outside the image count as dynamic."""
    r = cfg.kernel_size // 2
    h, w = mask.bits.shape
    padded = np.pad(mask.bits, r, constant_values=True)
    out = np.ones((h, w), dtype=bool)
    for dy in range(cfg.kernel_size):
        for dx in range(cfg.kernel_size):
            out &= padded[dy : dy + h, dx : dx + w]
    return BinaryMask(out)


def filter_components(instances: InstanceSet, cfg: MorphConfig, image_area: int) -> InstanceSet:
    """Keep components strictly larger than the configured area fraction."""
    cutoff = cfg.min_component_fraction * image_area
    kept = [inst for inst in instances.instances if inst.area > cutoff]
    renumbered = tuple(replace(inst, instance_id=i) for i, inst in enumerate(kept))
    return replace(instances, instances=renumbered)


def _first_pixel_index(bits: np.ndarray) -> int:
    return int(bits.ravel().argmax())


def refine(
    mask: BinaryMask,
    cfg: MorphConfig = MorphConfig(),
    *,
    clip_id: str = "",
    frame_index: int = 0,
) -> InstanceSet:
    """Full refinement: dilate, label, filter small components, erode each.

    Each kept component is eroded on its own so neighbors cannot prop it
    up; erosion can split a component, in which case every resulting
    piece becomes an instance. Components whose erosion is empty are
    dropped.
    """
    h, w = mask.bits.shape
    dilated = dilate(mask, cfg)
    components = connected_components(dilated, clip_id=clip_id, frame_index=frame_index)
    kept = filter_components(components, cfg, image_area=w * h)
    pieces = []
    for inst in kept.instances:
        eroded = erode(inst.mask, cfg)
        if not eroded.bits.any():
            continue
        for part in connected_components(eroded).instances:
            pieces.append(part)
    pieces.sort(key=lambda p: _first_pixel_index(p.mask.bits))
    final = tuple(replace(p, instance_id=i) for i, p in enumerate(pieces))
    return InstanceSet(
        width=w, height=h, instances=final, clip_id=clip_id, frame_index=frame_index
    )
