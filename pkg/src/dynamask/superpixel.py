"""Superpixel over-segmentation, vote promotion, and hole filling.

The segmenter is a SLIC-style local k-means over (luma, x, y) features.
Cluster seeds start on a regular grid with spacing equal to the target
region size; assignment searches a window of +/- one grid step around
each cluster center and weights spatial distance by
(compactness / target_region_size)^2 relative to squared luma distance.
Everything is deterministic: ties in assignment go to the lowest cluster
id, and final region ids are renumbered in raster order of each region's
first pixel.

Promotion turns the sparse per-pixel vote mask into whole-region labels:
a region whose dynamic-pixel fraction strictly exceeds the configured
threshold becomes fully dynamic, every other region fully static, and
enclosed static holes are then filled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionError, DimensionMismatch
from .imagecore import BinaryMask, Frame

DEFAULT_REGION_SIZE = 32
DEFAULT_COMPACTNESS = 10.0
DEFAULT_DYNAMIC_FRACTION = 0.05
DEFAULT_ITERATIONS = 10

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True, eq=False)
class SuperpixelLabeling:
    """Per-pixel region ids in [0, region_count); each region 4-connected."""

    labels: np.ndarray
    region_count: int

    def __post_init__(self):
        if not isinstance(self.labels, np.ndarray) or self.labels.ndim != 2:
            raise ValueError("labels must be a 2-D integer array")
        if self.region_count < 1:
            raise ValueError("region_count must be >= 1")
        lo, hi = int(self.labels.min()), int(self.labels.max())
        if lo < 0 or hi >= self.region_count:
            raise ValueError("labels must lie in [0, region_count)")

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class SuperpixelConfig:
    """Segmentation and promotion parameters."""

    target_region_size: int = DEFAULT_REGION_SIZE
    compactness: float = DEFAULT_COMPACTNESS
    dynamic_fraction: float = DEFAULT_DYNAMIC_FRACTION
    iterations: int = DEFAULT_ITERATIONS

    def __post_init__(self):
        if self.target_region_size < 4:
            raise ValueError("target_region_size must be >= 4")
        if self.compactness <= 0:
            raise ValueError("compactness must be positive")
        if not 0.0 < self.dynamic_fraction < 1.0:
            raise ValueError("dynamic_fraction must be strictly between 0 and 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def _grid_seeds(extent: int, step: int) -> np.ndarray:
    n = max(1, round(extent / step))
    return np.array([int((i + 0.5) * extent / n) for i in range(n)], dtype=np.int64)


def segment(frame: Frame, cfg: SuperpixelConfig = SuperpixelConfig()) -> SuperpixelLabeling:
    """Over-segment a frame into superpixels of roughly target_region_size."""
    h, w = frame.gray.shape
    s = cfg.target_region_size
    if w < s or h < s:
        raise DimensionError(f"frame {w}x{h} is smaller than target region size {s}")

    luma = frame.gray.astype(np.float64)
    ys = _grid_seeds(h, s)
    xs = _grid_seeds(w, s)
    cy = np.repeat(ys, len(xs)).astype(np.float64)
    cx = np.tile(xs, len(ys)).astype(np.float64)
    cl = luma[cy.astype(np.int64), cx.astype(np.int64)].copy()
    k = len(cy)

    yy, xx = np.mgrid[0:h, 0:w]
    yy = yy.astype(np.float64)
    xx = xx.astype(np.float64)
    spatial_w = (cfg.compactness / s) ** 2

    labels = np.zeros((h, w), dtype=np.int32)
    for _ in range(cfg.iterations):
        best = np.full((h, w), np.inf)
        labels = np.full((h, w), -1, dtype=np.int32)
        for i in range(k):
            y0 = max(int(cy[i]) - s, 0)
            y1 = min(int(cy[i]) + s + 1, h)
            x0 = max(int(cx[i]) - s, 0)
            x1 = min(int(cx[i]) + s + 1, w)
            cost = (luma[y0:y1, x0:x1] - cl[i]) ** 2 + spatial_w * (
                (yy[y0:y1, x0:x1] - cy[i]) ** 2 + (xx[y0:y1, x0:x1] - cx[i]) ** 2
            )
            win_best = best[y0:y1, x0:x1]
            win_labels = labels[y0:y1, x0:x1]
            better = cost < win_best
            win_best[better] = cost[better]
            win_labels[better] = i

        stray = labels < 0
        if stray.any():
            # Centers can drift more than one grid step from a pixel; give
            # such pixels a full scan over all clusters.
            sy = yy[stray]
            sx = xx[stray]
            sl = luma[stray]
            s_best = np.full(sl.shape, np.inf)
            s_lab = np.zeros(sl.shape, dtype=np.int32)
            for i in range(k):
                cost = (sl - cl[i]) ** 2 + spatial_w * ((sy - cy[i]) ** 2 + (sx - cx[i]) ** 2)
                better = cost < s_best
                s_best[better] = cost[better]
                s_lab[better] = i
            labels[stray] = s_lab

        flat = labels.ravel()
        sizes = np.bincount(flat, minlength=k).astype(np.float64)
        sum_l = np.bincount(flat, weights=luma.ravel(), minlength=k)
        sum_y = np.bincount(flat, weights=yy.ravel(), minlength=k)
        sum_x = np.bincount(flat, weights=xx.ravel(), minlength=k)
        occupied = sizes > 0
        cl[occupied] = sum_l[occupied] / sizes[occupied]
        cy[occupied] = sum_y[occupied] / sizes[occupied]
        cx[occupied] = sum_x[occupied] / sizes[occupied]

    labels, count = _enforce_connectivity(labels, k, s)
    return SuperpixelLabeling(labels=labels, region_count=count)


def _fragment_neighbors(final: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Boundary length against each already-assigned region id around a fragment."""
    h, w = final.shape
    votes = []
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        ny = ys + dy
        nx = xs + dx
        ok = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
        vals = final[ny[ok], nx[ok]]
        votes.append(vals[vals >= 0])
    return np.concatenate(votes)


def _enforce_connectivity(labels: np.ndarray, k: int, s: int) -> tuple[np.ndarray, int]:
    """Split disconnected cluster fragments into valid regions.

    The largest 4-connected fragment of each cluster keeps its label.
    Orphaned fragments of at least a quarter of the target region area
    become regions of their own; smaller ones are merged into the
    adjacent region sharing the longest boundary. Final ids are dense and
    ordered by each region's first pixel in raster order.
    """
    h, w = labels.shape
    min_area = (s * s) // 4
    final = np.full((h, w), -1, dtype=np.int64)
    next_id = k
    pending = []  # (first raster index, area, ys, xs)

    for orig in range(k):
        m = labels == orig
        if not m.any():
            continue
        frag, nfrag = ndimage.label(m, structure=_CROSS)
        if nfrag == 1:
            final[m] = orig
            continue
        areas = np.bincount(frag.ravel())
        firsts = np.full(nfrag + 1, h * w, dtype=np.int64)
        flat = frag.ravel()
        nz = np.flatnonzero(flat)
        # reversed so the assignment left in place is the first occurrence
        firsts[flat[nz[::-1]]] = nz[::-1]
        order = sorted(range(1, nfrag + 1), key=lambda f: (-areas[f], firsts[f]))
        canonical = order[0]
        final[frag == canonical] = orig
        for f in order[1:]:
            ys, xs = np.nonzero(frag == f)
            if areas[f] >= min_area:
                final[ys, xs] = next_id
                next_id += 1
            else:
                pending.append((int(firsts[f]), int(areas[f]), ys, xs))

    pending.sort(key=lambda t: t[0])
    while pending:
        deferred = []
        for first, area, ys, xs in pending:
            touching = _fragment_neighbors(final, ys, xs)
            if touching.size == 0:
                deferred.append((first, area, ys, xs))
                continue
            counts = np.bincount(touching)
            final[ys, xs] = int(counts.argmax())
        if len(deferred) == len(pending):
            # Island of fragments with no assigned neighbor: promote the
            # largest one so the next round can make progress.
            deferred.sort(key=lambda t: (-t[1], t[0]))
            first, area, ys, xs = deferred.pop(0)
            final[ys, xs] = next_id
            next_id += 1
        pending = sorted(deferred, key=lambda t: t[0])

    # dense renumber in raster order of first appearance
    seen, first_idx = np.unique(final.ravel(), return_index=True)
    order = seen[np.argsort(first_idx)]
    remap = np.zeros(int(final.max()) + 1, dtype=np.int32)
    for new, old in enumerate(order):
        remap[old] = new
    return remap[final], len(order)


def promote(
    labeling: SuperpixelLabeling,
    votes_mask: BinaryMask,
    cfg: SuperpixelConfig = SuperpixelConfig(),
) -> BinaryMask:
    """Label whole superpixels dynamic where votes exceed the area fraction.

    A region turns dynamic only if its dynamic-pixel share is strictly
    greater than cfg.dynamic_fraction; the result is constant per region,
    then holes are filled.
    """
    if labeling.labels.shape != votes_mask.bits.shape:
        raise DimensionMismatch("labeling and vote mask dimensions differ")
    r = labeling.region_count
    areas = np.bincount(labeling.labels.ravel(), minlength=r)
    dynamic = np.bincount(labeling.labels[votes_mask.bits], minlength=r)
    promoted = dynamic > cfg.dynamic_fraction * areas
    return fill_holes(BinaryMask(promoted[labeling.labels]))


def fill_holes(mask: BinaryMask) -> BinaryMask:
    """Turn static pixels unreachable from the border into dynamic ones.

    Reachability is a 4-connected flood fill of the static background
    from the image border; dynamic pixels are never changed.
    """
    static = ~mask.bits
    lab, n = ndimage.label(static, structure=_CROSS)
    if n == 0:
        return BinaryMask(mask.bits.copy())
    border = np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))
    border = border[border > 0]
    reachable = np.isin(lab, border)
    return BinaryMask(mask.bits | (static & ~reachable))
