import numpy as np
import pytest

from dynamask.imagecore import BinaryMask
from dynamask.morphology import (
    MorphConfig,
    connected_components,
    dilate,
    erode,
    filter_components,
    refine,
)

import oracles


def mask(bits):
    return BinaryMask(np.asarray(bits, dtype=bool))


def labels_of(instances, h, w):
    out = np.zeros((h, w), dtype=np.int32)
    for inst in instances.instances:
        out[inst.mask.bits] = inst.instance_id + 1
    return out


def test_diagonal_pixels_are_one_component():
    bits = np.zeros((16, 16), bool)
    bits[5, 5] = bits[6, 6] = True
    assert len(connected_components(mask(bits))) == 1


def test_separated_pixels_are_two_components():
    bits = np.zeros((16, 16), bool)
    bits[5, 5] = bits[5, 7] = True
    inst = connected_components(mask(bits))
    assert len(inst) == 2
    # ids follow raster order of first pixels
    assert inst.instances[0].bbox[:2] == (5, 5)
    assert inst.instances[1].bbox[:2] == (7, 5)


def test_components_match_union_find_oracle():
    rng = np.random.default_rng(0)
    for _ in range(25):
        bits = oracles.rand_mask(rng, 64, 64, 0.35)
        inst = connected_components(mask(bits))
        expected, n = oracles.union_find_components(bits)
        assert len(inst) == n
        assert (labels_of(inst, 64, 64) == expected).all()


def test_component_metadata():
    bits = np.zeros((32, 32), bool)
    bits[4:9, 10:16] = True
    inst = connected_components(mask(bits)).instances[0]
    assert inst.bbox == (10, 4, 6, 5)
    assert inst.area == 30
    assert inst.mask.bits.sum() == 30


def test_point_dilation_is_full_kernel():
    bits = np.zeros((17, 17), bool)
    bits[8, 8] = True
    out = dilate(mask(bits))
    assert out.bits.sum() == 25
    assert out.bits[6:11, 6:11].all()


def test_dilate_all_static_stays_static():
    assert not dilate(mask(np.zeros((16, 16), bool))).bits.any()


def test_dilation_merges_nearby_components():
    bits = np.zeros((32, 32), bool)
    bits[10:14, 5:10] = True
    bits[10:14, 14:20] = True  # 4-pixel gap
    assert len(connected_components(mask(bits))) == 2
    assert len(connected_components(dilate(mask(bits)))) == 1


def test_erode_block_to_center():
    bits = np.zeros((17, 17), bool)
    bits[6:11, 6:11] = True
    out = erode(mask(bits))
    assert out.bits.sum() == 1
    assert out.bits[8, 8]


def test_erode_all_dynamic_stays_dynamic():
    assert erode(mask(np.ones((16, 16), bool))).bits.all()


def test_closing_preserves_solid_square():
    bits = np.zeros((64, 64), bool)
    bits[20:40, 10:30] = True
    closed = erode(dilate(mask(bits)))
    assert (closed.bits == bits).all()


def test_dilate_erode_match_naive_oracle():
    rng = np.random.default_rng(1)
    for k in (3, 5, 7):
        cfg = MorphConfig(kernel_size=k)
        for _ in range(10):
            bits = oracles.rand_mask(rng, 32, 32, 0.4)
            assert (dilate(mask(bits), cfg).bits == oracles.naive_dilate(bits, k)).all()
            assert (erode(mask(bits), cfg).bits == oracles.naive_erode(bits, k)).all()


def test_duality():
    rng = np.random.default_rng(2)
    for _ in range(30):
        bits = oracles.rand_mask(rng, 32, 32, 0.5)
        dual = ~dilate(mask(~bits)).bits
        assert (erode(mask(bits)).bits == dual).all()


def test_monotonicity():
    rng = np.random.default_rng(3)
    for _ in range(30):
        m2 = oracles.rand_mask(rng, 32, 32, 0.5)
        m1 = m2 & oracles.rand_mask(rng, 32, 32, 0.7)  # m1 subset of m2
        assert (dilate(mask(m1)).bits <= dilate(mask(m2)).bits).all()
        assert (erode(mask(m1)).bits <= erode(mask(m2)).bits).all()


def test_filter_components_area_cutoff():
    # 640x480 image: cutoff is 307.2 pixels at the default fraction
    bits = np.zeros((480, 640), bool)
    bits[10:30, 10:30] = True  # 400 px, kept
    bits[100:115, 100:120] = True  # 300 px, dropped
    inst = connected_components(mask(bits))
    kept = filter_components(inst, MorphConfig(), image_area=640 * 480)
    assert len(kept) == 1
    assert kept.instances[0].area == 400
    assert kept.instances[0].instance_id == 0


def test_filter_components_empty_set():
    inst = connected_components(mask(np.zeros((32, 32), bool)))
    assert len(filter_components(inst, MorphConfig(), 32 * 32)) == 0


def test_refine_merges_fragments_into_one_instance():
    bits = np.zeros((64, 64), bool)
    bits[20:30, 10:20] = True
    bits[20:30, 24:34] = True  # 4-pixel gap, bridged by 5x5 dilation
    inst = refine(mask(bits))
    assert len(inst) == 1
    union = inst.union_mask()
    assert (union.bits & bits).sum() == bits.sum()  # never shrinks below originals


def test_refine_drops_small_noise_blob():
    # dilated 2-pixel blob is ~30 px; at 256x256 the cutoff is 65.5 px
    bits = np.zeros((256, 256), bool)
    bits[100, 100] = bits[100, 101] = True
    assert len(refine(mask(bits))) == 0


def test_refine_empty_mask():
    inst = refine(mask(np.zeros((32, 32), bool)), clip_id="c", frame_index=3)
    assert len(inst) == 0
    assert inst.clip_id == "c"
    assert inst.frame_index == 3
    assert not inst.union_mask().bits.any()


def test_refine_instances_disjoint_and_connected():
    rng = np.random.default_rng(4)
    for _ in range(10):
        bits = oracles.rand_mask(rng, 64, 64, 0.2)
        inst = refine(mask(bits))
        seen = np.zeros((64, 64), bool)
        for one in inst.instances:
            assert not (seen & one.mask.bits).any()
            seen |= one.mask.bits
            assert oracles.region_is_connected(one.mask.bits, connectivity=8)


def test_refine_extensivity_for_kept_components():
    # every kept component's original pixels survive closing
    rng = np.random.default_rng(5)
    for _ in range(10):
        bits = oracles.rand_mask(rng, 48, 48, 0.25)
        inst = refine(mask(bits))
        union = inst.union_mask().bits
        dilated = dilate(mask(bits))
        kept = filter_components(
            connected_components(dilated), MorphConfig(), image_area=48 * 48
        )
        for comp in kept.instances:
            originals = comp.mask.bits & bits
            assert (union & originals).sum() == originals.sum()


def test_config_validation():
    with pytest.raises(ValueError):
        MorphConfig(kernel_size=4)
    with pytest.raises(ValueError):
        MorphConfig(kernel_size=1)
    with pytest.raises(ValueError):
        MorphConfig(min_component_fraction=0.0)
    with pytest.raises(ValueError):
        MorphConfig(connectivity=4)
