import numpy as np
import pytest

from dynamask.diffvote import (
    DiffFrame,
    VoteConfig,
    VoteMap,
    abs_diff,
    accumulate_votes,
    compute_threshold_stats,
    threshold_diff,
    vote_threshold,
)
from dynamask.errors import ClipMismatch, DimensionMismatch, EmptyFrameSetError
from dynamask.imagecore import BinaryMask, Frame

import oracles


def frame(gray, clip="c", index=0):
    return Frame(gray=gray, clip_id=clip, frame_index=index)


def test_abs_diff_self_is_zero():
    g = np.random.default_rng(0).integers(0, 256, (32, 32)).astype(np.uint8)
    d = abs_diff(frame(g), frame(g, index=1))
    assert (d.values == 0).all()


def test_abs_diff_uniform_frames():
    a = frame(np.full((16, 16), 100, np.uint8))
    b = frame(np.full((16, 16), 60, np.uint8), index=1)
    assert (abs_diff(a, b).values == 40).all()


def test_abs_diff_square_against_flat_background():
    g1 = np.full((64, 64), 50, np.uint8)
    g1[10:20, 30:40] = 200
    g2 = np.full((64, 64), 50, np.uint8)
    d = abs_diff(frame(g1), frame(g2, index=1))
    assert (d.values == oracles.naive_abs_diff(g1, g2)).all()
    assert (d.values[10:20, 30:40] == 150).all()
    assert d.values.sum() == 150 * 100


def test_abs_diff_symmetry():
    rng = np.random.default_rng(5)
    a = frame(rng.integers(0, 256, (32, 32)).astype(np.uint8))
    b = frame(rng.integers(0, 256, (32, 32)).astype(np.uint8), index=1)
    assert (abs_diff(a, b).values == abs_diff(b, a).values).all()


def test_abs_diff_rejects_mismatches():
    a = frame(np.zeros((16, 16), np.uint8))
    with pytest.raises(DimensionMismatch):
        abs_diff(a, frame(np.zeros((16, 17), np.uint8)))
    with pytest.raises(ClipMismatch):
        abs_diff(a, frame(np.zeros((16, 16), np.uint8), clip="other"))


def test_threshold_uniform_diff_is_all_static():
    for c in (0, 7, 255):
        d = DiffFrame(np.full((32, 32), c, np.uint8))
        assert not threshold_diff(d).bits.any()


def test_threshold_half_and_half_edge_case():
    # mu = 100, sigma = 100, threshold 200; no pixel is strictly above 200
    values = np.zeros((32, 32), np.uint8)
    values[:16] = 200
    stats = compute_threshold_stats(DiffFrame(values))
    assert stats.mu == pytest.approx(100.0)
    assert stats.sigma == pytest.approx(100.0)
    assert not threshold_diff(DiffFrame(values)).bits.any()


def test_threshold_one_percent_outliers():
    # 100 of 10000 pixels at 255: mu = 2.55, sigma ~ 25.37, threshold ~ 27.9,
    # so exactly the outliers are marked dynamic
    values = np.zeros((100, 100), np.uint8)
    values.ravel()[:100] = 255
    stats = compute_threshold_stats(DiffFrame(values))
    assert stats.mu == pytest.approx(2.55)
    assert stats.sigma == pytest.approx(25.3722, abs=1e-3)
    mask = threshold_diff(DiffFrame(values))
    assert mask.bits.sum() == 100
    assert mask.bits.ravel()[:100].all()


def test_threshold_marks_at_most_the_nonzero_pixels():
    rng = np.random.default_rng(11)
    for _ in range(20):
        values = (rng.random((32, 32)) < 0.3) * rng.integers(1, 256, (32, 32))
        mask = threshold_diff(DiffFrame(values.astype(np.uint8)))
        assert mask.bits.sum() <= np.count_nonzero(values)


def test_accumulate_identical_masks():
    rng = np.random.default_rng(2)
    bits = rng.random((16, 16)) < 0.5
    votes = accumulate_votes([BinaryMask(bits.copy()) for _ in range(4)])
    assert votes.cardinality == 4
    assert (votes.counts == bits * 4).all()


def test_accumulate_disjoint_masks():
    a = np.zeros((16, 16), bool)
    a[:8] = True
    b = ~a
    votes = accumulate_votes([BinaryMask(a), BinaryMask(b)])
    assert set(np.unique(votes.counts)) == {1}


def test_accumulate_single_overlap_pixel():
    masks = []
    for i in range(3):
        bits = np.zeros((16, 16), bool)
        bits[5, 5] = True
        bits[10, 2 + i] = True
        masks.append(BinaryMask(bits))
    votes = accumulate_votes(masks)
    assert votes.counts[5, 5] == 3
    assert votes.counts.max() == 3
    assert (votes.counts == 3).sum() == 1
    arrays = [m.bits for m in masks]
    assert (votes.counts == oracles.naive_accumulate(arrays)).all()


def test_accumulate_rejects_empty_and_mismatched():
    with pytest.raises(EmptyFrameSetError):
        accumulate_votes([])
    with pytest.raises(DimensionMismatch):
        accumulate_votes([BinaryMask(np.zeros((4, 4), bool)), BinaryMask(np.zeros((5, 4), bool))])


def test_vote_threshold_paper_constant():
    # cardinality 4, tau_c 0.65 -> cutoff 2.6: count 3 passes, count 2 does not
    counts = np.zeros((16, 16), np.int32)
    counts[0, 0] = 3
    counts[0, 1] = 2
    mask = vote_threshold(VoteMap(counts=counts, cardinality=4), VoteConfig())
    assert mask.bits[0, 0]
    assert not mask.bits[0, 1]
    assert mask.bits.sum() == 1


def test_vote_threshold_all_zero_counts():
    votes = VoteMap(counts=np.zeros((16, 16), np.int32), cardinality=5)
    assert not vote_threshold(votes).bits.any()


def test_vote_monotonicity_under_added_masks():
    rng = np.random.default_rng(9)
    masks = [BinaryMask(oracles.rand_mask(rng, 24, 24)) for _ in range(6)]
    prev = accumulate_votes(masks[:3]).counts
    for n in range(4, 7):
        now = accumulate_votes(masks[:n]).counts
        assert (now >= prev).all()
        prev = now


def test_vote_threshold_grows_with_all_ones_masks():
    # under a fixed cutoff, adding an all-dynamic mask never shrinks the output
    rng = np.random.default_rng(10)
    masks = [BinaryMask(oracles.rand_mask(rng, 16, 16)) for _ in range(5)]
    votes = accumulate_votes(masks)
    cutoff_cfg = VoteConfig(tau_c=0.65)
    base = votes.counts > cutoff_cfg.tau_c * votes.cardinality
    grown_votes = accumulate_votes(masks + [BinaryMask(np.ones((16, 16), bool))])
    grown = grown_votes.counts > cutoff_cfg.tau_c * votes.cardinality
    assert (grown | ~base).all()  # base subset of grown


def test_vote_config_validation():
    with pytest.raises(ValueError):
        VoteConfig(tau_c=0.0)
    with pytest.raises(ValueError):
        VoteConfig(tau_c=1.0)


def test_votemap_invariant():
    with pytest.raises(ValueError):
        VoteMap(counts=np.full((4, 4), 3, np.int32), cardinality=2)
