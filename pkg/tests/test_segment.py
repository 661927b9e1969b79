import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handstereo.errors import HandInitError
from handstereo.segment import (CalibratedRig, HandState, HandStateError, HandTracker, disparity_to_depth,
                                extract_hand_mask, hand_probability_map, init_state, update_state)
from oracles import components_4

RIG = CalibratedRig(focal_length=500.0, baseline=120.0)
STATE = HandState(mu_d=800.0, initialized=True)


def test_disparity_to_depth():
    assert disparity_to_depth(60, RIG) == pytest.approx(1000.0)
    assert disparity_to_depth(120, RIG) == pytest.approx(500.0)
    assert disparity_to_depth(-1, RIG) == 0.0
    assert disparity_to_depth(0, RIG) == 0.0
    np.testing.assert_allclose(disparity_to_depth(np.array([[60.0, -1.0]]), RIG), [[1000.0, 0.0]])


def test_rig_validation():
    with pytest.raises(ValueError):
        CalibratedRig(0.0, 10.0)


def p_hand(skin, depth, state=STATE):
    return float(hand_probability_map(np.array([[skin]]), np.array([[depth]]), state)[0, 0])


def test_hand_probability_values():
    assert p_hand(0.8, 800.0) == pytest.approx(0.8, abs=1e-12)
    assert p_hand(0.8, 950.0) == pytest.approx(0.8 * math.exp(-0.5))
    assert p_hand(0.8, 950.0) == pytest.approx(0.4852, abs=1e-4)
    assert p_hand(1.0, 1122.0) == pytest.approx(math.exp(-322 ** 2 / 45000))
    assert p_hand(1.0, 1122.0) < 0.1
    assert p_hand(1.0, 0.0) == 0.0


def test_uninitialized_state_rejected():
    with pytest.raises(HandStateError, match="init_state"):
        hand_probability_map(np.ones((2, 2)), np.ones((2, 2)), HandState())


def test_exclusion_boundary_closed_form():
    boundary = 150.0 * math.sqrt(2 * math.log(10))
    assert boundary == pytest.approx(321.9, abs=0.05)
    assert p_hand(1.0, 800.0 + boundary - 0.01) > 0.1
    assert p_hand(1.0, 800.0 + boundary + 0.01) < 0.1


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(1, 5000), st.floats(1, 5000))
def test_hand_never_exceeds_skin(skin, depth, mu):
    state = HandState(mu_d=mu, initialized=True)
    assert p_hand(skin, depth, state) <= skin + 1e-15
    assert p_hand(skin, mu, state) == pytest.approx(skin, abs=1e-12)


def test_mask_hand_lost_on_low_probability():
    assert not extract_hand_mask(np.full((10, 10), 0.05)).any()


def test_mask_single_blob_intact():
    prob = np.zeros((20, 20))
    prob[5:12, 3:9] = 0.6
    np.testing.assert_array_equal(extract_hand_mask(prob), prob > 0.1)


def test_mask_keeps_largest_blob():
    prob = np.zeros((40, 40))
    prob[2:22, 2:22] = 0.5  # 400 px
    prob[30:36, 30:35] = 0.9  # 30 px
    mask = extract_hand_mask(prob)
    comps = components_4(prob > 0.1)
    largest = max(comps, key=len)
    assert sorted(len(c) for c in comps) == [30, 400]
    assert set(zip(*np.nonzero(mask))) == largest


def test_mask_uses_4_connectivity():
    prob = np.zeros((5, 5))
    prob[1, 1] = prob[2, 2] = prob[2, 3] = 0.5  # diagonal contact only
    mask = extract_hand_mask(prob)
    assert mask.sum() == 2 and mask[2, 2] and mask[2, 3]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, 0.9), st.floats(0.0, 0.9))
def test_threshold_monotone(seed, t1, t2):
    prob = np.random.default_rng(seed).random((12, 12))
    lo, hi = sorted((t1, t2))
    assert np.count_nonzero(prob > hi) <= np.count_nonzero(prob > lo)
    assert not np.any((prob > hi) & ~(prob > lo))


def test_update_state_mean():
    depth = np.array([[400.0, 600.0, 999.0]])
    s = update_state(STATE, np.array([[True, True, False]]), depth)
    assert s.mu_d == 500.0 and not s.hand_lost
    assert (s.sigma_d, s.threshold) == (STATE.sigma_d, STATE.threshold)
    assert update_state(STATE, np.array([[True, False, False]]), np.array([[450.0, 1.0, 1.0]])).mu_d == 450.0


def test_update_state_skips_invalid_depth():
    s = update_state(STATE, np.ones((1, 3), bool), np.array([[400.0, 0.0, 600.0]]))
    assert s.mu_d == 500.0


def test_update_state_empty_mask_flags_lost():
    s = update_state(STATE, np.zeros((2, 2), bool), np.ones((2, 2)))
    assert s.hand_lost and s.mu_d == STATE.mu_d and s.lost_frames == 1


def test_init_state_all_hand():
    s = init_state(np.ones((8, 8)), np.full((8, 8), 600.0))
    assert s.initialized and s.mu_d == 600.0


def test_init_state_no_skin():
    with pytest.raises(HandInitError):
        init_state(np.full((8, 8), 0.3), np.full((8, 8), 600.0))


def test_init_state_largest_blob():
    skin = np.zeros((60, 60))
    depth = np.full((60, 60), 2000.0)
    skin[5:45, 5:30] = 0.9  # 1000 px
    depth[5:45, 5:30] = 500.0
    skin[50:55, 40:50] = 0.9  # 50 px
    depth[50:55, 40:50] = 900.0
    sizes = sorted(len(c) for c in components_4(skin > 0.5))
    assert sizes == [50, 1000]
    assert init_state(skin, depth).mu_d == 500.0


def test_tracker_reinitializes_after_losses():
    skin = np.zeros((20, 20))
    skin[5:15, 5:15] = 1.0
    near = np.full((20, 20), 600.0)
    far = np.full((20, 20), 2000.0)
    tracker = HandTracker()
    mask, _ = tracker.step(skin, near)
    assert mask.sum() == 100 and tracker.state.mu_d == 600.0
    for k in range(1, 6):
        mask, _ = tracker.step(skin, far)  # hand jumped beyond the depth gate
        assert not mask.any() and tracker.state.lost_frames == k
    mask, _ = tracker.step(skin, far)
    assert mask.sum() == 100 and tracker.state.mu_d == 2000.0 and not tracker.state.hand_lost
