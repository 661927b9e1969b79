import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handstereo.config import MatchConfig
from handstereo.errors import ParameterError
from handstereo.matcher import (OCCLUDED, STABLE, UNSTABLE, aggregate_guided, classify_pixels, cost_volumes,
                                left_right_occlusions, plain_from_costs, right_view_disparity, wta)
from handstereo.synthetic import random_dot_stereogram
from oracles import guided_regression_oracle


def test_constant_slice_unchanged(rng):
    vol = np.full((12, 14, 3), 0.37, dtype=np.float32)
    np.testing.assert_allclose(aggregate_guided(vol, rng.random((12, 14)), 3, 1e-4), vol, atol=1e-5)
    color = rng.integers(0, 256, size=(12, 14, 3), dtype=np.uint8)
    np.testing.assert_allclose(aggregate_guided(vol, color, 3, 1e-4), vol, atol=1e-5)


def test_self_guidance_limit(rng):
    p = rng.random((16, 16)).astype(np.float32)
    out = aggregate_guided(p[:, :, None], p, 2, 1e-8)
    np.testing.assert_allclose(out[:, :, 0], p, atol=1e-3)


def test_gray_guide_matches_regression_oracle(rng):
    guide = rng.random((16, 16))
    p = rng.random((16, 16))
    out = aggregate_guided(p[:, :, None], guide, 3, 1e-4)[:, :, 0]
    assert np.abs(out - guided_regression_oracle(guide, p, 3, 1e-4)).max() < 1e-5


def test_color_guide_matches_regression_oracle(rng):
    guide = rng.integers(0, 256, size=(12, 13, 3), dtype=np.uint8)
    p = rng.random((12, 13))
    out = aggregate_guided(p[:, :, None], guide, 2, 1e-2)[:, :, 0]
    ref = guided_regression_oracle(guide / 255.0, p, 2, 1e-2)
    assert np.abs(out - ref).max() < 1e-4


def test_aggregate_bounded_for_large_eps(rng):
    vol = rng.random((16, 16, 4)).astype(np.float32)
    out = aggregate_guided(vol, rng.random((16, 16)), 3, 10.0)
    assert out.min() >= vol.min() - 0.05 and out.max() <= vol.max() + 0.05


def test_eps_must_be_positive(rng):
    with pytest.raises(ParameterError):
        aggregate_guided(np.zeros((4, 4, 2)), np.zeros((4, 4)), 1, 0.0)


def costs(*values):
    return np.array(values, dtype=np.float32)[None, None, :]


@pytest.mark.parametrize("values, expected", [((3, 1, 2), 1), ((1, 1, 5), 0)])
def test_wta_argmin_and_ties(values, expected):
    disp, _ = wta(costs(*values))
    assert disp[0, 0] == expected


def test_wta_confidence_boundary():
    _, conf = wta(costs(0.96, 0.97, 1.0))
    assert conf[0, 0] == pytest.approx(0.04, abs=1e-6)


def test_wta_confidence_skips_adjacent_level():
    _, conf = wta(costs(0.5, 0.51, 1.0, 2.0))
    assert conf[0, 0] == pytest.approx(0.5)


def test_wta_zero_second_best():
    _, conf = wta(costs(0.0, 0.4, 0.0))
    assert conf[0, 0] == 0.0


def test_wta_all_equal_is_invalid():
    disp, conf = wta(costs(0.3, 0.3, 0.3))
    assert disp[0, 0] == -1 and conf[0, 0] == 0


def test_wta_needs_two_levels():
    with pytest.raises(ParameterError):
        wta(np.zeros((2, 2, 1)))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.0, 5.0), st.integers(0, 2 ** 32 - 1))
def test_wta_affine_invariance(scale, offset, seed):
    vol = np.random.default_rng(seed).random((5, 6, 7))
    d0, c0 = wta(vol)
    d1, _ = wta(scale * vol + offset)
    np.testing.assert_array_equal(d0, d1)
    _, c2 = wta(scale * vol)
    np.testing.assert_allclose(c0, c2, rtol=1e-5, atol=1e-7)


def test_confidence_changes_under_offset():
    _, c0 = wta(costs(0.5, 0.9, 1.0))
    _, c1 = wta(costs(1.5, 1.9, 2.0))
    assert c0[0, 0] != pytest.approx(c1[0, 0])


def test_lr_examples():
    dl = np.zeros((1, 10), np.float32)
    dr = np.zeros((1, 10), np.float32)
    dl[0, 7] = 5
    dr[0, 2] = 5
    assert not left_right_occlusions(dl, dr)[0, 7]
    dr[0, 2] = 2
    assert left_right_occlusions(dl, dr)[0, 7]
    dl[0, 3] = 5  # match would be x = -2
    assert left_right_occlusions(dl, dr)[0, 3]
    dl[0, 4] = -1
    assert left_right_occlusions(dl, dr)[0, 4]


def test_lr_symmetric_on_consistent_pair():
    w = 20
    dl = np.full((3, w), 4.0, np.float32)
    dr = np.full((3, w), 4.0, np.float32)
    occ_l = left_right_occlusions(dl, dr)
    # swapping roles mirrors the images
    occ_r = left_right_occlusions(dr[:, ::-1], dl[:, ::-1])[:, ::-1]
    np.testing.assert_array_equal(occ_l[:, 4:], False)
    np.testing.assert_array_equal(occ_r[:, :w - 4], False)
    np.testing.assert_array_equal(occ_l[:, :4], True)
    np.testing.assert_array_equal(occ_r[:, w - 4:], True)


def test_stereogram_no_interior_occlusions():
    left, right, _ = random_dot_stereogram(48, 64, 6, seed=9)
    cfg = MatchConfig(dmax=12, radius=4)
    vl, vr = cost_volumes(left, right, cfg)
    dl, _ = plain_from_costs(vl, left, cfg)
    dr, _ = right_view_disparity(vr, right, cfg)
    occ = left_right_occlusions(dl, dr, cfg.lr_tol)
    m = cfg.radius
    assert not occ[m:-m, 6 + m:-m].any()
    assert (dl[m:-m, 6 + m:-m] == 6).mean() >= 0.99
    assert (dr[m:-m, m:-6 - m] == 6).mean() >= 0.99


@pytest.mark.parametrize("occ, conf, expected", [(True, 0.5, OCCLUDED), (False, 0.01, UNSTABLE),
                                                 (False, 0.04, STABLE), (True, 0.0, OCCLUDED)])
def test_classify_pixels(occ, conf, expected):
    assert classify_pixels(np.array([[conf]]), np.array([[occ]]), 0.04)[0, 0] == expected
