"""Two-pass constrained stereo for hand tracking.

Occluded pixels (left-right check) and unstable pixels (low cost confidence)
are found from a plain color-guided pass. An intermediate disparity is then
computed from costs with occlusions zeroed, aggregated under the skin
probability map as guidance. That intermediate disparity pulls the original
costs of occluded and unstable pixels toward itself before the final
color-guided aggregation and winner-take-all.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .config import MatchConfig
from .errors import DimensionError
from .imgproc import as_color, as_plane, box_mean
from .matcher import (OCCLUDED, UNSTABLE, aggregate_guided, classify_pixels, cost_volumes,
                      left_right_occlusions, plain_from_costs, right_view_disparity, wta)


def zero_occluded(vol, classes):
    """Costs with every occluded pixel's column set to 0; other pixels copied."""
    classes = np.asarray(classes)
    if classes.shape != vol.shape[:2]:
        raise DimensionError("class map does not match the cost volume")
    out = np.array(vol, dtype=np.float32, copy=True)
    out[classes == OCCLUDED] = 0.0
    return out


def intermediate_disparity(n_vol, skin, cfg):
    """Skin-guided aggregation of the occlusion-free costs, then WTA.

    Pixels left without a winner (all costs equal) fall back to the argmin
    of the box-aggregated costs, so the result is valid everywhere.
    """
    skin = as_plane(skin)
    disp, _ = wta(aggregate_guided(n_vol, skin, cfg.radius, cfg.eps))
    bad = disp < 0
    if bad.any():
        fallback = np.argmin(box_mean(n_vol, cfg.radius), axis=2).astype(np.float32)
        disp[bad] = fallback[bad]
    return disp


def adjust_cost(m_vol, d_n, classes, cfg):
    """Bias costs toward the intermediate disparity ``d_n``.

    occluded: ``alpha * |d - d_n| / dmax``; unstable: ``M + beta * |d - d_n| / dmax``;
    stable: ``M`` untouched. ``dmax`` is the volume's top disparity level.
    """
    m_vol = np.asarray(m_vol, dtype=np.float32)
    d_n = np.asarray(d_n, dtype=np.float32)
    classes = np.asarray(classes)
    if d_n.shape != m_vol.shape[:2] or classes.shape != m_vol.shape[:2]:
        raise DimensionError("disparity/class maps do not match the cost volume")
    if np.any(d_n < 0):
        raise ValueError("intermediate disparity must be valid at every pixel")
    dmax = m_vol.shape[2] - 1
    out = m_vol.copy()
    occ = classes == OCCLUDED
    unst = classes == UNSTABLE
    levels = np.arange(m_vol.shape[2], dtype=np.float32)
    if occ.any():
        dist = np.abs(levels[None, :] - d_n[occ][:, None]) / np.float32(dmax)
        out[occ] = np.float32(cfg.alpha) * dist
    if unst.any():
        dist = np.abs(levels[None, :] - d_n[unst][:, None]) / np.float32(dmax)
        out[unst] = m_vol[unst] + np.float32(cfg.beta) * dist
    return out


@dataclass
class ConstrainedResult:
    disparity: np.ndarray
    classes: np.ndarray
    plain: np.ndarray  # first-pass (unconstrained) left disparity
    confidence: np.ndarray
    occlusion: np.ndarray
    intermediate: np.ndarray


def constrained_from_costs(vol_l, vol_r, left, right, skin, cfg):
    """Run the constrained pipeline on precomputed left/right raw cost volumes."""
    left, right = as_color(left), as_color(right)
    skin = as_plane(skin)
    if skin.shape != vol_l.shape[:2] or vol_l.shape != vol_r.shape:
        raise DimensionError("skin map and cost volumes must share dimensions")
    if float(skin.max()) < 0.01:
        warnings.warn("skin probability < 0.01 everywhere: no hand visible", RuntimeWarning, stacklevel=2)

    disp_l, conf = plain_from_costs(vol_l, left, cfg)
    disp_r, _ = right_view_disparity(vol_r, right, cfg)
    occ = left_right_occlusions(disp_l, disp_r, cfg.lr_tol)
    classes = classify_pixels(conf, occ, cfg.tau_conf)

    if not np.any(classes):
        # Every pixel stable: the adjustment is the identity.
        return ConstrainedResult(disp_l, classes, disp_l, conf, occ, disp_l)

    d_n = intermediate_disparity(zero_occluded(vol_l, classes), skin, cfg)
    adjusted = adjust_cost(vol_l, d_n, classes, cfg)
    final, _ = wta(aggregate_guided(adjusted, left, cfg.radius, cfg.eps))
    return ConstrainedResult(final, classes, disp_l, conf, occ, d_n)


def constrained_disparity(left, right, skin, cfg=None):
    """Final left disparity and the pixel class map for a rectified color pair."""
    cfg = cfg or MatchConfig()
    vol_l, vol_r = cost_volumes(left, right, cfg)
    res = constrained_from_costs(vol_l, vol_r, left, right, skin, cfg)
    return res.disparity, res.classes
