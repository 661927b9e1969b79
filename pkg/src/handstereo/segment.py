"""Depth-gated hand segmentation with temporal hand-depth tracking."""
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import HandInitError

log = logging.getLogger(__name__)

INVALID_DEPTH = 0.0
SIGMA_D_MM = 150.0
HAND_THRESHOLD = 0.1
LOST_FRAMES_BEFORE_REINIT = 5


@dataclass(frozen=True)
class CalibratedRig:
    focal_length: float  # pixels
    baseline: float  # mm
    cx: float = 0.0
    cy: float = 0.0

    def __post_init__(self):
        if self.focal_length <= 0 or self.baseline <= 0:
            raise ValueError("focal_length and baseline must be positive")

    def depth_to_disparity(self, depth):
        depth = np.asarray(depth, dtype=np.float64)
        with np.errstate(divide="ignore"):
            disp = self.focal_length * self.baseline / depth
        return np.where(depth > 0, disp, -1.0)


@dataclass(frozen=True)
class HandState:
    mu_d: float = 0.0
    sigma_d: float = SIGMA_D_MM
    threshold: float = HAND_THRESHOLD
    initialized: bool = False
    hand_lost: bool = False
    lost_frames: int = 0


class HandStateError(RuntimeError):
    pass


def disparity_to_depth(disp, rig):
    """Depth in mm, ``f * b / d``; non-positive disparities map to INVALID_DEPTH (0)."""
    d = np.asarray(disp, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        depth = np.where(d > 0, rig.focal_length * rig.baseline / d, INVALID_DEPTH)
    return float(depth) if depth.ndim == 0 else depth.astype(np.float32)


def hand_probability_map(skin, depth, state):
    """Skin probability times a peak-normalized Gaussian in depth around ``state.mu_d``."""
    if not state.initialized:
        raise HandStateError("hand state is not initialized; call init_state first")
    skin = np.asarray(skin, dtype=np.float64)
    depth = np.asarray(depth, dtype=np.float64)
    gauss = np.exp(-((depth - state.mu_d) ** 2) / (2.0 * state.sigma_d ** 2))
    return np.where(depth > 0, skin * gauss, 0.0)


def largest_component(mask):
    """Keep only the largest 4-connected component (ties: first in raster order)."""
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask)
    if n <= 1:
        return mask.copy()
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    return labels == np.argmax(sizes)


def extract_hand_mask(prob, threshold=HAND_THRESHOLD):
    """Largest blob of ``prob > threshold``. An all-False result means the hand is lost."""
    return largest_component(np.asarray(prob) > threshold)


def update_state(state, mask, depth):
    """Move ``mu_d`` to the mean valid depth under ``mask``.

    An empty mask (or one with no valid depth) leaves ``mu_d`` unchanged and
    flags the hand as lost.
    """
    mask = np.asarray(mask, dtype=bool)
    depth = np.asarray(depth, dtype=np.float64)
    vals = depth[mask & (depth > 0)]
    if vals.size == 0:
        return replace(state, hand_lost=True, lost_frames=state.lost_frames + 1)
    return replace(state, mu_d=float(vals.mean()), hand_lost=False, lost_frames=0)


def init_state(skin, depth, sigma_d=SIGMA_D_MM, threshold=HAND_THRESHOLD):
    """Seed ``mu_d`` with the median depth of the largest blob of skin > 0.5."""
    skin = np.asarray(skin)
    depth = np.asarray(depth, dtype=np.float64)
    blob = largest_component((skin > 0.5) & (depth > 0))
    vals = depth[blob]
    if vals.size == 0:
        raise HandInitError("no pixel with skin probability > 0.5 and valid depth")
    return HandState(mu_d=float(np.median(vals)), sigma_d=sigma_d, threshold=threshold, initialized=True)


class HandTracker:
    """Frame-serial driver: init on first use, gate by depth, update, recover after losses."""

    def __init__(self, state=None, sigma_d=SIGMA_D_MM, threshold=HAND_THRESHOLD,
                 reinit_after=LOST_FRAMES_BEFORE_REINIT):
        self.state = state or HandState(sigma_d=sigma_d, threshold=threshold)
        self.reinit_after = reinit_after

    def step(self, skin, depth):
        if not self.state.initialized:
            self.state = init_state(skin, depth, self.state.sigma_d, self.state.threshold)
        elif self.state.lost_frames >= self.reinit_after:
            try:
                self.state = init_state(skin, depth, self.state.sigma_d, self.state.threshold)
                log.info("hand re-acquired at %.1f mm", self.state.mu_d)
            except HandInitError:
                pass
        prob = hand_probability_map(skin, depth, self.state)
        mask = extract_hand_mask(prob, self.state.threshold)
        self.state = update_state(self.state, mask, depth)
        if self.state.hand_lost:
            log.info("hand lost (%d consecutive frames)", self.state.lost_frames)
        return mask, prob
