"""Passive-stereo hand segmentation toolkit."""
from .config import MatchConfig
from .constrained import constrained_disparity
from .segment import CalibratedRig, HandState, HandTracker
from .skin import BackgroundModel, SkinModel, train_skin_model

__version__ = "0.1.0"

__all__ = [
    "BackgroundModel",
    "CalibratedRig",
    "HandState",
    "HandTracker",
    "MatchConfig",
    "SkinModel",
    "constrained_disparity",
    "train_skin_model",
]
