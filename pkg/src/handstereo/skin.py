"""Online per-scene skin color model.

A waving-hand training sequence is split into foreground/background by an
adaptive Gaussian mixture background model; the foreground is taken to be
the hand. Two RGB histograms are accumulated (hand pixels and all pixels)
and skin probability is their ratio.
"""
import json
import logging

import numpy as np
from scipy import ndimage

from .errors import DimensionError
from .imgproc import as_color

log = logging.getLogger(__name__)


class BackgroundModel:
    """Per-pixel mixture of ``k`` isotropic RGB Gaussians (Stauffer-Grimson style).

    A sample matches a component when its Mahalanobis distance is below
    ``match_sigma``. The best match (highest ``weight / sigma``) is pulled
    toward the sample; when nothing matches, the weakest component is
    replaced by a new wide Gaussian centered on the sample. Components are
    ranked by ``weight / sigma`` and the smallest prefix whose cumulative
    weight exceeds ``bg_threshold`` describes the background.
    """

    def __init__(self, height, width, k=5, learning_rate=0.01, bg_threshold=0.7,
                 var_floor=4.0, var_init=225.0, match_sigma=2.5):
        if k < 1:
            raise ValueError("need at least one mixture component")
        self.shape = (int(height), int(width))
        self.k = k
        self.learning_rate = learning_rate
        self.bg_threshold = bg_threshold
        self.var_floor = var_floor
        self.var_init = var_init
        self.match_sigma = match_sigma
        self.weights = np.zeros(self.shape + (k,), dtype=np.float64)
        self.means = np.zeros(self.shape + (k, 3), dtype=np.float64)
        self.variances = np.full(self.shape + (k,), var_init, dtype=np.float64)
        self.n_frames = 0

    def apply(self, frame):
        """Classify ``frame`` and update the mixture. Returns a bool mask (True = foreground)."""
        frame = as_color(frame)
        if frame.shape[:2] != self.shape:
            raise DimensionError(f"frame {frame.shape[:2]} does not match model {self.shape}")
        x = frame.astype(np.float64)
        self.n_frames += 1
        if self.n_frames == 1:
            # No evidence yet: seed one component per pixel, report all background.
            self.means[:, :, 0] = x
            self.weights[:, :, 0] = 1.0
            return np.zeros(self.shape, dtype=bool)

        rank = self.weights / np.sqrt(self.variances)
        order = np.argsort(-rank, axis=2, kind="stable")
        w_sorted = np.take_along_axis(self.weights, order, axis=2)
        cum_before = np.cumsum(w_sorted, axis=2) - w_sorted
        is_bg_sorted = cum_before < self.bg_threshold
        is_bg = np.zeros_like(is_bg_sorted)
        np.put_along_axis(is_bg, order, is_bg_sorted, axis=2)

        diff = x[:, :, None, :] - self.means
        dist2 = np.einsum("hwkc,hwkc->hwk", diff, diff)
        matches = (dist2 < self.match_sigma ** 2 * self.variances) & (self.weights > 0)
        any_match = matches.any(axis=2)
        best = np.argmax(np.where(matches, rank, -np.inf), axis=2)
        foreground = ~np.take_along_axis(is_bg & matches, best[:, :, None], axis=2)[:, :, 0]
        foreground |= ~any_match

        rho = self.learning_rate
        owner = np.zeros_like(matches)
        np.put_along_axis(owner, best[:, :, None], any_match[:, :, None], axis=2)
        self.weights *= 1.0 - rho
        self.weights += rho * owner

        yy, xx = np.nonzero(any_match)
        kk = best[yy, xx]
        w = self.weights[yy, xx, kk]
        step = np.minimum(rho / np.maximum(w, 1e-12), 1.0)
        mu = self.means[yy, xx, kk]
        mu += step[:, None] * (x[yy, xx] - mu)
        self.means[yy, xx, kk] = mu
        resid = np.sum((x[yy, xx] - mu) ** 2, axis=1) / 3.0
        var = self.variances[yy, xx, kk]
        self.variances[yy, xx, kk] = np.maximum((1.0 - step) * var + step * resid, self.var_floor)

        yy, xx = np.nonzero(~any_match)
        if yy.size:
            weakest = np.argmin(rank[yy, xx], axis=1)
            self.means[yy, xx, weakest] = x[yy, xx]
            self.variances[yy, xx, weakest] = self.var_init
            self.weights[yy, xx, weakest] = rho

        self.weights /= self.weights.sum(axis=2, keepdims=True)
        return foreground


def background_update(model, frame):
    return model.apply(frame)


class SkinModel:
    """Paired RGB histograms (hand pixels, all pixels) over uniform bins.

    ``skin_probability(c) = hand(bin(c)) / image(bin(c))``; bins seen fewer than
    ``min_evidence`` times report 0.
    """

    def __init__(self, bins_per_channel=32, hand_counts=None, image_counts=None, min_evidence=5):
        if 256 % bins_per_channel:
            raise ValueError("bins_per_channel must divide 256")
        self.bins_per_channel = bins_per_channel
        self.min_evidence = min_evidence
        n = bins_per_channel ** 3
        self.hand_counts = np.zeros(n, np.int64) if hand_counts is None else np.asarray(hand_counts, np.int64)
        self.image_counts = np.zeros(n, np.int64) if image_counts is None else np.asarray(image_counts, np.int64)
        if self.hand_counts.shape != (n,) or self.image_counts.shape != (n,):
            raise DimensionError(f"histograms must have {n} bins")
        if np.any(self.hand_counts < 0) or np.any(self.hand_counts > self.image_counts):
            raise ValueError("histograms violate 0 <= hand <= image")
        self._table = None

    def bin_index(self, colors):
        c = np.asarray(colors).astype(np.int64) // (256 // self.bins_per_channel)
        b = self.bins_per_channel
        return (c[..., 0] * b + c[..., 1]) * b + c[..., 2]

    def accumulate(self, frame, fg):
        """Add every pixel of ``frame`` to the image histogram and ``fg`` pixels to the hand histogram."""
        frame = as_color(frame)
        fg = np.asarray(fg, dtype=bool)
        if fg.shape != frame.shape[:2]:
            raise DimensionError("mask and frame dimensions differ")
        n = self.image_counts.size
        idx = self.bin_index(frame)
        self.image_counts += np.bincount(idx.ravel(), minlength=n)
        self.hand_counts += np.bincount(idx[fg], minlength=n)
        self._table = None
        return self

    def probability_table(self):
        if self._table is None:
            table = np.zeros(self.image_counts.size, dtype=np.float64)
            ok = self.image_counts >= max(self.min_evidence, 1)
            table[ok] = self.hand_counts[ok] / self.image_counts[ok]
            self._table = table
        return self._table

    def skin_probability(self, color):
        return float(self.probability_table()[self.bin_index(color)])

    def probability_map(self, frame):
        frame = as_color(frame)
        return self.probability_table()[self.bin_index(frame)].astype(np.float32)

    def to_dict(self):
        return {
            "bins_per_channel": self.bins_per_channel,
            "hand_counts": self.hand_counts.tolist(),
            "image_counts": self.image_counts.tolist(),
        }

    @classmethod
    def from_dict(cls, data, min_evidence=5):
        return cls(data["bins_per_channel"], data["hand_counts"], data["image_counts"], min_evidence)

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)

    @classmethod
    def load(cls, path, min_evidence=5):
        with open(path) as f:
            return cls.from_dict(json.load(f), min_evidence)


def accumulate(model, frame, fg):
    return model.accumulate(frame, fg)


def skin_probability(model, color):
    return model.skin_probability(color)


def skin_probability_map(model, frame):
    return model.probability_map(frame)


def clean_mask(fg):
    """3x3 morphological opening of a foreground mask."""
    return ndimage.binary_opening(fg, structure=np.ones((3, 3), dtype=bool))


def train_skin_model(frames, burn_in=0, bins_per_channel=32, min_evidence=5, **gmm_kwargs):
    """Train a SkinModel from an iterable of RGB frames of a waving hand.

    Every frame feeds the background model; frames after the first
    ``burn_in`` are accumulated into the histograms with an opened
    foreground mask.
    """
    skin = SkinModel(bins_per_channel, min_evidence=min_evidence)
    bg = None
    used = 0
    for i, frame in enumerate(frames):
        frame = as_color(frame)
        if bg is None:
            bg = BackgroundModel(*frame.shape[:2], **gmm_kwargs)
        fg = bg.apply(frame)
        if i < burn_in:
            continue
        skin.accumulate(frame, clean_mask(fg))
        used += 1
    if used == 0:
        log.warning("no training frames after burn-in; skin model is empty")
    return skin
