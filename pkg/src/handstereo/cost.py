"""Matching costs: Census/Hamming, truncated absolute difference, gradient, blends.

A cost volume is a float32 array of shape ``(H, W, dmax + 1)`` with values in
``[0, 1]``; ``vol[y, x, d]`` compares left pixel ``x`` with right pixel
``x - d``. Candidates that fall off the right image cost 1.0.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .imgproc import as_color, as_plane, gradient_x, rgb_to_gray

DEFAULT_CENSUS_WINDOW = (7, 9)  # width, height: 62 bits


@dataclass(frozen=True)
class CensusImage:
    codes: np.ndarray  # (H, W) uint64; bit k is the k-th neighbor, row-major, center skipped
    window_w: int
    window_h: int

    @property
    def n_bits(self):
        return self.window_w * self.window_h - 1

    @property
    def shape(self):
        return self.codes.shape


def census_transform(gray, window_w=DEFAULT_CENSUS_WINDOW[0], window_h=DEFAULT_CENSUS_WINDOW[1]):
    """Per-pixel bit string of "neighbor strictly darker than center".

    Neighbors outside the image compare as equal and contribute a 0 bit.
    """
    gray = as_plane(gray)
    if window_w % 2 == 0 or window_h % 2 == 0 or window_w < 1 or window_h < 1:
        raise ParameterError("census window dimensions must be odd and positive")
    if window_w * window_h > 65:
        raise ParameterError("census window must have at most 64 neighbors")
    height, width = gray.shape
    rw, rh = window_w // 2, window_h // 2
    padded = np.pad(gray, ((rh, rh), (rw, rw)), mode="constant", constant_values=np.nan)
    codes = np.zeros((height, width), dtype=np.uint64)
    bit = 0
    for dy in range(-rh, rh + 1):
        for dx in range(-rw, rw + 1):
            if dy == 0 and dx == 0:
                continue
            neighbor = padded[rh + dy:rh + dy + height, rw + dx:rw + dx + width]
            # NaN padding compares False, i.e. "equal".
            codes |= (neighbor < gray).astype(np.uint64) << np.uint64(bit)
            bit += 1
    return CensusImage(codes, window_w, window_h)


def census_bits(code, n_bits):
    """Bits of a census code as a string, first neighbor first."""
    return "".join("1" if (int(code) >> k) & 1 else "0" for k in range(n_bits))


def hamming(a, b):
    return np.bitwise_count(np.bitwise_xor(a, b))


def _check_dmax(dmax, width):
    if dmax < 0:
        raise ParameterError("dmax must be >= 0")
    if dmax >= width:
        raise ParameterError(f"dmax {dmax} must be smaller than the image width {width}")


def census_cost(left, right, dmax):
    """Normalized Hamming distance between left and disparity-shifted right census codes."""
    if left.shape != right.shape or (left.window_w, left.window_h) != (right.window_w, right.window_h):
        raise DimensionError("census images differ in size or window")
    height, width = left.shape
    _check_dmax(dmax, width)
    vol = np.ones((height, width, dmax + 1), dtype=np.float32)
    scale = np.float32(1.0 / left.n_bits)
    for d in range(dmax + 1):
        vol[:, d:, d] = hamming(left.codes[:, d:], right.codes[:, :width - d]) * scale
    return vol


def _as_channels(img):
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"expected (H, W) or (H, W, C), got {arr.shape}")
    return arr.astype(np.float32)


def ad_cost(left, right, dmax, truncation):
    """``min(mean_c |L(x) - R(x - d)|, truncation) / truncation``.

    Works on color images and on single planes (e.g. gradient images).
    """
    if truncation <= 0:
        raise ParameterError("truncation must be > 0")
    lc, rc = _as_channels(left), _as_channels(right)
    if lc.shape != rc.shape:
        raise DimensionError("left and right images differ in shape")
    height, width = lc.shape[:2]
    _check_dmax(dmax, width)
    vol = np.ones((height, width, dmax + 1), dtype=np.float32)
    for d in range(dmax + 1):
        diff = np.abs(lc[:, d:] - rc[:, :width - d]).mean(axis=2)
        vol[:, d:, d] = np.minimum(diff, truncation) / np.float32(truncation)
    return vol


def gradient_cost(left, right, dmax, truncation):
    """AD cost on horizontal derivatives of the gray images."""
    return ad_cost(gradient_x(rgb_to_gray(left)), gradient_x(rgb_to_gray(right)), dmax, truncation)


def blend_costs(a, b, w):
    """Elementwise ``w * a + (1 - w) * b``."""
    if not 0.0 <= w <= 1.0:
        raise ParameterError("blend weight must lie in [0, 1]")
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"cost volumes differ: {a.shape} vs {b.shape}")
    if w == 1.0:
        return a.astype(np.float32, copy=True)
    if w == 0.0:
        return b.astype(np.float32, copy=True)
    return (np.float32(w) * a + np.float32(1.0 - w) * b).astype(np.float32)


COST_KINDS = ("census", "ad", "ad_gradient", "ad_census")


def matching_cost(left, right, dmax, kind="census", census_window=DEFAULT_CENSUS_WINDOW,
                  ad_truncation=30.0, grad_truncation=8.0, blend_weight=0.5):
    """Cost volume of one of the four supported families for a color pair."""
    left, right = as_color(left), as_color(right)
    if left.shape != right.shape:
        raise DimensionError("left and right images differ in shape")

    def census():
        ww, wh = census_window
        return census_cost(census_transform(rgb_to_gray(left), ww, wh),
                           census_transform(rgb_to_gray(right), ww, wh), dmax)

    if kind == "census":
        return census()
    if kind == "ad":
        return ad_cost(left, right, dmax, ad_truncation)
    if kind == "ad_gradient":
        return blend_costs(ad_cost(left, right, dmax, ad_truncation),
                           gradient_cost(left, right, dmax, grad_truncation), blend_weight)
    if kind == "ad_census":
        return blend_costs(ad_cost(left, right, dmax, ad_truncation), census(), blend_weight)
    raise ParameterError(f"unknown cost kind {kind!r}; expected one of {COST_KINDS}")
