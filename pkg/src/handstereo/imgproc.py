"""Image containers and O(1) windowed primitives.

Gray images, probability maps, disparity maps and cost slices are all plain
2-D ``float32`` numpy arrays (row-major, ``[y, x]``). Color images are
``uint8`` arrays of shape ``(H, W, 3)`` in RGB order.
"""
import cv2
import numpy as np

from .errors import DimensionError, ParameterError

LUMA = np.array([0.299, 0.587, 0.114])


def as_plane(img):
    plane = np.asarray(img, dtype=np.float32)
    if plane.ndim != 2 or plane.size == 0:
        raise DimensionError(f"expected a non-empty 2-D plane, got shape {plane.shape}")
    if not np.all(np.isfinite(plane)):
        raise ValueError("image plane contains non-finite samples")
    return plane


def as_color(img):
    color = np.asarray(img)
    if color.ndim != 3 or color.shape[2] != 3 or color.shape[0] == 0 or color.shape[1] == 0:
        raise DimensionError(f"expected an (H, W, 3) color image, got shape {color.shape}")
    return color


def rgb_to_gray(img):
    """Luminance ``0.299 R + 0.587 G + 0.114 B`` as a float32 plane."""
    color = as_color(img)
    return (color.astype(np.float64) @ LUMA).astype(np.float32)


def integral(img):
    """Summed-area table of shape ``(H + 1, W + 1)`` with a zero first row/column.

    ``S[y, x]`` is the sum of all samples ``img[:y, :x]``.
    """
    plane = np.asarray(img, dtype=np.float64)
    if plane.ndim != 2 or plane.size == 0:
        raise DimensionError(f"expected a non-empty 2-D plane, got shape {plane.shape}")
    table = np.zeros((plane.shape[0] + 1, plane.shape[1] + 1), dtype=np.float64)
    np.cumsum(plane, axis=0, out=table[1:, 1:])
    np.cumsum(table[1:, 1:], axis=1, out=table[1:, 1:])
    return table


def rect_sum(table, y0, x0, y1, x1):
    """Sum over rows ``y0:y1`` and columns ``x0:x1`` using four lookups."""
    return table[y1, x1] - table[y0, x1] - table[y1, x0] + table[y0, x0]


def window_counts(height, width, radius):
    """Number of in-bounds samples in each clipped ``(2r+1)^2`` window."""
    ys = np.arange(height)
    xs = np.arange(width)
    cy = np.minimum(ys + radius, height - 1) - np.maximum(ys - radius, 0) + 1
    cx = np.minimum(xs + radius, width - 1) - np.maximum(xs - radius, 0) + 1
    return np.outer(cy, cx).astype(np.float64)


def box_mean(img, radius):
    """Mean over the ``(2r+1) x (2r+1)`` window clipped to the image bounds.

    Accepts a single plane ``(H, W)`` or a stack ``(H, W, C)``; each channel is
    filtered independently. Sums are accumulated in float64 with running sums,
    so the cost does not depend on ``radius``. Returns float32.
    """
    arr = np.asarray(img)
    if arr.ndim not in (2, 3) or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"expected (H, W) or (H, W, C), got shape {arr.shape}")
    radius = int(radius)
    height, width = arr.shape[:2]
    if radius < 0:
        raise ParameterError("radius must be >= 0")
    if radius >= max(height, width):
        raise ParameterError(f"radius {radius} must be smaller than max(width, height) = {max(height, width)}")
    if radius == 0:
        return arr.astype(np.float32, copy=True)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float64)
    sums = _window_sums(arr, radius)
    inv_counts = 1.0 / window_counts(height, width, radius)
    if arr.ndim == 3:
        inv_counts = inv_counts[:, :, None]
    out = np.empty(sums.shape, dtype=np.float32)
    np.multiply(sums, inv_counts, out=out, casting="unsafe")
    return out


def _window_sums(arr, radius):
    """Unnormalized window sums, accumulated in float64."""
    ksize = (2 * radius + 1, 2 * radius + 1)

    def run(a):
        return cv2.boxFilter(np.ascontiguousarray(a), cv2.CV_64F, ksize, normalize=False,
                             borderType=cv2.BORDER_CONSTANT).reshape(a.shape)

    if arr.ndim == 2 or arr.shape[2] <= 128:
        return run(arr)
    # OpenCV caps the channel count per call.
    return np.concatenate([run(arr[:, :, i:i + 128]) for i in range(0, arr.shape[2], 128)], axis=2)


def gradient_x(img):
    """Horizontal central-difference derivative (one-sided at the borders)."""
    arr = np.asarray(img, dtype=np.float32)
    if arr.shape[1] < 2:
        return np.zeros_like(arr)
    return np.gradient(arr, axis=1).astype(np.float32)
