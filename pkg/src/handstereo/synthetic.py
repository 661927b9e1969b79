"""Synthetic stereo scenes and sequences with exact ground truth."""
import json
from pathlib import Path

import numpy as np

from . import io

SKIN_RGB = (205, 140, 110)


def random_dots(height, width, rng, channels=3):
    gray = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    return np.repeat(gray[:, :, None], channels, axis=2)


def random_dot_stereogram(height, width, shift, seed=0):
    """Rectified pair with uniform disparity ``shift``. Returns ``(left, right, gt)``."""
    rng = np.random.default_rng(seed)
    right = random_dots(height, width, rng)
    left = np.empty_like(right)
    left[:, shift:] = right[:, :width - shift]
    left[:, :shift] = random_dots(height, shift, rng)
    gt = np.full((height, width), float(shift), dtype=np.float32)
    return left, right, gt


def skin_texture(shape, rng, base=SKIN_RGB, amplitude=12):
    """Skin-colored texture whose colors stay within a few histogram bins of ``base``."""
    noise = rng.integers(-amplitude, amplitude + 1, size=shape[:2])
    img = np.asarray(base, dtype=np.int64)[None, None, :] + noise[:, :, None]
    return np.clip(img, 0, 255).astype(np.uint8)


def render_layers(layers, background, bg_disp, height, width):
    """Compose a rectified pair from fronto-parallel layers.

    ``background`` and each layer texture are given in right-image
    coordinates; a layer is ``(texture, mask, disparity)`` with
    ``texture``/``mask`` of full image size. Nearer layers (larger
    disparity) occlude farther ones. Returns ``(left, right, gt, layer_ids)``
    where ``layer_ids`` is 0 for background and ``i + 1`` for layer ``i`` in
    the left view.
    """
    right = background.copy()
    order = sorted(range(len(layers)), key=lambda i: layers[i][2])
    for i in order:
        tex, mask, _ = layers[i]
        right[mask] = tex[mask]
    left = np.empty_like(right)
    gt = np.full((height, width), float(bg_disp), dtype=np.float32)
    ids = np.zeros((height, width), dtype=np.int32)
    xs = np.arange(width)
    # Background first, then layers far-to-near in the left view.
    src = np.clip(xs - bg_disp, 0, width - 1)
    left[:] = background[:, src]
    for i in order:
        tex, mask, disp = layers[i]
        for y in range(height):
            cols = np.nonzero(mask[y])[0]
            dst = cols + disp
            keep = dst < width
            left[y, dst[keep]] = tex[y, cols[keep]]
            gt[y, dst[keep]] = disp
            ids[y, dst[keep]] = i + 1
    return left, right, gt, ids


def moving_square_sequence(height=120, width=160, burn_in=50, n_moving=30, size=40,
                           color=(255, 0, 255), noise=2.0, seed=0):
    """Static textured background, then a square of a novel color sliding across.

    Returns ``(frames, masks)``; masks are all-False during burn-in.
    """
    rng = np.random.default_rng(seed)
    base = rng.integers(40, 200, size=(height // 8 + 1, width // 8 + 1, 3))
    background = np.kron(base, np.ones((8, 8, 1)))[:height, :width].astype(np.float64)
    frames, masks = [], []
    span = max(width - size, 1)
    for t in range(burn_in + n_moving):
        frame = background + rng.normal(0.0, noise, background.shape)
        mask = np.zeros((height, width), dtype=bool)
        if t >= burn_in:
            k = t - burn_in
            x0 = int(round(k * span / max(n_moving - 1, 1)))
            y0 = (height - size) // 2
            mask[y0:y0 + size, x0:x0 + size] = True
            frame[mask] = color
        frames.append(np.clip(np.rint(frame), 0, 255).astype(np.uint8))
        masks.append(mask)
    return frames, masks


def disc_mask(height, width, cy, cx, radius):
    yy, xx = np.mgrid[:height, :width]
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2


def hand_path(t, n_frames, height, width, radius, hand_disp):
    """Center of the hand blob at frame ``t``: a slow sweep plus a vertical wave."""
    phase = t / max(n_frames - 1, 1)
    cx = radius + 2 + phase * (width - hand_disp - 2 * radius - 4)
    cy = height / 2 + 0.25 * height * np.sin(2 * np.pi * phase)
    return cy, cx


def hand_training_frames(height=96, width=128, n_background=20, n_waving=40, radius=18, noise=0.0, seed=0):
    """Left-view training sequence: empty scene, then a waving skin blob."""
    rng = np.random.default_rng(seed)
    background = random_dots(height, width, rng)
    tex = skin_texture((height, width, 3), rng)
    frames = []
    for t in range(n_background + n_waving):
        frame = background.copy()
        if t >= n_background:
            cy, cx = hand_path(t - n_background, n_waving, height, width, radius, 0)
            m = disc_mask(height, width, cy, cx, radius)
            frame[m] = tex[m]
        if noise > 0:
            frame = np.clip(np.rint(frame + rng.normal(0.0, noise, frame.shape)), 0, 255).astype(np.uint8)
        frames.append(frame)
    return frames


def hand_stereo_sequence(n_frames=30, height=96, width=128, radius=18, hand_disp=20, bg_disp=4,
                         noise=0.0, distractor=False, absent=(), seed=0):
    """Skin-colored disc over gray random dots, both fronto-parallel.

    ``distractor`` adds a static skin-textured square at background depth;
    ``noise`` is the std of independent Gaussian sensor noise per view;
    frames listed in ``absent`` contain no hand.
    Returns a list of dicts with ``left``, ``right``, ``disparity`` (ground
    truth, left view) and ``mask`` (hand pixels in the left view).
    """
    rng = np.random.default_rng(seed)
    background = random_dots(height, width, rng)
    tex = skin_texture((height, width, 3), rng)
    if distractor:
        side = height // 4
        background[2:2 + side, width - side - 2:width - 2] = skin_texture((side, side, 3), rng)
    out = []
    for t in range(n_frames):
        cy, cx = hand_path(t, n_frames, height, width, radius, hand_disp)
        m = disc_mask(height, width, cy, cx, radius)
        if t in absent:
            m[:] = False
        left, right, gt, ids = render_layers([(tex, m, hand_disp)], background, bg_disp, height, width)
        if noise > 0:
            left, right = (np.clip(np.rint(v + rng.normal(0.0, noise, v.shape)), 0, 255).astype(np.uint8)
                           for v in (left, right))
        out.append({"left": left, "right": right, "disparity": gt, "mask": ids == 1})
    return out


def write_sequence(directory, frames, rig, name="seq"):
    """Write frames from :func:`hand_stereo_sequence` plus a JSON manifest.

    Reference depth is stored as 16-bit PNG in mm, ground-truth disparity as
    16-bit ``d * 256`` PNG. Returns the manifest path.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = []
    for i, fr in enumerate(frames):
        stem = f"{name}_{i:04d}"
        io.write_color(directory / f"{stem}_left.png", fr["left"])
        io.write_color(directory / f"{stem}_right.png", fr["right"])
        io.write_gray(directory / f"{stem}_mask.png", (fr["mask"] * 255).astype(np.uint8))
        io.write_disparity_png(directory / f"{stem}_disp.png", fr["disparity"])
        depth = np.where(fr["disparity"] > 0, rig.focal_length * rig.baseline / np.maximum(fr["disparity"], 1e-6), 0)
        io.write_gray(directory / f"{stem}_depth.png", np.clip(np.rint(depth), 0, 65535).astype(np.uint16))
        records.append({"index": i, "left": f"{stem}_left.png", "right": f"{stem}_right.png",
                        "mask": f"{stem}_mask.png", "disparity": f"{stem}_disp.png", "depth": f"{stem}_depth.png"})
    manifest = {"rig": {"focal_length": rig.focal_length, "baseline": rig.baseline, "cx": rig.cx, "cy": rig.cy},
                "training": False, "frames": records}
    path = directory / f"{name}.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path
