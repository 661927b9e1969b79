"""Slow, direct reference implementations used as independent test oracles."""
from collections import deque

import numpy as np


def clipped_window(y, x, h, w, r):
    return max(y - r, 0), min(y + r + 1, h), max(x - r, 0), min(x + r + 1, w)


def naive_box_mean(img, r):
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            y0, y1, x0, x1 = clipped_window(y, x, h, w, r)
            out[y, x] = img[y0:y1, x0:x1].mean()
    return out


def guided_regression_oracle(guide, p, r, eps):
    """Guided filter by explicit per-window ridge regression.

    For each window k, fit ``p ~ a_k * I + b_k`` minimizing
    ``sum (a I + b - p)^2 + eps a^2 * n`` in closed form from raw sums, then
    average ``a_k I_i + b_k`` over all windows containing pixel i.
    Color guides use the 3x3 normal equations solved with numpy.linalg.
    """
    guide = np.asarray(guide, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if guide.ndim == 2:
        guide = guide[:, :, None]
    h, w, c = guide.shape
    a = np.zeros((h, w, c))
    b = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            y0, y1, x0, x1 = clipped_window(y, x, h, w, r)
            gi = guide[y0:y1, x0:x1].reshape(-1, c)
            pi = p[y0:y1, x0:x1].ravel()
            n = len(pi)
            gm = gi.mean(axis=0)
            pm = pi.mean()
            centered = gi - gm
            cov = centered.T @ centered / n
            rhs = centered.T @ (pi - pm) / n
            a[y, x] = np.linalg.solve(cov + eps * np.eye(c), rhs)
            b[y, x] = pm - a[y, x] @ gm
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            y0, y1, x0, x1 = clipped_window(y, x, h, w, r)
            ak = a[y0:y1, x0:x1].reshape(-1, c)
            bk = b[y0:y1, x0:x1].ravel()
            out[y, x] = np.mean(ak @ guide[y, x] + bk)
    return out


def naive_census(gray, ww, wh):
    """Census bits as a (H, W, ww*wh-1) bool array, built with explicit loops."""
    gray = np.asarray(gray, dtype=np.float64)
    h, w = gray.shape
    bits = np.zeros((h, w, ww * wh - 1), dtype=bool)
    for y in range(h):
        for x in range(w):
            k = 0
            for dy in range(-(wh // 2), wh // 2 + 1):
                for dx in range(-(ww // 2), ww // 2 + 1):
                    if dy == 0 and dx == 0:
                        continue
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w:
                        bits[y, x, k] = gray[yy, xx] < gray[y, x]
                    k += 1
    return bits


def components_4(mask):
    """4-connected components by BFS; returns a list of pixel-coordinate sets."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    seen = np.zeros_like(mask)
    comps = []
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or seen[sy, sx]:
                continue
            comp = set()
            queue = deque([(sy, sx)])
            seen[sy, sx] = True
            while queue:
                y, x = queue.popleft()
                comp.add((y, x))
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            comps.append(comp)
    return comps
