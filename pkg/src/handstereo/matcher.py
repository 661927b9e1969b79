"""Local stereo: guided-filter cost aggregation, winner-take-all, left-right check."""
import numpy as np

from .cost import matching_cost
from .errors import DimensionError, ParameterError
from .imgproc import box_mean

STABLE, UNSTABLE, OCCLUDED = 0, 1, 2
INVALID = -1.0


def _guide_array(guide):
    g = np.asarray(guide)
    if g.dtype == np.uint8:
        return g.astype(np.float32) / np.float32(255.0)
    return g.astype(np.float32)


def aggregate_guided(vol, guide, radius, eps):
    """Filter every disparity slice of ``vol`` with the guided image filter.

    ``guide`` is either a single plane or an ``(H, W, 3)`` color image
    (uint8 guides are scaled to [0, 1]). For color guides the full 3x3
    covariance form is used.
    """
    if eps <= 0:
        raise ParameterError("eps must be > 0")
    vol = np.asarray(vol, dtype=np.float32)
    guide = _guide_array(guide)
    if vol.ndim != 3 or guide.shape[:2] != vol.shape[:2]:
        raise DimensionError(f"guide {guide.shape} does not match volume {vol.shape}")
    if guide.ndim == 3 and guide.shape[2] == 1:
        guide = guide[:, :, 0]
    if guide.ndim == 2:
        return _guided_gray(vol, guide, radius, eps)
    if guide.ndim == 3 and guide.shape[2] == 3:
        return _guided_color(vol, guide, radius, eps)
    raise DimensionError(f"unsupported guide shape {guide.shape}")


def _guided_gray(vol, guide, radius, eps):
    mean_i = box_mean(guide, radius)
    var_i = box_mean(guide * guide, radius) - mean_i * mean_i
    mean_p = box_mean(vol, radius)
    cov_ip = box_mean(vol * guide[:, :, None], radius) - mean_i[:, :, None] * mean_p
    a = cov_ip / (var_i + np.float32(eps))[:, :, None]
    b = mean_p - a * mean_i[:, :, None]
    return box_mean(a, radius) * guide[:, :, None] + box_mean(b, radius)


def _inverse_sym3(s, eps):
    """Inverse of per-pixel ``S + eps * I`` for symmetric 3x3 ``S`` of shape (H, W, 3, 3)."""
    m = s.astype(np.float64) + eps * np.eye(3)
    a, b, c = m[..., 0, 0], m[..., 0, 1], m[..., 0, 2]
    e, f, i = m[..., 1, 1], m[..., 1, 2], m[..., 2, 2]
    adj = np.empty_like(m)
    adj[..., 0, 0] = e * i - f * f
    adj[..., 0, 1] = adj[..., 1, 0] = c * f - b * i
    adj[..., 0, 2] = adj[..., 2, 0] = b * f - c * e
    adj[..., 1, 1] = a * i - c * c
    adj[..., 1, 2] = adj[..., 2, 1] = b * c - a * f
    adj[..., 2, 2] = a * e - b * b
    det = a * adj[..., 0, 0] + b * adj[..., 0, 1] + c * adj[..., 0, 2]
    return adj / det[..., None, None]


def _guided_color(vol, guide, radius, eps):
    height, width = vol.shape[:2]
    mean_i = box_mean(guide, radius)
    sigma = np.empty((height, width, 3, 3), dtype=np.float32)
    for r in range(3):
        for c in range(r, 3):
            v = box_mean(guide[:, :, r] * guide[:, :, c], radius) - mean_i[:, :, r] * mean_i[:, :, c]
            sigma[:, :, r, c] = sigma[:, :, c, r] = v
    inv = _inverse_sym3(sigma, eps).astype(np.float32)

    mean_p = box_mean(vol, radius)
    cov = [box_mean(vol * guide[:, :, c:c + 1], radius) - mean_i[:, :, c:c + 1] * mean_p for c in range(3)]
    out = None
    b = mean_p
    for r in range(3):
        a_r = inv[:, :, r, 0:1] * cov[0] + inv[:, :, r, 1:2] * cov[1] + inv[:, :, r, 2:3] * cov[2]
        b = b - a_r * mean_i[:, :, r:r + 1]
        term = box_mean(a_r, radius) * guide[:, :, r:r + 1]
        out = term if out is None else out + term
    return out + box_mean(b, radius)


def wta(vol):
    """Winner-take-all disparity and cost confidence.

    Returns ``(disparity, confidence)``. Ties go to the smaller disparity;
    pixels whose costs are all equal get disparity -1. Confidence is
    ``|(m1 - m2) / m2|`` with ``m2`` the best cost more than one level away
    from the winner (0 where ``m2 == 0``).
    """
    vol = np.asarray(vol)
    if vol.ndim != 3 or vol.shape[2] < 2:
        raise ParameterError("wta needs dmax >= 1")
    levels = vol.shape[2]
    best = np.argmin(vol, axis=2)
    m1 = np.take_along_axis(vol, best[:, :, None], axis=2)[:, :, 0]
    flat = vol.max(axis=2) == m1

    gap = 1 if levels > 2 else 0
    far = np.abs(np.arange(levels)[None, None, :] - best[:, :, None]) > gap
    m2 = np.where(far, vol, np.inf).min(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        conf = np.abs((m1 - m2) / m2)
    conf = np.where(m2 > 0, conf, 0.0).astype(np.float32)

    disp = best.astype(np.float32)
    disp[flat] = INVALID
    return disp, conf


def left_right_occlusions(disp_left, disp_right, tol=1.0):
    """Occlusion mask from the left-right consistency check.

    A left pixel is occluded when its match ``x - dL`` leaves the image, when
    either disparity is invalid, or when ``|dL(x) - dR(x - dL(x))| > tol``.
    """
    dl = np.asarray(disp_left, dtype=np.float32)
    dr = np.asarray(disp_right, dtype=np.float32)
    if dl.shape != dr.shape:
        raise DimensionError("disparity maps differ in shape")
    height, width = dl.shape
    xs = np.arange(width)[None, :] - np.rint(dl).astype(np.int64)
    inside = (dl >= 0) & (xs >= 0) & (xs < width)
    matched = np.take_along_axis(dr, np.clip(xs, 0, width - 1), axis=1)
    consistent = inside & (matched >= 0) & (np.abs(dl - matched) <= tol)
    return ~consistent


def classify_pixels(conf, occ, tau=0.04):
    """Label map: OCCLUDED where ``occ``, else UNSTABLE where ``conf < tau``, else STABLE."""
    conf = np.asarray(conf)
    occ = np.asarray(occ, dtype=bool)
    if conf.shape != occ.shape:
        raise DimensionError("confidence and occlusion maps differ in shape")
    classes = np.full(conf.shape, STABLE, dtype=np.uint8)
    classes[conf < tau] = UNSTABLE
    classes[occ] = OCCLUDED
    return classes


def _flip(a):
    return np.ascontiguousarray(a[:, ::-1])


def _cost_kwargs(cfg):
    return dict(kind=cfg.cost, census_window=cfg.census_window, ad_truncation=cfg.ad_truncation,
                grad_truncation=cfg.grad_truncation, blend_weight=cfg.blend_weight)


def cost_volumes(left, right, cfg):
    """Raw left-view and right-view cost volumes.

    The right view is matched by mirroring both images and swapping their
    roles, so ``right_vol[y, x, d]`` compares right pixel ``x`` with left
    pixel ``x + d``.
    """
    kw = _cost_kwargs(cfg)
    vol_l = matching_cost(left, right, cfg.dmax, **kw)
    vol_r = _flip(matching_cost(_flip(right), _flip(left), cfg.dmax, **kw))
    return vol_l, vol_r


def right_view_disparity(vol_r, right, cfg):
    return wta(aggregate_guided(vol_r, right, cfg.radius, cfg.eps))


def plain_from_costs(vol_l, left, cfg):
    """Color-guided aggregation followed by WTA. Returns ``(disparity, confidence)``."""
    return wta(aggregate_guided(vol_l, left, cfg.radius, cfg.eps))


def plain_disparity(left, right, cfg):
    """The unconstrained local matcher: cost, color-guided aggregation, WTA."""
    vol_l = matching_cost(left, right, cfg.dmax, **_cost_kwargs(cfg))
    return plain_from_costs(vol_l, left, cfg)[0]
