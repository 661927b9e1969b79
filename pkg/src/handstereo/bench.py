"""Sequence ingestion, metrics, the per-frame pipeline, and visualization."""
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .config import MatchConfig
from .constrained import constrained_disparity
from .errors import DimensionError, HandInitError, ManifestError
from .segment import CalibratedRig, HandTracker, disparity_to_depth

log = logging.getLogger(__name__)

N_JOINTS = 21
# Palm center, then (MCP, PIP, DIP, tip) for thumb, index, middle, ring, little.
JOINT_NAMES = ["palm"] + [
    f"{finger}_{part}"
    for finger in ("thumb", "index", "middle", "ring", "little")
    for part in ("mcp", "pip", "dip", "tip")
]
DEFAULT_THRESHOLDS = tuple(range(20, 51))
BAD_PIXEL_MM = 20.0


@dataclass(frozen=True)
class FrameRecord:
    index: int
    left: Path
    right: Path
    depth: Path | None = None  # reference depth, 16-bit PNG in mm
    mask: Path | None = None  # manual hand mask, nonzero = hand
    disparity: Path | None = None  # ground-truth disparity, 16-bit PNG (d * 256)


@dataclass
class SequenceManifest:
    frames: list
    rig: CalibratedRig
    training: bool = False
    root: Path = field(default_factory=Path)


def load_sequence(manifest_path):
    """Load and validate a JSON manifest.

    Format::

        {"rig": {"focal_length": px, "baseline": mm, "cx": px, "cy": px},
         "training": false,
         "frames": [{"index": 0, "left": "l0.png", "right": "r0.png",
                     "depth": "z0.png", "mask": "m0.png", "disparity": "d0.png"}]}

    Relative paths resolve against the manifest's directory. ``depth``,
    ``mask`` and ``disparity`` are optional.
    """
    manifest_path = Path(manifest_path)
    try:
        data = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"cannot parse manifest {manifest_path}: {e}") from e
    root = manifest_path.parent
    try:
        rig = CalibratedRig(**data["rig"])
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"invalid rig in {manifest_path}: {e}") from e

    frames = []
    last = None
    for pos, rec in enumerate(data.get("frames", [])):
        if "index" not in rec or "left" not in rec or "right" not in rec:
            raise ManifestError(f"frame entry {pos} needs index, left and right")
        index = int(rec["index"])
        if last is not None and index <= last:
            raise ManifestError(f"frame index {index} is not greater than previous index {last}")
        last = index
        paths = {}
        for key in ("left", "right", "depth", "mask", "disparity"):
            if rec.get(key) is None:
                continue
            p = Path(rec[key])
            p = p if p.is_absolute() else root / p
            if not p.exists():
                raise ManifestError(f"frame {index}: {key} image {p} does not exist")
            paths[key] = p
        frames.append(FrameRecord(index=index, **paths))
    return SequenceManifest(frames, rig, bool(data.get("training", False)), root)


def load_joints_csv(path):
    """Joint CSV: one row per frame, 63 values (x, y, z for each of 21 joints, mm)."""
    rows = []
    with open(path, newline="") as f:
        for lineno, row in enumerate(csv.reader(f), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 3 * N_JOINTS:
                raise ValueError(f"{path}:{lineno}: expected {3 * N_JOINTS} values, got {len(row)}")
            rows.append([float(v) for v in row])
    joints = np.asarray(rows, dtype=np.float64).reshape(-1, N_JOINTS, 3)
    if not np.all(np.isfinite(joints)):
        raise ValueError(f"{path}: non-finite joint coordinates")
    return joints


def joint_error_curve(pred, gt, thresholds=DEFAULT_THRESHOLDS):
    """Percentage of frames whose worst joint error is below each threshold (mm)."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DimensionError(f"prediction {pred.shape} and ground truth {gt.shape} differ")
    if pred.ndim != 3 or pred.shape[1:] != (N_JOINTS, 3):
        raise DimensionError(f"expected (frames, {N_JOINTS}, 3), got {pred.shape}")
    max_err = np.linalg.norm(pred - gt, axis=2).max(axis=1)
    t = np.asarray(thresholds, dtype=np.float64)
    return 100.0 * (max_err[None, :] < t[:, None]).mean(axis=1)


def mean_joint_error_curve(preds, gt, thresholds=DEFAULT_THRESHOLDS):
    """Average curve over several prediction runs (for stochastic trackers)."""
    return np.mean([joint_error_curve(p, gt, thresholds) for p in preds], axis=0)


def mask_iou(a, b):
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionError("masks differ in shape")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def masked_disparity_error(pred, ref_depth, mask, rig, bad_mm=BAD_PIXEL_MM):
    """Depth error of a disparity map under ``mask`` against a reference depth in mm.

    Pixels whose predicted disparity is invalid count as bad and are left
    out of the mean absolute error.
    """
    mask = np.asarray(mask, dtype=bool)
    ref = np.asarray(ref_depth, dtype=np.float64)
    pred = np.asarray(pred)
    if mask.shape != ref.shape or pred.shape != ref.shape:
        raise DimensionError("prediction, reference and mask must share dimensions")
    sel = mask & (ref > 0)
    if not sel.any():
        raise ValueError("mask selects no pixel with valid reference depth")
    depth = disparity_to_depth(pred, rig).astype(np.float64)[sel]
    valid = depth > 0
    err = np.abs(depth - ref[sel])
    bad = np.count_nonzero(~valid | (err > bad_mm))
    return {
        "mae_mm": float(err[valid].mean()) if valid.any() else float("nan"),
        "bad_rate": bad / sel.sum(),
        "n_pixels": int(sel.sum()),
        "n_invalid": int((~valid).sum()),
    }


def disparity_mae(pred, gt, mask):
    """Mean absolute disparity error (levels) under ``mask``; invalid predictions count as |gt|."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool) & (gt >= 0)
    if not mask.any():
        return float("nan")
    p = np.where(pred[mask] >= 0, pred[mask], 0.0)
    return float(np.abs(p - gt[mask]).mean())


def export_visualization(disp, dmax):
    """Jet-colored RGB rendering of ``disp / dmax``; invalid (negative) pixels are black."""
    if dmax <= 0:
        raise ValueError("dmax must be > 0")
    disp = np.asarray(disp, dtype=np.float64)
    v = np.clip(disp / dmax, 0.0, 1.0)
    rgb = np.stack([np.clip(1.5 - np.abs(4.0 * v - k), 0.0, 1.0) for k in (3.0, 2.0, 1.0)], axis=-1)
    out = np.rint(rgb * 255.0).astype(np.uint8)
    out[disp < 0] = 0
    return out


def _round(x, nd=6):
    return None if x is None or not np.isfinite(x) else round(float(x), nd)


def run_pipeline(manifest, skin_model, cfg=None, out_dir=None, state=None, start=0,
                 pred_joints=None, gt_joints=None):
    """Segment every frame of ``manifest`` from ``start`` on.

    Per frame: skin map, constrained disparity, depth, hand probability,
    hand mask, hand-state update. When ``out_dir`` is given, disparity,
    class, mask, segmented-disparity PNGs and ``report.json`` are written.
    ``state`` resumes tracking from a previous run's HandState.

    Returns ``(report, final_state)``.
    """
    cfg = cfg or MatchConfig()
    tracker = HandTracker(state)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    per_frame = []
    for pos, rec in enumerate(manifest.frames):
        if pos < start:
            continue
        left, right = io.read_color(rec.left), io.read_color(rec.right)
        skin = skin_model.probability_map(left)
        disp, classes = constrained_disparity(left, right, skin, cfg)
        depth = disparity_to_depth(disp, manifest.rig)
        try:
            mask, _ = tracker.step(skin, depth)
        except HandInitError as e:
            raise HandInitError(f"frame {rec.index}: cannot initialize hand depth ({e})") from e
        seg = np.where(mask, disp, -1.0)

        entry = {
            "index": rec.index,
            "hand_lost": bool(tracker.state.hand_lost),
            "mu_d_mm": _round(tracker.state.mu_d),
            "mask_pixels": int(mask.sum()),
        }
        if tracker.state.hand_lost:
            log.warning("frame %d: hand lost", rec.index)
        if rec.mask is not None:
            gt_mask = io.read_gray(rec.mask) > 0
            entry["iou"] = _round(mask_iou(mask, gt_mask))
            if rec.disparity is not None:
                gt_disp = io.read_disparity_png(rec.disparity)
                entry["disp_mae"] = _round(disparity_mae(disp, gt_disp, gt_mask))
            if rec.depth is not None and gt_mask.any():
                ref = io.read_gray(rec.depth).astype(np.float64)
                if (ref[gt_mask] > 0).any():
                    err = masked_disparity_error(disp, ref, gt_mask, manifest.rig)
                    entry["mae_mm"] = _round(err["mae_mm"])
                    entry["bad_rate"] = _round(err["bad_rate"])
        per_frame.append(entry)

        if out is not None:
            stem = f"{rec.index:06d}"
            io.write_disparity_png(out / f"disp_{stem}.png", disp)
            io.write_class_png(out / f"class_{stem}.png", classes)
            io.write_gray(out / f"mask_{stem}.png", (mask * 255).astype(np.uint8))
            io.write_disparity_png(out / f"seg_{stem}.png", seg)

    def mean_of(key):
        vals = [e[key] for e in per_frame if e.get(key) is not None]
        return _round(np.mean(vals)) if vals else None

    curve = []
    if pred_joints is not None and gt_joints is not None:
        curve = [_round(v) for v in joint_error_curve(pred_joints, gt_joints)]
    report = {
        "per_frame": per_frame,
        "summary": {
            "iou_mean": mean_of("iou"),
            "mae_mm": mean_of("mae_mm"),
            "disp_mae": mean_of("disp_mae"),
            "hand_lost_frames": sum(e["hand_lost"] for e in per_frame),
            "curve": curve,
        },
    }
    if out is not None:
        write_report(out / "report.json", report)
    return report, tracker.state


def write_report(path, report):
    with open(path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
