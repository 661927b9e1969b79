"""Command-line entry point: ``handstereo <subcommand> ...``."""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .bench import (DEFAULT_THRESHOLDS, export_visualization, joint_error_curve, load_joints_csv,
                    load_sequence, mask_iou, mean_joint_error_curve, run_pipeline, write_report)
from .config import load_config
from .constrained import constrained_disparity
from .errors import HandInitError
from .segment import CalibratedRig, HandState, disparity_to_depth, extract_hand_mask, hand_probability_map, init_state
from .skin import SkinModel, train_skin_model

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".ppm"}


def _add_config_args(p):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--dmax", type=int)
    p.add_argument("--cost", choices=["census", "ad", "ad_gradient", "ad_census"])
    p.add_argument("--radius", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--tau-conf", type=float, dest="tau_conf")
    p.add_argument("--lr-tol", type=float, dest="lr_tol")


def _config(args):
    return load_config(args.config, dmax=args.dmax, cost=args.cost, radius=args.radius, eps=args.eps,
                       alpha=args.alpha, beta=args.beta, tau_conf=args.tau_conf, lr_tol=args.lr_tol)


def cmd_train_skin(args):
    paths = sorted(p for p in Path(args.frames).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise SystemExit(f"no images found in {args.frames}")
    model = train_skin_model((io.read_color(p) for p in paths), burn_in=args.burn_in,
                             bins_per_channel=args.bins)
    model.save(args.out)
    print(f"trained on {max(len(paths) - args.burn_in, 0)} frames -> {args.out}")


def cmd_match(args):
    cfg = _config(args)
    left, right = io.read_color(args.left), io.read_color(args.right)
    skin = SkinModel.load(args.skin).probability_map(left)
    disp, classes = constrained_disparity(left, right, skin, cfg)
    io.write_disparity_png(args.out_disp, disp)
    if args.out_class:
        io.write_class_png(args.out_class, classes)
    if args.out_pfm:
        io.write_pfm(args.out_pfm, disp)


def cmd_segment(args):
    cfg = _config(args)
    rig = CalibratedRig(args.focal, args.baseline)
    left, right = io.read_color(args.left), io.read_color(args.right)
    skin = SkinModel.load(args.skin).probability_map(left)
    disp, _ = constrained_disparity(left, right, skin, cfg)
    depth = disparity_to_depth(disp, rig)
    state = HandState(mu_d=args.mu_d, initialized=True) if args.mu_d else init_state(skin, depth)
    mask = extract_hand_mask(hand_probability_map(skin, depth, state), state.threshold)
    if not mask.any():
        print("hand lost: no pixel above threshold", file=sys.stderr)
    io.write_gray(args.out_mask, (mask * 255).astype(np.uint8))
    if args.out_seg:
        io.write_disparity_png(args.out_seg, np.where(mask, disp, -1.0))
    print(json.dumps({"mu_d_mm": state.mu_d, "mask_pixels": int(mask.sum())}))


def cmd_run(args):
    cfg = _config(args)
    manifest = load_sequence(args.manifest)
    skin = SkinModel.load(args.skin)
    pred = gt = None
    if args.pred_joints and args.gt_joints:
        pred, gt = load_joints_csv(args.pred_joints), load_joints_csv(args.gt_joints)
    try:
        report, _ = run_pipeline(manifest, skin, cfg, out_dir=args.out, pred_joints=pred, gt_joints=gt)
    except HandInitError as e:
        raise SystemExit(f"aborting: {e}")
    print(json.dumps(report["summary"], sort_keys=True))


def cmd_eval(args):
    result = {}
    if args.gt_joints:
        gt = load_joints_csv(args.gt_joints)
        preds = [load_joints_csv(p) for p in args.pred_joints]
        thresholds = args.thresholds or list(DEFAULT_THRESHOLDS)
        curve = (joint_error_curve(preds[0], gt, thresholds) if len(preds) == 1
                 else mean_joint_error_curve(preds, gt, thresholds))
        result["thresholds_mm"] = [float(t) for t in thresholds]
        result["curve"] = [float(v) for v in curve]
    if args.pred_mask and args.gt_mask:
        result["iou"] = mask_iou(io.read_gray(args.pred_mask) > 0, io.read_gray(args.gt_mask) > 0)
    if not result:
        raise SystemExit("nothing to evaluate: give --gt-joints/--pred-joints or --pred-mask/--gt-mask")
    if args.out:
        write_report(args.out, result)
    print(json.dumps(result))


def cmd_viz(args):
    path = Path(args.disp)
    disp = io.read_pfm(path) if path.suffix.lower() == ".pfm" else io.read_disparity_png(path)
    io.write_color(args.out, export_visualization(disp, args.dmax))


def build_parser():
    parser = argparse.ArgumentParser(prog="handstereo", description="Passive-stereo hand segmentation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-skin", help="train a per-scene skin color model")
    p.add_argument("--frames", required=True, help="directory of training frames (sorted by name)")
    p.add_argument("--out", required=True)
    p.add_argument("--burn-in", type=int, default=0, dest="burn_in")
    p.add_argument("--bins", type=int, default=32)
    p.set_defaults(func=cmd_train_skin)

    p = sub.add_parser("match", help="constrained stereo matching of one pair")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--skin", required=True, help="skin model JSON")
    p.add_argument("--out-disp", required=True, dest="out_disp")
    p.add_argument("--out-class", dest="out_class")
    p.add_argument("--out-pfm", dest="out_pfm")
    _add_config_args(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("segment", help="segment the hand in one pair")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--skin", required=True)
    p.add_argument("--focal", type=float, required=True, help="focal length, pixels")
    p.add_argument("--baseline", type=float, required=True, help="baseline, mm")
    p.add_argument("--mu-d", type=float, dest="mu_d", help="hand depth prior in mm (default: estimate)")
    p.add_argument("--out-mask", required=True, dest="out_mask")
    p.add_argument("--out-seg", dest="out_seg")
    _add_config_args(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("run", help="segment a whole sequence and write a metrics report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--skin", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--pred-joints", dest="pred_joints")
    p.add_argument("--gt-joints", dest="gt_joints")
    _add_config_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="joint-error curve and mask IoU")
    p.add_argument("--pred-joints", nargs="+", default=[], dest="pred_joints")
    p.add_argument("--gt-joints", dest="gt_joints")
    p.add_argument("--thresholds", nargs="+", type=float)
    p.add_argument("--pred-mask", dest="pred_mask")
    p.add_argument("--gt-mask", dest="gt_mask")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("viz", help="color-map a disparity map")
    p.add_argument("--disp", required=True, help="16-bit disparity PNG or PFM")
    p.add_argument("--dmax", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_viz)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "eval" and args.gt_joints and not args.pred_joints:
        raise SystemExit("--gt-joints needs at least one --pred-joints file")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
