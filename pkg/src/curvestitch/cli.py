"""Command-line interface.

Subcommands:
    detect    single-frame detection over a PGM/PPM image
    track     ordered sequence processing over a directory or glob
    classify  per-cluster curve classification only
    synth     render a synthetic scene spec to an image + ground truth
    calibrate emit a bird's-eye calibration config block from 4 point pairs

Common flags: --config FILE, --seed N, --set key=value (repeatable),
--json PATH (detection records, one JSON object per line), --overlay PATH.
"""

import argparse
import glob
import json
import os
import sys

import numpy as np

from . import imaging, pipeline, synth
from .birdseye import estimate_homography, project
from .config import PipelineConfig, apply_overrides, dump_config, load_config
from .errors import CurveStitchError


def _build_config(args):
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.config:
        return load_config(args.config, overrides)
    return apply_overrides(PipelineConfig(), overrides)


def _write_records(path, results, include_timing=True):
    text = "".join(r.to_json(include_timing) + "\n" for r in results)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as f:
            f.write(text)


def _cmd_detect(args):
    cfg = _build_config(args)
    img = imaging.read_pnm(args.image)
    result, _ = pipeline.detect_frame(img, cfg)
    _write_records(args.json or "-", [result], not args.no_timing)
    if args.overlay:
        overlay = pipeline.render_overlay(img, result, cfg.bands)
        imaging.write_pnm(args.overlay, overlay)
    return 0


def _frame_paths(pattern):
    if os.path.isdir(pattern):
        names = [os.path.join(pattern, n) for n in sorted(os.listdir(pattern))
                 if n.lower().endswith((".pgm", ".ppm"))]
    else:
        names = sorted(glob.glob(pattern))
    if not names:
        raise CurveStitchError(f"no frames match {pattern!r}")
    return names


def _cmd_track(args):
    cfg = _build_config(args)
    paths = _frame_paths(args.frames)
    frames = [imaging.read_pnm(p) for p in paths]
    results = pipeline.run_sequence(frames, cfg)
    _write_records(args.json or "-", results, not args.no_timing)
    if args.overlay:
        os.makedirs(args.overlay, exist_ok=True)
        for path, img, result in zip(paths, frames, results):
            overlay = pipeline.render_overlay(img, result, cfg.bands)
            name = os.path.splitext(os.path.basename(path))[0]
            imaging.write_pnm(os.path.join(args.overlay, f"{name}_overlay.ppm"), overlay)
    return 0


def _cmd_classify(args):
    cfg = _build_config(args)
    img = imaging.read_pnm(args.image)
    result, _ = pipeline.detect_frame(img, cfg)
    records = [{"curve_class": lane.curve_class,
                "signature_score": round(float(lane.signature_score), 4),
                "vote": int(lane.vote),
                "mass": round(float(lane.mass), 3)} for lane in result.lanes]
    text = "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)
    if args.json and args.json != "-":
        with open(args.json, "w", encoding="ascii") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _truth_record(truth, step=2.0):
    curves = []
    for c in truth.curves:
        keep = max(int(step / max(c.arc_length / max(len(c.points) - 1, 1), 1e-9)), 1)
        idx = np.arange(0, len(c.points), keep)
        curves.append({
            "kind": c.kind,
            "arc_length": round(float(c.arc_length), 2),
            "points": [[round(float(x), 2), round(float(y), 2)]
                       for x, y in c.points[idx]],
            "angles": [round(float(a), 3) for a in c.angles[idx]],
            "in_gap": [bool(g) for g in c.in_gap[idx]],
        })
    return {"size": [int(truth.size[0]), int(truth.size[1])], "curves": curves}


def _cmd_synth(args):
    spec = synth.load_scene(args.spec)
    if args.seed is not None:
        from dataclasses import replace
        spec = replace(spec, seed=args.seed)
    img, truth = synth.render(spec)
    imaging.write_pnm(args.image, img)
    if args.truth:
        with open(args.truth, "w", encoding="ascii") as f:
            json.dump(_truth_record(truth), f, separators=(",", ":"))
            f.write("\n")
    return 0


def _parse_points(values):
    pts = []
    for v in values:
        x, y = v.split(",")
        pts.append((float(x), float(y)))
    return pts


def _cmd_calibrate(args):
    src = _parse_points(args.src)
    dst = _parse_points(args.dst)
    h = estimate_homography(src, dst)
    errs = [float(np.hypot(*(project(h, s) - np.asarray(d)))) for s, d in zip(src, dst)]
    block = (
        f"birdseye.src_quad = {','.join(f'{v:g}' for p in src for v in p)}\n"
        f"birdseye.dst_quad = {','.join(f'{v:g}' for p in dst for v in p)}\n"
        f"birdseye.pixels_per_cm = {args.pixels_per_cm:g}\n"
    )
    if args.out:
        with open(args.out, "w", encoding="ascii") as f:
            f.write(block)
    else:
        sys.stdout.write(block)
    print(f"# max reprojection error: {max(errs):.3g} px", file=sys.stderr)
    return 0


def _cmd_config(args):
    cfg = _build_config(args)
    sys.stdout.write(dump_config(cfg))
    return 0


def _add_common(p, with_seed=True):
    p.add_argument("--config", help="config file (flat key = value dialect)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    if with_seed:
        p.add_argument("--seed", type=int, help="random seed override")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="curvestitch",
        description="Curve and lane detection from stitched Hough segments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect lanes in one image")
    p.add_argument("image")
    _add_common(p)
    p.add_argument("--json", help="write the result record here ('-' = stdout)")
    p.add_argument("--overlay", help="write an overlay PPM here")
    p.add_argument("--no-timing", action="store_true",
                   help="omit timing from records (for byte-exact diffs)")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("track", help="process an ordered frame sequence")
    p.add_argument("frames", help="directory or glob of PGM/PPM frames")
    _add_common(p)
    p.add_argument("--json", help="write records here, one line per frame")
    p.add_argument("--overlay", help="directory for per-frame overlay PPMs")
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("classify", help="classify detected curves only")
    p.add_argument("image")
    _add_common(p)
    p.add_argument("--json", help="write classification records here")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("synth", help="render a synthetic scene spec")
    p.add_argument("spec", help="scene spec file (flat key = value dialect)")
    p.add_argument("--image", required=True, help="output PGM path")
    p.add_argument("--truth", help="output ground-truth JSON path")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("calibrate", help="write a bird's-eye calibration block")
    p.add_argument("--src", nargs=4, required=True, metavar="X,Y",
                   help="4 source points")
    p.add_argument("--dst", nargs=4, required=True, metavar="X,Y",
                   help="4 destination points")
    p.add_argument("--pixels-per-cm", type=float, default=10.0)
    p.add_argument("--out", help="write the block here instead of stdout")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("config", help="print the effective configuration")
    _add_common(p)
    p.set_defaults(func=_cmd_config)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CurveStitchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
