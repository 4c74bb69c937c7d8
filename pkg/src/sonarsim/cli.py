"""Command-line entry point: simulate, gen-dataset, evaluate, render.

Physics parameters come from an optional JSON config file (see
sonarsim.config for the schema and defaults); flags carry only run-scoped
values. Exit codes: 0 success, 1 runtime failure, 2 usage or
configuration error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig
from .dataset import build_corpus, load_manifest, read_sample, split_indices
from .imaging import (
    read_raw_field,
    render_side_by_side,
    save_field,
    write_pgm,
    write_ppm,
)
from .metrics import aggregate, binarize, confusion, report_to_dict, score
from .scenegen import generate_scene, rasterize, scene_from_json, scene_to_record
from .wavesim import ConfigError, simulate, snapshot

__all__ = ["main"]


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        return RunConfig.load(args.config)
    return RunConfig.default()


def cmd_simulate(args) -> int:
    cfg = _load_config(args).validate()
    if args.scene_file:
        scene = scene_from_json(Path(args.scene_file).read_text())
    else:
        scene = generate_scene(args.seed, cfg.scene)
    model, _mask = rasterize(scene, cfg.scene)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    on_step = None
    if args.snapshot_every:
        every = args.snapshot_every
        ext = "pgm" if args.snapshot_format == "pgm" else "f32"

        def on_step(t, state):
            if t % every == 0:
                save_field(out / f"snap-{t:06d}.{ext}", snapshot(state))

    gather = simulate(model, cfg.grid, cfg.source, cfg.receivers, on_step=on_step)
    (out / "gather.f32").write_bytes(np.ascontiguousarray(gather, dtype="<f4").tobytes())
    meta = {
        "dtype": "<f4",
        "shape": list(gather.shape),
        "record_start": cfg.receivers.record_start,
        "n_steps": cfg.grid.n_steps,
        "seed": None if args.scene_file else args.seed,
        "scene": scene_to_record(scene),
    }
    (out / "gather.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    n_snaps = (cfg.grid.n_steps // args.snapshot_every) if args.snapshot_every else 0
    print(f"wrote {out / 'gather.f32'} ({gather.shape[0]}x{gather.shape[1]})"
          + (f" and {n_snaps} snapshots" if n_snaps else ""))
    return 0


def cmd_gen_dataset(args) -> int:
    from tqdm import tqdm

    cfg = _load_config(args)
    with tqdm(total=args.n, unit="sample", disable=None) as bar:
        manifest = build_corpus(args.n, args.base_seed, args.out,
                                workers=args.workers, config=cfg,
                                progress=bar.update)
    sizes = manifest["split_sizes"]
    print(f"corpus of {manifest['n_samples']} samples at {args.out} "
          f"(train/val/test = {sizes['train']}/{sizes['val']}/{sizes['test']})")
    return 0


def cmd_evaluate(args) -> int:
    manifest = load_manifest(args.corpus)
    indices = split_indices(manifest, args.split)
    pred_dir = Path(args.pred_dir)
    shape = tuple(manifest["record"]["target_shape"])

    missing = [j for j in indices if not (pred_dir / f"{j:06d}.f32").is_file()]
    if missing:
        shown = ", ".join(f"{j:06d}.f32" for j in missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise ValueError(
            f"{len(missing)} of {len(indices)} predictions missing from "
            f"{pred_dir}: {shown}{more}")
    if not indices:
        raise ValueError(f"split {args.split!r} is empty")

    reports = []
    for j in indices:
        probs = read_raw_field(pred_dir / f"{j:06d}.f32", shape)
        pred = binarize(probs, args.threshold)
        target = read_sample(args.corpus, manifest, j).target
        reports.append(score(confusion(pred, target), iou_mode=args.mode))
    agg = aggregate(reports)

    out = Path(args.out) if args.out else pred_dir / "report.json"
    report = report_to_dict(agg)
    report["split"] = args.split
    report["threshold"] = args.threshold
    out.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")

    def fmt(v):
        return "undefined" if v is None else f"{v:.6f}"

    print(f"samples      {agg.n_samples}")
    print(f"accuracy     {fmt(agg.accuracy)}")
    print(f"precision    {fmt(agg.precision)}")
    print(f"sensitivity  {fmt(agg.sensitivity)}")
    print(f"specificity  {fmt(agg.specificity)}")
    print(f"iou ({agg.iou_mode})  {fmt(agg.iou)}")
    print(f"report written to {out}")
    return 0


def cmd_render(args) -> int:
    shape = tuple(args.shape)
    target = read_raw_field(args.target, shape)
    pred = read_raw_field(args.pred, shape)
    image = render_side_by_side(target, pred, gutter=args.gutter)
    ext = Path(args.out).suffix.lower()
    if ext == ".pgm":
        write_pgm(args.out, image)
    elif ext == ".ppm":
        write_ppm(args.out, image)
    else:
        raise ConfigError(f"output extension must be .pgm or .ppm, got {ext!r}")
    print(f"wrote {args.out} ({image.shape[1]}x{image.shape[0]})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sonarsim",
        description="2D acoustic pulse-echo simulation and synthetic corpus tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one forward simulation")
    p.add_argument("--config", help="JSON config file (defaults used if omitted)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--seed", type=int, help="scene seed")
    g.add_argument("--scene-file", help="JSON scene record to rasterize instead")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--snapshot-every", type=int, default=0, metavar="N",
                   help="write a wavefield snapshot every N timesteps")
    p.add_argument("--snapshot-format", choices=("pgm", "f32"), default="pgm")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-dataset", help="build a sample corpus")
    p.add_argument("--config", help="JSON config file (defaults used if omitted)")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="corpus directory")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("evaluate", help="score prediction files against a corpus")
    p.add_argument("--pred-dir", required=True,
                   help="directory of {index:06d}.f32 probability maps")
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--split", choices=("train", "val", "test"), default="test")
    p.add_argument("--mode", choices=("foreground", "agreement"), default="foreground",
                   help="IoU definition")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", help="report path (default: <pred-dir>/report.json)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="side-by-side target/prediction image")
    p.add_argument("target", help="raw float32 field (.f32/.raw), shown left")
    p.add_argument("pred", help="raw float32 field (.f32/.raw), shown right")
    p.add_argument("--out", required=True, help="output image (.pgm or .ppm)")
    p.add_argument("--shape", type=int, nargs=2, default=(256, 256),
                   metavar=("ROWS", "COLS"))
    p.add_argument("--gutter", type=int, default=8)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure: instability, I/O, bad data
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
