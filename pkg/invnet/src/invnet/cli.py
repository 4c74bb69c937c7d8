"""Command-line entry point: train, predict, info.

Corpora come from the simulator's dataset tooling; this tool only reads
them.  Exit codes: 0 success, 1 runtime failure, 2 usage or configuration
error.
"""

import argparse
import json
import sys

from .corpus import CorpusError
from .model import (
    SpecError,
    VARIANTS,
    build_model,
    count_parameters,
    load_checkpoint,
)
from .predict import export_predictions
from .train import TrainConfig, train

__all__ = ["main"]


def cmd_train(args) -> int:
    config = TrainConfig(learning_rate=args.lr, batch_size=args.batch_size,
                         epochs=args.epochs, seed=args.seed)
    import torch

    torch.manual_seed(args.seed)
    model = build_model(args.variant)
    history = train(model, args.corpus, config, out_dir=args.out, progress=True)
    last = history["epochs"][-1]
    print(f"trained {args.variant} for {last['epoch']} epochs "
          f"({count_parameters(model)} parameters)")
    print(f"best epoch {history['best_epoch']}, "
          f"val loss {history['best_val_loss']}")
    print(f"wrote {args.out}/best.pt and {args.out}/history.json")
    return 0


def cmd_predict(args) -> int:
    model, _ = load_checkpoint(args.model)
    paths = export_predictions(model, args.corpus, args.split, args.out)
    print(f"wrote {len(paths)} masks to {args.out}")
    return 0


def cmd_info(args) -> int:
    rows = []
    for name in sorted(VARIANTS):
        model = build_model(name)
        spec = model.spec
        rows.append({
            "variant": name,
            "parameters": count_parameters(model),
            "input_shape": [spec.input_length, spec.n_receivers],
            "bottleneck": [spec.bottleneck_side, spec.bottleneck_side],
            "output_shape": [spec.output_side, spec.output_side],
        })
    print(json.dumps(rows, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invnet",
        description="train and run the gather-to-mask inversion network")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a variant on a corpus")
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--out", required=True, help="output directory for checkpoints")
    p.add_argument("--variant", default="invnet", choices=sorted(VARIANTS))
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    p.add_argument("--lr", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="export masks for one corpus split")
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--model", required=True, help="checkpoint file (best.pt)")
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.add_argument("--out", required=True, help="directory for {index:06d}.f32 masks")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("info", help="print per-variant shapes and parameter counts")
    p.set_defaults(func=cmd_info)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, SpecError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure: I/O, bad checkpoint, bad data
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
