"""Training loop: BCE + Adam over corpus splits, history and best checkpoint.

The protocol is deliberately plain: shuffle the train split each epoch with a
seeded generator, take fixed-size batches, and after every epoch measure loss
and pixel accuracy on both splits.  The checkpoint written to ``best.pt`` is
the epoch with the lowest validation loss, not the last one.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import torch
from torch import nn

from . import corpus
from .model import InvNet, save_checkpoint

__all__ = ["TrainConfig", "train"]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.99
    batch_size: int = 20
    epochs: int = 30
    seed: int = 0
    threshold: float = 0.5
    # Optional memorization stop: end training once the epoch's training
    # loss falls below this value.  None runs all epochs.
    stop_below_train_loss: Optional[float] = None

    def validate(self) -> "TrainConfig":
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 < self.threshold < 1:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")
        return self


def _to_tensors(gathers: np.ndarray, masks: np.ndarray):
    # Stored layout is (time, receiver); convs want channels first.
    x = torch.from_numpy(gathers).permute(0, 2, 1).contiguous()
    y = torch.from_numpy(masks).float()
    return x, y


def _check_shapes(model: InvNet, manifest: dict) -> None:
    rec = manifest["record"]
    spec = model.spec
    want_in = [spec.input_length, spec.n_receivers]
    want_out = [spec.output_side, spec.output_side]
    if list(rec["input_shape"]) != want_in:
        raise corpus.CorpusError(
            f"corpus gathers are {rec['input_shape']}, model expects {want_in}")
    if list(rec["target_shape"]) != want_out:
        raise corpus.CorpusError(
            f"corpus masks are {rec['target_shape']}, model expects {want_out}")


@torch.no_grad()
def _evaluate(model, x, y, loss_fn, batch_size, threshold):
    """Mean loss and pixel accuracy over a whole split, in eval mode."""
    was_training = model.training
    model.eval()
    total_loss = 0.0
    correct = 0
    for start in range(0, len(x), batch_size):
        xb, yb = x[start:start + batch_size], y[start:start + batch_size]
        out = model(xb)
        total_loss += loss_fn(out, yb).item() * len(xb)
        correct += ((out >= threshold).float() == yb).sum().item()
    if was_training:
        model.train()
    return total_loss / len(x), correct / y.numel()


def train(model: InvNet, corpus_dir, config: TrainConfig = TrainConfig(),
          out_dir=None, progress: bool = False) -> dict:
    """Train model on the corpus train split, validating on val.

    Returns the history dict; when out_dir is given, also writes
    ``best.pt`` (lowest validation loss) and ``history.json`` there.
    """
    config.validate()
    manifest = corpus.load_manifest(corpus_dir)
    _check_shapes(model, manifest)
    gathers, masks, _ = corpus.load_split(corpus_dir, "train", manifest)
    if len(gathers) == 0:
        raise corpus.CorpusError("corpus train split is empty")
    x_train, y_train = _to_tensors(gathers, masks)
    gathers, masks, _ = corpus.load_split(corpus_dir, "val", manifest)
    x_val, y_val = _to_tensors(gathers, masks)
    has_val = len(x_val) > 0

    gen = torch.Generator().manual_seed(config.seed)
    loss_fn = nn.BCELoss()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate,
                                 betas=(config.beta1, config.beta2))

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    epoch_iter = range(1, config.epochs + 1)
    if progress:
        from tqdm import tqdm
        epoch_iter = tqdm(epoch_iter, desc="epochs", disable=None)

    epochs = []
    best_val = float("inf")
    best_epoch = 0
    stopped_early = False
    for epoch in epoch_iter:
        model.train()
        perm = torch.randperm(len(x_train), generator=gen)
        running = 0.0
        for start in range(0, len(perm), config.batch_size):
            take = perm[start:start + config.batch_size]
            out = model(x_train[take])
            loss = loss_fn(out, y_train[take])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            running += loss.item() * len(take)

        train_loss, train_acc = _evaluate(
            model, x_train, y_train, loss_fn, config.batch_size, config.threshold)
        if has_val:
            val_loss, val_acc = _evaluate(
                model, x_val, y_val, loss_fn, config.batch_size, config.threshold)
        else:
            val_loss = val_acc = None
        epochs.append({
            "epoch": epoch,
            "batch_loss": running / len(perm),
            "train_loss": train_loss,
            "train_accuracy": train_acc,
            "val_loss": val_loss,
            "val_accuracy": val_acc,
        })

        # Without a val split, fall back to train loss for checkpointing.
        score = val_loss if has_val else train_loss
        if score < best_val:
            best_val = score
            best_epoch = epoch
            if out_dir is not None:
                save_checkpoint(model, out_dir / "best.pt",
                                {"epoch": epoch, "val_loss": val_loss,
                                 "train_loss": train_loss})
        if (config.stop_below_train_loss is not None
                and train_loss < config.stop_below_train_loss):
            stopped_early = True
            break

    history = {
        "config": asdict(config),
        "n_train": len(x_train),
        "n_val": len(x_val),
        "epochs": epochs,
        "best_epoch": best_epoch,
        "best_val_loss": None if not has_val else best_val,
        "stopped_early": stopped_early,
    }
    if out_dir is not None:
        with open(out_dir / "history.json", "w", encoding="utf-8") as f:
            json.dump(history, f, indent=2, sort_keys=True)
            f.write("\n")
    return history
