"""Inference helpers: single-gather prediction and split export.

Exported predictions are raw little-endian float32 planes named
``{index:06d}.f32``, which is the layout the evaluation tooling reads back.
"""

from pathlib import Path

import numpy as np
import torch

from . import corpus
from .model import InvNet

__all__ = ["predict", "export_predictions"]


def predict(model: InvNet, gather: np.ndarray) -> np.ndarray:
    """Map one (input_length, n_receivers) gather to a float32 mask in [0, 1].

    Runs in eval mode with gradients off, so repeated calls on the same
    input return identical arrays.
    """
    spec = model.spec
    gather = np.asarray(gather)
    if gather.shape != (spec.input_length, spec.n_receivers):
        raise ValueError(
            f"expected gather of shape ({spec.input_length}, {spec.n_receivers}), "
            f"got {gather.shape}")
    x = torch.from_numpy(np.ascontiguousarray(gather.T, dtype=np.float32))
    was_training = model.training
    model.eval()
    with torch.no_grad():
        out = model(x.unsqueeze(0))[0]
    if was_training:
        model.train()
    return out.numpy().astype(np.float32)


def export_predictions(model: InvNet, corpus_dir, split: str, out_dir) -> list:
    """Predict every sample of a corpus split; returns the written paths."""
    manifest = corpus.load_manifest(corpus_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for index in corpus.split_indices(manifest, split):
        gather, _ = corpus.read_sample(corpus_dir, manifest, index)
        mask = predict(model, gather)
        path = out_dir / f"{index:06d}.f32"
        mask.astype("<f4").tofile(path)
        paths.append(path)
    return paths
