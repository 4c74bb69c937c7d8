"""Reader for sonarsim-corpus-1 directories.

The corpus format is a stable on-disk contract: ``manifest.json`` describes
the record layout and per-sample shard/offset locations, and the shard files
hold fixed-size records of a little-endian float32 gather followed by a uint8
mask.  This module parses those files directly so training does not depend on
the simulator package being importable.
"""

import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = "sonarsim-corpus-1"
SPLIT_NAMES = ("train", "val", "test")

__all__ = [
    "CorpusError",
    "FORMAT_VERSION",
    "SPLIT_NAMES",
    "load_manifest",
    "read_sample",
    "split_indices",
    "load_split",
]


class CorpusError(ValueError):
    """A corpus directory is missing, incomplete, or malformed."""


def load_manifest(corpus_dir) -> dict:
    path = Path(corpus_dir) / "manifest.json"
    if not path.is_file():
        raise CorpusError(f"{path} not found; not a complete corpus")
    with open(path, encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("format") != FORMAT_VERSION:
        raise CorpusError(f"unsupported corpus format {manifest.get('format')!r}")
    for key in ("record", "samples", "splits", "n_samples"):
        if key not in manifest:
            raise CorpusError(f"manifest is missing the {key!r} field")
    return manifest


def _shard_path(corpus_dir, shard: int) -> Path:
    return Path(corpus_dir) / f"shard-{shard:06d}.bin"


def read_sample(corpus_dir, manifest: dict, index: int):
    """Return (gather, mask) for one record.

    gather is float32 of shape record.input_shape, mask is uint8 of shape
    record.target_shape.  Both are fresh writable arrays.
    """
    n = manifest["n_samples"]
    if not 0 <= index < n:
        raise IndexError(f"sample index {index} out of range [0, {n})")
    entry = manifest["samples"][index]
    rec = manifest["record"]
    path = _shard_path(corpus_dir, entry["shard"])
    with open(path, "rb") as f:
        f.seek(entry["offset"])
        blob = f.read(rec["record_size"])
    if len(blob) != rec["record_size"]:
        raise CorpusError(f"short read in {path} at offset {entry['offset']}")
    w, r = rec["input_shape"]
    rows, cols = rec["target_shape"]
    gather = np.frombuffer(blob, dtype="<f4", count=w * r,
                           offset=rec["input_offset"]).reshape(w, r).copy()
    mask = np.frombuffer(blob, dtype=np.uint8, count=rows * cols,
                         offset=rec["target_offset"]).reshape(rows, cols).copy()
    return gather, mask


def split_indices(manifest: dict, split: str) -> list:
    if split not in SPLIT_NAMES:
        raise CorpusError(f"split must be one of {SPLIT_NAMES}, got {split!r}")
    return list(manifest["splits"][split])


def load_split(corpus_dir, split: str, manifest=None):
    """Stack one split into memory: (gathers, masks, indices)."""
    manifest = manifest if manifest is not None else load_manifest(corpus_dir)
    idx = split_indices(manifest, split)
    rec = manifest["record"]
    gathers = np.zeros((len(idx), *rec["input_shape"]), dtype=np.float32)
    masks = np.zeros((len(idx), *rec["target_shape"]), dtype=np.uint8)
    for row, j in enumerate(idx):
        gathers[row], masks[row] = read_sample(corpus_dir, manifest, j)
    return gathers, masks, idx
