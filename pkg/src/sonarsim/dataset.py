"""Corpus assembly: scene -> simulation -> rescaled sample -> sharded files.

A corpus directory holds:

    manifest.json          written last; its presence marks completion
    scenes.jsonl           one scene record per line, in sample order
    shard-000000.bin       fixed-size records, concatenated in sample order
    shard-000000.meta.json seeds, scale factors, sha256 of the shard bytes

One record is the sample's input gather as little-endian float32, row
major, immediately followed by the target mask as uint8 bytes. Shapes,
offsets, and the record size are spelled out in the manifest under
"record", so the files are parseable from any language without this
package.

Everything written is deterministic for a given (n, base_seed, config):
no timestamps, sorted JSON keys, samples ordered by index regardless of
worker count. Rebuilding into a directory that already holds valid shards
skips them (resume); a directory holding a complete matching corpus is
left untouched.

Split assignment hashes each sample's nominal seed (SplitMix64 finalizer,
salted), ranks samples by hash, and cuts the ranking at exact
largest-remainder sizes for 70/15/15, so splits are reproducible under
partial regeneration and sizes are exact for any n.
"""

import hashlib
import json
import math
from dataclasses import dataclass
from functools import partial
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import kernels
from .config import RunConfig
from .rng import MASK64, mix64
from .scenegen import generate_scene, rasterize, scene_to_record
from .wavesim import ConfigError, NumericalInstabilityError, simulate

__all__ = [
    "FORMAT_VERSION",
    "SPLIT_NAMES",
    "SamplePair",
    "rescale_gather",
    "build_sample",
    "build_corpus",
    "split_sizes",
    "assign_splits",
    "load_manifest",
    "read_sample",
    "split_indices",
    "load_split",
]

FORMAT_VERSION = "sonarsim-corpus-1"
SPLIT_NAMES = ("train", "val", "test")
SPLIT_PERCENTS = (70, 15, 15)

# Replacement rule for the (CFL-guarded, so normally impossible) case of a
# diverging simulation: bump the seed far outside the corpus seed range.
RESEED_STEP = 1 << 32
MAX_BUILD_ATTEMPTS = 8

# Salt decorrelating split hashes from the scene-generation stream.
_SPLIT_SALT = 0xA0761D6478BD642F

_MANIFEST = "manifest.json"
_SCENES = "scenes.jsonl"


@dataclass(frozen=True)
class SamplePair:
    """One training example: rescaled gather, binary mask, provenance."""

    input: np.ndarray   # (window, n_receivers) float32 in [-50, 50]
    target: np.ndarray  # (n_rows, n_cols) uint8 {0, 1}
    meta: dict          # seed, used_seed, scene record, scale_factor


def rescale_gather(raw: np.ndarray):
    """Map a raw gather into [-50, 50] by one global max-abs factor.

    Returns (scaled float32 array, scale_factor). The factor is global
    over the whole gather, not per receiver, so relative amplitudes
    between receivers survive. An all-zero gather stays zero with
    scale_factor 0. The scaled extremum is exactly +-50.0: the product is
    computed in float64 and the cast to float32 absorbs its roundoff.
    """
    raw = np.asarray(raw)
    if raw.size and not np.isfinite(raw).all():
        raise ValueError("raw gather contains non-finite values")
    peak = float(np.abs(raw).max()) if raw.size else 0.0
    if peak == 0.0:
        return np.zeros(raw.shape, dtype=np.float32), 0.0
    scale = 50.0 / peak
    return (raw.astype(np.float64) * scale).astype(np.float32), scale


def build_sample(seed: int, config: Optional[RunConfig] = None) -> SamplePair:
    """Generate, simulate, and rescale one sample. Deterministic per
    (seed, config). Simulation blow-ups propagate tagged with the seed."""
    cfg = config if config is not None else RunConfig.default()
    seed &= MASK64
    scene = generate_scene(seed, cfg.scene)
    model, mask = rasterize(scene, cfg.scene)
    try:
        raw = simulate(model, cfg.grid, cfg.source, cfg.receivers)
    except NumericalInstabilityError as e:
        raise NumericalInstabilityError(f"seed {seed}: {e}") from e
    gather, scale = rescale_gather(raw)
    return SamplePair(gather, mask, {
        "seed": seed,
        "used_seed": seed,
        "scene": scene_to_record(scene),
        "scale_factor": scale,
    })


def _build_with_retry(seed: int, config: RunConfig) -> SamplePair:
    last = None
    for attempt in range(MAX_BUILD_ATTEMPTS):
        used = (seed + attempt * RESEED_STEP) & MASK64
        try:
            pair = build_sample(used, config)
        except NumericalInstabilityError as e:
            last = e
            continue
        pair.meta["seed"] = seed & MASK64
        return pair
    raise NumericalInstabilityError(
        f"seed {seed}: {MAX_BUILD_ATTEMPTS} reseed attempts all diverged: {last}")


def _worker_build(task, config: RunConfig):
    index, seed = task
    pair = _build_with_retry(seed, config)
    rec = pair.input.astype("<f4").tobytes() + pair.target.astype(np.uint8).tobytes()
    return index, rec, pair.meta


def record_layout(config: RunConfig) -> dict:
    window = config.grid.n_steps - config.receivers.record_start
    n_rcv = len(config.receivers.positions)
    rows, cols = config.scene.n_rows, config.scene.n_cols
    input_bytes = window * n_rcv * 4
    return {
        "input_dtype": "<f4",
        "input_shape": [window, n_rcv],
        "input_offset": 0,
        "target_dtype": "u1",
        "target_shape": [rows, cols],
        "target_offset": input_bytes,
        "record_size": input_bytes + rows * cols,
    }


def split_sizes(n: int) -> dict:
    """Exact 70/15/15 split sizes by largest-remainder rounding.

    Ties in the fractional remainders resolve in train, val, test order.
    """
    base = [n * p // 100 for p in SPLIT_PERCENTS]
    rema = [n * p % 100 for p in SPLIT_PERCENTS]
    leftover = n - sum(base)
    order = sorted(range(3), key=lambda i: (-rema[i], i))
    for i in order[:leftover]:
        base[i] += 1
    return dict(zip(SPLIT_NAMES, base))


def _split_key(seed: int) -> int:
    return mix64((seed ^ _SPLIT_SALT) & MASK64)


def assign_splits(seeds) -> list:
    """Split name per sample, aligned with the seed list."""
    seeds = list(seeds)
    sizes = split_sizes(len(seeds))
    ranking = sorted(range(len(seeds)), key=lambda j: (_split_key(seeds[j]), j))
    names = [""] * len(seeds)
    pos = 0
    for name in SPLIT_NAMES:
        for j in ranking[pos:pos + sizes[name]]:
            names[j] = name
        pos += sizes[name]
    return names


def _config_digest(cfg: RunConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.rename(path)


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    tmp.rename(path)


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _shard_name(s: int) -> str:
    return f"shard-{s:06d}.bin"


def _shard_meta_name(s: int) -> str:
    return f"shard-{s:06d}.meta.json"


def _load_valid_shard_meta(out: Path, s: int, expected_seeds, record_size: int,
                           digest: str) -> Optional[dict]:
    """Sidecar dict if the shard on disk is complete and trustworthy."""
    bin_path = out / _shard_name(s)
    meta_path = out / _shard_meta_name(s)
    if not bin_path.is_file() or not meta_path.is_file():
        return None
    try:
        meta = json.loads(meta_path.read_text())
    except (OSError, json.JSONDecodeError):
        return None
    if meta.get("config_sha256") != digest:
        return None
    if meta.get("seeds") != list(expected_seeds):
        return None
    data = bin_path.read_bytes()
    if len(data) != record_size * len(expected_seeds):
        return None
    if hashlib.sha256(data).hexdigest() != meta.get("sha256"):
        return None
    return meta


def _build_shard(out: Path, s: int, tasks, config: RunConfig, digest: str,
                 workers: int, progress: Optional[Callable]) -> dict:
    """Build one shard (tasks = [(index, seed), ...]) and write it atomically."""
    build = partial(_worker_build, config=config)
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=min(workers, len(tasks))) as pool:
            results = []
            for r in pool.imap(build, tasks):
                results.append(r)
                if progress is not None:
                    progress(1)
    else:
        results = []
        for t in tasks:
            results.append(build(t))
            if progress is not None:
                progress(1)

    results.sort(key=lambda r: r[0])
    blob = b"".join(rec for _, rec, _ in results)
    metas = [m for _, _, m in results]
    meta = {
        "shard": s,
        "n_samples": len(tasks),
        "seeds": [int(seed) for _, seed in tasks],
        "used_seeds": [m["used_seed"] for m in metas],
        "scale_factors": [m["scale_factor"] for m in metas],
        "sha256": hashlib.sha256(blob).hexdigest(),
        "config_sha256": digest,
    }
    _atomic_write_bytes(out / _shard_name(s), blob)
    _atomic_write_text(out / _shard_meta_name(s), _dump_json(meta))
    return meta


def build_corpus(n: int, base_seed: int, out_path, workers: int = 1,
                 config: Optional[RunConfig] = None,
                 progress: Optional[Callable] = None) -> dict:
    """Build (or resume, or verify) an n-sample corpus; returns the manifest.

    Sample j uses seed base_seed + j (mod 2^64). progress, if given, is
    called as progress(1) per completed sample. Worker parallelism is per
    sample inside each shard; output bytes do not depend on it.
    """
    if n < 0:
        raise ConfigError("n must be non-negative")
    cfg = (config if config is not None else RunConfig.default()).validate()
    out = Path(out_path)
    out.mkdir(parents=True, exist_ok=True)
    digest = _config_digest(cfg)
    layout = record_layout(cfg)
    seeds = [(base_seed + j) & MASK64 for j in range(n)]

    manifest_path = out / _MANIFEST
    if manifest_path.exists():
        existing = json.loads(manifest_path.read_text())
        same = (existing.get("format") == FORMAT_VERSION
                and existing.get("n_samples") == n
                and existing.get("base_seed") == (base_seed & MASK64)
                and existing.get("config_sha256") == digest)
        if same:
            return existing
        raise ConfigError(
            f"{out} already holds a corpus with different parameters; "
            "refusing to overwrite")

    n_shards = math.ceil(n / cfg.shard_size) if n else 0
    shard_metas = []
    for s in range(n_shards):
        lo = s * cfg.shard_size
        hi = min(n, lo + cfg.shard_size)
        tasks = [(j, seeds[j]) for j in range(lo, hi)]
        meta = _load_valid_shard_meta(out, s, [t[1] for t in tasks],
                                      layout["record_size"], digest)
        if meta is not None:
            if progress is not None:
                progress(len(tasks))
            shard_metas.append(meta)
            continue
        shard_metas.append(_build_shard(out, s, tasks, cfg, digest, workers, progress))

    splits = assign_splits(seeds)
    used_seeds = [u for m in shard_metas for u in m["used_seeds"]]
    scale_factors = [f for m in shard_metas for f in m["scale_factors"]]

    scene_lines = []
    samples = []
    substitutions = []
    for j in range(n):
        scene = generate_scene(used_seeds[j], cfg.scene)
        scene_lines.append(json.dumps(
            {"index": j, "seed": seeds[j], "used_seed": used_seeds[j],
             "scene": scene_to_record(scene)},
            sort_keys=True, separators=(",", ":")))
        samples.append({
            "index": j,
            "seed": seeds[j],
            "used_seed": used_seeds[j],
            "split": splits[j],
            "shard": j // cfg.shard_size,
            "offset": (j % cfg.shard_size) * layout["record_size"],
            "scale_factor": scale_factors[j],
        })
        if used_seeds[j] != seeds[j]:
            substitutions.append({"index": j, "seed": seeds[j],
                                  "used_seed": used_seeds[j]})

    manifest = {
        "format": FORMAT_VERSION,
        "n_samples": n,
        "base_seed": base_seed & MASK64,
        "shard_size": cfg.shard_size,
        "backend": kernels.BACKEND,
        "config": cfg.to_dict(),
        "config_sha256": digest,
        "record": layout,
        "split_sizes": split_sizes(n),
        "splits": {name: [j for j in range(n) if splits[j] == name]
                   for name in SPLIT_NAMES},
        "samples": samples,
        "substitutions": substitutions,
        "files": {"shards": [_shard_name(s) for s in range(n_shards)],
                  "scenes": _SCENES},
    }
    _atomic_write_text(out / _SCENES, "".join(line + "\n" for line in scene_lines))
    _atomic_write_text(manifest_path, _dump_json(manifest))
    return manifest


def load_manifest(corpus_dir) -> dict:
    path = Path(corpus_dir) / _MANIFEST
    if not path.is_file():
        raise ConfigError(f"{corpus_dir} is not a complete corpus ({_MANIFEST} missing)")
    manifest = json.loads(path.read_text())
    if manifest.get("format") != FORMAT_VERSION:
        raise ConfigError(f"unsupported corpus format {manifest.get('format')!r}")
    return manifest


def read_sample(corpus_dir, manifest: dict, index: int) -> SamplePair:
    """Read one record back; round-trips build_sample bit-exactly."""
    n = manifest["n_samples"]
    if not 0 <= index < n:
        raise IndexError(f"sample index {index} out of range [0, {n})")
    entry = manifest["samples"][index]
    rec = manifest["record"]
    path = Path(corpus_dir) / _shard_name(entry["shard"])
    with open(path, "rb") as f:
        f.seek(entry["offset"])
        blob = f.read(rec["record_size"])
    if len(blob) != rec["record_size"]:
        raise ConfigError(f"short read in {path} at offset {entry['offset']}")
    t_rows, t_cols = rec["target_shape"]
    w, r = rec["input_shape"]
    gather = np.frombuffer(blob, dtype="<f4", count=w * r,
                           offset=rec["input_offset"]).reshape(w, r)
    target = np.frombuffer(blob, dtype=np.uint8, count=t_rows * t_cols,
                           offset=rec["target_offset"]).reshape(t_rows, t_cols)
    return SamplePair(gather, target, {
        "seed": entry["seed"],
        "used_seed": entry["used_seed"],
        "scale_factor": entry["scale_factor"],
        "split": entry["split"],
    })


def split_indices(manifest: dict, split: str) -> list:
    if split not in SPLIT_NAMES:
        raise ValueError(f"split must be one of {SPLIT_NAMES}, got {split!r}")
    return list(manifest["splits"][split])


def load_split(corpus_dir, split: str, manifest: Optional[dict] = None):
    """Stack one split into memory: (inputs, targets, indices)."""
    manifest = manifest if manifest is not None else load_manifest(corpus_dir)
    idx = split_indices(manifest, split)
    rec = manifest["record"]
    inputs = np.zeros((len(idx), *rec["input_shape"]), dtype=np.float32)
    targets = np.zeros((len(idx), *rec["target_shape"]), dtype=np.uint8)
    for row, j in enumerate(idx):
        pair = read_sample(corpus_dir, manifest, j)
        inputs[row] = pair.input
        targets[row] = pair.target
    return inputs, targets, idx
