"""Random scene generation: obstacle layouts and their velocity models.

A scene is 0 to 10 disk- or square-shaped obstacles at 3000 m/s in
1500 m/s water on a 256 by 256 grid (all configurable). Generation is
driven by SplitMix64 so a (seed, config) pair pins the scene exactly,
on any platform.

Draw order per scene (a format contract, do not reorder):
    1. n_objects              uniform in [0, max_objects]
    2. per object, in order:
       a. kind               disk if next draw is even else square
       b. size               uniform in size_range (radius or half-side)
       c. center row         uniform in row_range, then clamped in-grid
       d. center column      uniform in col_range, then clamped in-grid

Clamping keeps every shape fully inside the grid, so boundary-adjacent
center draws pile up slightly at the clamp limits.
"""

import json
from dataclasses import dataclass

import numpy as np

from .rng import MASK64, SplitMix64
from .wavesim import OBSTACLE_SPEED, WATER_SPEED, ConfigError, VelocityModel

__all__ = [
    "Shape",
    "SceneConfig",
    "SceneSpec",
    "generate_scene",
    "rasterize",
    "scene_to_record",
    "scene_from_record",
    "scene_to_json",
    "scene_from_json",
]

KINDS = ("disk", "square")


@dataclass(frozen=True)
class Shape:
    """One obstacle: kind is "disk" or "square", size is the radius or
    half-side in cells, center is an (row, col) cell index."""

    kind: str
    center: tuple
    size: int


@dataclass(frozen=True)
class SceneConfig:
    """Scene-generation ranges. Defaults are the production values.

    row_range starts 40 rows below the receiver line (row 8) so obstacles
    never sit on the source/receiver row; size_range spans several
    wavelengths so obstacles produce resolvable echoes. Ranges are
    inclusive on both ends.
    """

    n_rows: int = 256
    n_cols: int = 256
    max_objects: int = 10
    size_range: tuple = (8, 24)
    row_range: tuple = (48, 247)
    col_range: tuple = (8, 247)
    water_speed: float = WATER_SPEED
    obstacle_speed: float = OBSTACLE_SPEED

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ConfigError("scene grid must be at least 1x1")
        if self.max_objects < 0:
            raise ConfigError("max_objects must be non-negative")
        lo, hi = self.size_range
        if not (1 <= lo <= hi):
            raise ConfigError(f"invalid size_range {self.size_range}")
        for name, (a, b), limit in (("row_range", self.row_range, self.n_rows),
                                    ("col_range", self.col_range, self.n_cols)):
            if not (0 <= a <= b < limit):
                raise ConfigError(f"invalid {name} ({a}, {b}) for grid extent {limit}")
        # The largest shape must still fit somewhere in the placeable region.
        s = self.size_range[1]
        if max(self.row_range[0], s) > min(self.row_range[1], self.n_rows - 1 - s):
            raise ConfigError("size_range and row_range admit no valid placement")
        if max(self.col_range[0], s) > min(self.col_range[1], self.n_cols - 1 - s):
            raise ConfigError("size_range and col_range admit no valid placement")


@dataclass(frozen=True)
class SceneSpec:
    """A fully determined obstacle layout plus the seed that produced it."""

    seed: int
    shapes: tuple

    @property
    def n_objects(self) -> int:
        return len(self.shapes)


def _clamp(v: int, lo: int, hi: int) -> int:
    return lo if v < lo else hi if v > hi else v


def generate_scene(seed: int, config: SceneConfig = None) -> SceneSpec:
    """Deterministically draw a scene for the given 64-bit seed."""
    cfg = config if config is not None else SceneConfig()
    rng = SplitMix64(seed)
    n = rng.below(cfg.max_objects + 1)
    lo_s, hi_s = cfg.size_range
    shapes = []
    for _ in range(n):
        kind = KINDS[rng.below(2)]
        size = lo_s + rng.below(hi_s - lo_s + 1)
        row = cfg.row_range[0] + rng.below(cfg.row_range[1] - cfg.row_range[0] + 1)
        col = cfg.col_range[0] + rng.below(cfg.col_range[1] - cfg.col_range[0] + 1)
        row = _clamp(row, max(cfg.row_range[0], size), min(cfg.row_range[1], cfg.n_rows - 1 - size))
        col = _clamp(col, max(cfg.col_range[0], size), min(cfg.col_range[1], cfg.n_cols - 1 - size))
        shapes.append(Shape(kind, (row, col), size))
    return SceneSpec(seed & MASK64, tuple(shapes))


def rasterize(scene: SceneSpec, config: SceneConfig = None):
    """Paint the scene: returns (VelocityModel, mask).

    mask is a uint8 {0, 1} array with 1 exactly where the model is at
    obstacle speed. Disk membership is squared distance <= size^2; square
    membership is Chebyshev distance <= size. Overlaps union.
    """
    cfg = config if config is not None else SceneConfig()
    mask = np.zeros((cfg.n_rows, cfg.n_cols), dtype=np.uint8)
    for sh in scene.shapes:
        if sh.kind not in KINDS:
            raise ConfigError(f"unknown shape kind {sh.kind!r}")
        ci, ck = sh.center
        s = int(sh.size)
        if s < 1:
            raise ConfigError(f"shape size must be >= 1, got {s}")
        if ci - s < 0 or ci + s >= cfg.n_rows or ck - s < 0 or ck + s >= cfg.n_cols:
            raise ConfigError(f"shape {sh} extends outside the grid")
        box = mask[ci - s:ci + s + 1, ck - s:ck + s + 1]
        if sh.kind == "disk":
            ii, kk = np.ogrid[-s:s + 1, -s:s + 1]
            box |= (ii * ii + kk * kk <= s * s).astype(np.uint8)
        else:
            box |= 1
    speeds = np.where(mask == 1, np.float32(cfg.obstacle_speed), np.float32(cfg.water_speed))
    return VelocityModel(speeds), mask


def scene_to_record(scene: SceneSpec) -> dict:
    """Plain-dict form used in manifests and scene files."""
    return {
        "seed": scene.seed,
        "shapes": [
            {"kind": sh.kind, "row": sh.center[0], "col": sh.center[1], "size": sh.size}
            for sh in scene.shapes
        ],
    }


def scene_from_record(rec: dict) -> SceneSpec:
    shapes = tuple(
        Shape(str(s["kind"]), (int(s["row"]), int(s["col"])), int(s["size"]))
        for s in rec["shapes"]
    )
    return SceneSpec(int(rec["seed"]), shapes)


def scene_to_json(scene: SceneSpec) -> str:
    """Single-line JSON record, stable key order."""
    return json.dumps(scene_to_record(scene), sort_keys=True, separators=(",", ":"))


def scene_from_json(text: str) -> SceneSpec:
    return scene_from_record(json.loads(text))
