"""Run configuration: one JSON file pinning physics and corpus parameters.

Every default equals the production value, so an absent config file means
the standard setup: 256x256 grid at dx = dz = 15 mm, dt = 2.5 us, 1800
steps, 40 kHz source at cell (8, 128), 11 receivers on row 8 recording
from step 400, scenes of 0-10 obstacles. Physics lives in the config
file; command-line flags carry only run-scoped values (sample count,
seeds, paths, worker count).

Example config (all keys optional, shown with defaults):

    {
      "grid":      {"dx": 0.015, "dz": 0.015, "dt": 2.5e-6,
                    "n_steps": 1800, "pad": 3},
      "source":    {"row": 8, "col": 128, "f0": 40000.0, "delay": 100},
      "receivers": {"row": 8,
                    "cols": [16, 38, 60, 82, 104, 126, 148, 170, 192, 214, 236],
                    "record_start": 400},
      "scene":     {"n_rows": 256, "n_cols": 256, "max_objects": 10,
                    "size_range": [8, 24], "row_range": [48, 247],
                    "col_range": [8, 247], "water_speed": 1500.0,
                    "obstacle_speed": 3000.0},
      "shard_size": 100
    }

Receivers may alternatively be given as explicit cell pairs:
    "receivers": {"positions": [[8, 16], [8, 38], ...], "record_start": 400}
"""

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .scenegen import SceneConfig
from .wavesim import (
    DEFAULT_RECEIVER_COLUMNS,
    DEFAULT_RECEIVER_ROW,
    ConfigError,
    GridSpec,
    ReceiverArray,
    SourceSpec,
    cfl_number_from_speed,
)

__all__ = ["RunConfig", "N_RECEIVERS", "RECORD_WINDOW"]

# Production corpus contract: gathers are RECORD_WINDOW x N_RECEIVERS.
N_RECEIVERS = 11
RECORD_WINDOW = 1400

# Obstacles stay at least this many rows below the source/receiver row.
_CLEARANCE_ROWS = 40


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    source: SourceSpec
    receivers: ReceiverArray
    scene: SceneConfig
    shard_size: int = 100

    @classmethod
    def default(cls) -> "RunConfig":
        return cls(GridSpec(), SourceSpec(), ReceiverArray.line(), SceneConfig())

    def validate(self) -> "RunConfig":
        """Enforce the production invariants; raises ConfigError."""
        g, s, r, sc = self.grid, self.source, self.receivers, self.scene

        nu = cfl_number_from_speed(sc.obstacle_speed, g)
        if nu > 1.0:
            raise ConfigError(
                f"CFL violation at max speed {sc.obstacle_speed:.0f} m/s: "
                f"c dt sqrt(1/dx^2 + 1/dz^2) = {nu:.4f} > 1"
            )
        if len(r.positions) != N_RECEIVERS:
            raise ConfigError(f"production runs use exactly {N_RECEIVERS} receivers, "
                              f"got {len(r.positions)}")
        if g.n_steps - r.record_start != RECORD_WINDOW:
            raise ConfigError(
                f"n_steps - record_start must be {RECORD_WINDOW}, "
                f"got {g.n_steps} - {r.record_start} = {g.n_steps - r.record_start}"
            )

        def inside(i, k):
            return 0 <= i < sc.n_rows and 0 <= k < sc.n_cols

        if not inside(*s.position):
            raise ConfigError(f"source {s.position} outside the {sc.n_rows}x{sc.n_cols} grid")
        for p in r.positions:
            if not inside(*p):
                raise ConfigError(f"receiver {p} outside the {sc.n_rows}x{sc.n_cols} grid")

        line_row = max(s.position[0], max(i for i, _ in r.positions))
        if sc.row_range[0] < line_row + _CLEARANCE_ROWS:
            raise ConfigError(
                f"scene row_range must start at least {_CLEARANCE_ROWS} rows below "
                f"the source/receiver line (row {line_row}), got {sc.row_range[0]}"
            )
        if self.shard_size < 1:
            raise ConfigError("shard_size must be >= 1")
        return self

    def to_dict(self) -> dict:
        return {
            "grid": dataclasses.asdict(self.grid),
            "source": {"row": self.source.position[0], "col": self.source.position[1],
                       "f0": self.source.f0, "delay": self.source.delay},
            "receivers": {"positions": [list(p) for p in self.receivers.positions],
                          "record_start": self.receivers.record_start},
            "scene": {
                "n_rows": self.scene.n_rows, "n_cols": self.scene.n_cols,
                "max_objects": self.scene.max_objects,
                "size_range": list(self.scene.size_range),
                "row_range": list(self.scene.row_range),
                "col_range": list(self.scene.col_range),
                "water_speed": self.scene.water_speed,
                "obstacle_speed": self.scene.obstacle_speed,
            },
            "shard_size": self.shard_size,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        _check_keys(data, {"grid", "source", "receivers", "scene", "shard_size"}, "")
        grid = _parse_section(GridSpec, data.get("grid", {}),
                              {"dx", "dz", "dt", "n_steps", "pad"}, "grid")

        src = dict(data.get("source", {}))
        _check_keys(src, {"row", "col", "f0", "delay"}, "source")
        src_kwargs = {}
        if "row" in src or "col" in src:
            if not ("row" in src and "col" in src):
                raise ConfigError("source needs both 'row' and 'col'")
            src_kwargs["position"] = (int(src["row"]), int(src["col"]))
        if "f0" in src:
            src_kwargs["f0"] = float(src["f0"])
        if "delay" in src:
            src_kwargs["delay"] = int(src["delay"])
        source = SourceSpec(**src_kwargs)

        rcv = dict(data.get("receivers", {}))
        _check_keys(rcv, {"row", "cols", "positions", "record_start"}, "receivers")
        if "positions" in rcv:
            if "row" in rcv or "cols" in rcv:
                raise ConfigError("receivers: give either 'positions' or 'row'+'cols', not both")
            positions = tuple((int(i), int(k)) for i, k in rcv["positions"])
        else:
            row = int(rcv.get("row", DEFAULT_RECEIVER_ROW))
            cols = rcv.get("cols", DEFAULT_RECEIVER_COLUMNS)
            positions = tuple((row, int(c)) for c in cols)
        record_start = int(rcv.get("record_start", 400))
        receivers = ReceiverArray(positions, record_start)

        scene_data = dict(data.get("scene", {}))
        _check_keys(scene_data, {"n_rows", "n_cols", "max_objects", "size_range",
                                 "row_range", "col_range", "water_speed",
                                 "obstacle_speed"}, "scene")
        for key in ("size_range", "row_range", "col_range"):
            if key in scene_data:
                scene_data[key] = tuple(int(v) for v in scene_data[key])
        scene = SceneConfig(**scene_data)

        shard_size = int(data.get("shard_size", 100))
        return cls(grid, source, receivers, scene, shard_size)

    @classmethod
    def load(cls, path) -> "RunConfig":
        """Parse a JSON config file; errors carry file and line numbers."""
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        try:
            return cls.from_dict(data)
        except ConfigError as e:
            raise ConfigError(f"{path}: {e}") from e


def _check_keys(data: dict, allowed: set, section: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        where = f"in section '{section}'" if section else "at top level"
        raise ConfigError(f"unknown config key(s) {sorted(unknown)} {where}; "
                          f"allowed: {sorted(allowed)}")


def _parse_section(cls, data: dict, allowed: set, section: str):
    data = dict(data)
    _check_keys(data, allowed, section)
    return cls(**data)
