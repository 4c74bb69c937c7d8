"""2D acoustic wave propagation on a regular grid.

Explicit second-order time stepping with a 7-point (6th-order) spatial
stencil per axis. The physical grid is surrounded by a ``pad``-cell ghost
ring held at zero pressure, a homogeneous Dirichlet boundary that acts as
hard reflecting walls. A point source is injected additively at one cell.

Discrete update, with ``lap`` the stencil Laplacian of p at (i, k):

    p[n+1](i,k) = 2 p[n](i,k) - p[n-1](i,k)
                  + dt^2 (c(i,k)^2 lap(i,k) + s[n] delta_src(i,k))

Fields are float32 by default; pass dtype=np.float64 to ``simulate`` or
``WaveState.zeros`` for convergence studies. The hot loop lives in
:mod:`sonarsim.kernels` and is backend-selectable (numba or numpy).

Row index i increases downward, column index k rightward. A raw gather is
a plain (n_steps - record_start, n_receivers) array whose row m holds the
pressure at timestep record_start + m (timestep 0 is the quiescent initial
state, so record_start = 0 yields an all-zero first row).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels

__all__ = [
    "ConfigError",
    "NumericalInstabilityError",
    "VelocityModel",
    "GridSpec",
    "SourceSpec",
    "ReceiverArray",
    "WaveState",
    "DEFAULT_SOURCE_POSITION",
    "DEFAULT_RECEIVER_ROW",
    "DEFAULT_RECEIVER_COLUMNS",
    "source_amplitude",
    "laplacian",
    "cfl_number",
    "cfl_number_from_speed",
    "check_cfl",
    "step",
    "simulate",
    "snapshot",
]

WATER_SPEED = 1500.0
OBSTACLE_SPEED = 3000.0
MAX_SPEED = 3000.0

DEFAULT_SOURCE_POSITION = (8, 128)
DEFAULT_RECEIVER_ROW = 8
DEFAULT_RECEIVER_COLUMNS = (16, 38, 60, 82, 104, 126, 148, 170, 192, 214, 236)

# Steps between finiteness sweeps of the field during simulate().
_CHECK_EVERY = 100


class ConfigError(ValueError):
    """A parameter set violates a configuration invariant (CFL, geometry)."""


class NumericalInstabilityError(RuntimeError):
    """The pressure field became non-finite during time stepping."""


@dataclass(frozen=True)
class VelocityModel:
    """Propagation speed per cell in m/s, stored read-only as float32."""

    c: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=np.float32)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ConfigError(f"velocity model must be a 2D grid, got shape {c.shape}")
        if not np.isfinite(c).all():
            raise ConfigError("velocity model contains non-finite speeds")
        if float(c.min()) < 0.0 or float(c.max()) > MAX_SPEED:
            raise ConfigError(
                f"speeds must lie in [0, {MAX_SPEED:.0f}] m/s, "
                f"got [{float(c.min()):.1f}, {float(c.max()):.1f}]"
            )
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def shape(self) -> tuple:
        return self.c.shape

    @classmethod
    def homogeneous(cls, speed: float = WATER_SPEED, shape: tuple = (256, 256)) -> "VelocityModel":
        return cls(np.full(shape, speed, dtype=np.float32))


@dataclass(frozen=True)
class GridSpec:
    """Spatial/temporal discretization. Defaults are the production values."""

    dx: float = 0.015
    dz: float = 0.015
    dt: float = 2.5e-6
    n_steps: int = 1800
    pad: int = 3

    def __post_init__(self):
        if self.dx <= 0 or self.dz <= 0 or self.dt <= 0:
            raise ConfigError("dx, dz, dt must be positive")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be at least 1")
        if self.pad < 3:
            raise ConfigError("pad must be >= 3 (stencil half-width)")


@dataclass(frozen=True)
class SourceSpec:
    """Point source: first derivative of a Gaussian, peak frequency f0.

    position is an (i, k) cell index into the unpadded grid; delay is the
    center of the wavelet in timesteps.
    """

    position: tuple = DEFAULT_SOURCE_POSITION
    f0: float = 40_000.0
    delay: int = 100

    def __post_init__(self):
        if self.f0 <= 0:
            raise ConfigError("f0 must be positive")


@dataclass(frozen=True)
class ReceiverArray:
    """Receiver cell positions plus the first recorded timestep.

    positions are (i, k) indices into the unpadded grid, all distinct.
    Production corpora use exactly 11 receivers and a 1400-step window;
    that stricter shape is enforced by the run configuration, not here,
    so tests can use small layouts.
    """

    positions: tuple
    record_start: int = 400

    def __post_init__(self):
        pos = tuple((int(i), int(k)) for i, k in self.positions)
        if len(pos) == 0:
            raise ConfigError("receiver array must contain at least one position")
        if len(set(pos)) != len(pos):
            raise ConfigError("receiver positions must be distinct")
        if self.record_start < 0:
            raise ConfigError("record_start must be non-negative")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def line(cls, row: int = DEFAULT_RECEIVER_ROW, cols=DEFAULT_RECEIVER_COLUMNS,
             record_start: int = 400) -> "ReceiverArray":
        return cls(tuple((row, col) for col in cols), record_start)


@dataclass
class WaveState:
    """Three consecutive pressure levels over the padded grid.

    The ghost ring (width pad) stays identically zero across steps; only
    interior cells are ever written. Buffers are rotated, not copied, so a
    stepped state aliases its predecessor's arrays.
    """

    p_prev: np.ndarray
    p_cur: np.ndarray
    p_next: np.ndarray
    pad: int = 3

    @classmethod
    def zeros(cls, shape: tuple, pad: int = 3, dtype=np.float32) -> "WaveState":
        padded = (shape[0] + 2 * pad, shape[1] + 2 * pad)
        return cls(np.zeros(padded, dtype), np.zeros(padded, dtype),
                   np.zeros(padded, dtype), pad)

    def interior(self) -> np.ndarray:
        """View of the physical (unpadded) region of p_cur."""
        return self.p_cur[self.pad:-self.pad, self.pad:-self.pad]


def source_amplitude(n: int, spec: SourceSpec, dt: float) -> float:
    """Source term s[n]: derivative-of-Gaussian wavelet centered at delay.

    s[n] = -2 (n - delay) dt f0^2 exp(-((n - delay) dt f0)^2)

    Zero at n = delay, odd about it, decays to 0 within a few hundred
    steps at the production dt. Absolute amplitude is arbitrary since
    gathers are max-abs rescaled downstream.
    """
    tau = (n - spec.delay) * dt * spec.f0
    return -2.0 * (n - spec.delay) * dt * spec.f0 * spec.f0 * math.exp(-tau * tau)


def laplacian(p: np.ndarray, i: int, k: int, dx: float, dz: float):
    """7-point second-difference Laplacian of p at one cell.

    Written in difference form (neighbor minus center) so any constant
    field is annihilated exactly in floating point. (i, k) must be at
    least 3 cells from the array border; a padded grid supplies that.
    Reference implementation for tests; the simulation loop uses the
    vectorized kernels module.
    """
    c1, c2, c3 = kernels.STENCIL_C1, kernels.STENCIL_C2, kernels.STENCIL_C3
    pc = p[i, k]
    dxx = (c1 * ((p[i + 1, k] - pc) + (p[i - 1, k] - pc))
           + c2 * ((p[i + 2, k] - pc) + (p[i - 2, k] - pc))
           + c3 * ((p[i + 3, k] - pc) + (p[i - 3, k] - pc)))
    dzz = (c1 * ((p[i, k + 1] - pc) + (p[i, k - 1] - pc))
           + c2 * ((p[i, k + 2] - pc) + (p[i, k - 2] - pc))
           + c3 * ((p[i, k + 3] - pc) + (p[i, k - 3] - pc)))
    return dxx * (1.0 / (dx * dx)) + dzz * (1.0 / (dz * dz))


def cfl_number_from_speed(c_max: float, grid: GridSpec) -> float:
    """c_max dt sqrt(1/dx^2 + 1/dz^2); must be <= 1 for stability."""
    return c_max * grid.dt * math.sqrt(1.0 / grid.dx ** 2 + 1.0 / grid.dz ** 2)


def cfl_number(model: VelocityModel, grid: GridSpec) -> float:
    return cfl_number_from_speed(float(model.c.max()), grid)


def check_cfl(model: VelocityModel, grid: GridSpec) -> None:
    nu = cfl_number(model, grid)
    if nu > 1.0:
        raise ConfigError(
            f"CFL violation: max(c) dt sqrt(1/dx^2 + 1/dz^2) = {nu:.4f} > 1; "
            "reduce dt or coarsen the grid"
        )


def _validate_geometry(model: VelocityModel, grid: GridSpec,
                       src: Optional[SourceSpec], rcv: Optional[ReceiverArray]) -> None:
    n_rows, n_cols = model.shape

    def inside(i, k):
        return 0 <= i < n_rows and 0 <= k < n_cols

    if src is not None and not inside(*src.position):
        raise ConfigError(f"source position {src.position} outside the {n_rows}x{n_cols} grid")
    if rcv is not None:
        for p in rcv.positions:
            if not inside(*p):
                raise ConfigError(f"receiver position {p} outside the {n_rows}x{n_cols} grid")
        if rcv.record_start >= grid.n_steps:
            raise ConfigError(
                f"record_start {rcv.record_start} must be < n_steps {grid.n_steps}"
            )


def _c2dt2(model: VelocityModel, grid: GridSpec, dtype) -> np.ndarray:
    """(c dt)^2 over the interior, in the field dtype."""
    t = np.dtype(dtype).type
    return np.square(model.c.astype(dtype) * t(grid.dt))


def step(state: WaveState, model: VelocityModel, grid: GridSpec,
         src: Optional[SourceSpec], n: int) -> WaveState:
    """Advance one timestep: fill p_next from (p_prev, p_cur), rotate.

    n indexes the current level, so the source term uses s[n]. Returns the
    rotated state (aliasing the input buffers); the old p_prev becomes the
    new scratch p_next.
    """
    c2dt2 = _c2dt2(model, grid, state.p_cur.dtype)
    _advance(state, c2dt2, grid, src, n)
    return WaveState(state.p_cur, state.p_next, state.p_prev, state.pad)


def _advance(state: WaveState, c2dt2: np.ndarray, grid: GridSpec,
             src: Optional[SourceSpec], n: int) -> None:
    if src is not None:
        src_term = grid.dt * grid.dt * source_amplitude(n, src, grid.dt)
        si, sk = src.position
    else:
        src_term, si, sk = 0.0, 0, 0
    kernels.step_interior(
        state.p_prev, state.p_cur, state.p_next, c2dt2, state.pad,
        1.0 / (grid.dx * grid.dx), 1.0 / (grid.dz * grid.dz),
        src_term, si, sk,
    )


def simulate(model: VelocityModel, grid: GridSpec, src: Optional[SourceSpec],
             rcv: ReceiverArray, dtype=np.float32,
             on_step: Optional[Callable] = None) -> np.ndarray:
    """Run n_steps from a quiescent state and record receiver pressures.

    Returns the raw gather: shape (n_steps - record_start, n_receivers),
    row m = pressure at timestep record_start + m, column order matching
    rcv.positions. Deterministic for fixed inputs on one platform.

    on_step, if given, is called as on_step(t, state) after each update,
    where state.p_cur holds timestep t (t runs 1..n_steps).

    Raises NumericalInstabilityError if the field goes non-finite; the
    field is swept every 100 steps and at the end, so the named timestep
    is an upper bound on the onset.
    """
    _validate_geometry(model, grid, src, rcv)
    check_cfl(model, grid)

    state = WaveState.zeros(model.shape, grid.pad, dtype)
    c2dt2 = _c2dt2(model, grid, np.dtype(dtype))
    n_recorded = grid.n_steps - rcv.record_start
    gather = np.zeros((n_recorded, len(rcv.positions)), dtype=dtype)
    rows = np.array([i + grid.pad for i, _ in rcv.positions])
    cols = np.array([k + grid.pad for _, k in rcv.positions])

    # Overflow to inf is handled by the finiteness sweep, not a warning.
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(grid.n_steps):
            if t >= rcv.record_start:
                gather[t - rcv.record_start] = state.p_cur[rows, cols]
            _advance(state, c2dt2, grid, src, t)
            state = WaveState(state.p_cur, state.p_next, state.p_prev, state.pad)
            if (t + 1) % _CHECK_EVERY == 0 and not np.isfinite(state.p_cur).all():
                raise NumericalInstabilityError(
                    f"pressure field became non-finite by timestep {t + 1}"
                )
            if on_step is not None:
                on_step(t + 1, state)

    if not np.isfinite(state.p_cur).all():
        raise NumericalInstabilityError(
            f"pressure field became non-finite by timestep {grid.n_steps}"
        )
    return gather


def snapshot(state: WaveState) -> np.ndarray:
    """Copy of the unpadded p_cur plane, for rendering or export."""
    return state.interior().copy()
