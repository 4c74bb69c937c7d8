"""Physics and contract tests for the wave propagation module."""

import math

import numpy as np
import pytest

import sonarsim.wavesim as ws
from sonarsim.wavesim import (
    ConfigError,
    GridSpec,
    NumericalInstabilityError,
    ReceiverArray,
    SourceSpec,
    VelocityModel,
    WaveState,
    cfl_number,
    check_cfl,
    laplacian,
    simulate,
    snapshot,
    source_amplitude,
    step,
)

PROD_DT = 2.5e-6
PROD_DX = 0.015


# ---------------------------------------------------------------- types

def test_velocity_model_rejects_out_of_range_speeds():
    with pytest.raises(ConfigError):
        VelocityModel(np.full((8, 8), 3200.0, np.float32))
    with pytest.raises(ConfigError):
        VelocityModel(np.full((8, 8), -1.0, np.float32))
    with pytest.raises(ConfigError):
        VelocityModel(np.full((8, 8), np.nan, np.float32))
    with pytest.raises(ConfigError):
        VelocityModel(np.zeros(8, np.float32))  # not 2D


def test_velocity_model_is_read_only():
    m = VelocityModel.homogeneous(1500.0, (8, 8))
    with pytest.raises(ValueError):
        m.c[0, 0] = 2000.0


def test_grid_spec_validation():
    with pytest.raises(ConfigError):
        GridSpec(dt=0.0)
    with pytest.raises(ConfigError):
        GridSpec(n_steps=0)
    with pytest.raises(ConfigError):
        GridSpec(pad=2)


def test_receiver_array_rejects_duplicates_and_empty():
    with pytest.raises(ConfigError):
        ReceiverArray(((3, 4), (3, 4)), 0)
    with pytest.raises(ConfigError):
        ReceiverArray((), 0)
    with pytest.raises(ConfigError):
        ReceiverArray(((3, 4),), -1)


def test_default_receiver_line():
    rcv = ReceiverArray.line()
    assert len(rcv.positions) == 11
    assert all(i == 8 for i, _ in rcv.positions)
    assert rcv.record_start == 400


# ------------------------------------------------------------- source

def test_source_amplitude_zero_at_delay_center():
    assert source_amplitude(100, SourceSpec(), PROD_DT) == 0.0


def test_source_amplitude_closed_form_value():
    # s[110] = -2 * 10 dt * f0^2 * exp(-1) = -8e4 / e
    got = source_amplitude(110, SourceSpec(), PROD_DT)
    assert math.isclose(got, -8e4 * math.exp(-1.0), rel_tol=1e-12)


def test_source_amplitude_is_odd_about_delay():
    spec = SourceSpec()
    for m in (1, 5, 17, 40):
        assert source_amplitude(100 + m, spec, PROD_DT) == \
            -source_amplitude(100 - m, spec, PROD_DT)


def test_source_amplitude_decays_to_nothing():
    spec = SourceSpec()
    assert abs(source_amplitude(350, spec, PROD_DT)) < 1e-200
    peak = max(abs(source_amplitude(n, spec, PROD_DT)) for n in range(200))
    assert math.isclose(peak, 8e4 * math.sqrt(2) * math.exp(-0.5) / 2, rel_tol=0.1)


# ----------------------------------------------------------- laplacian

def test_laplacian_annihilates_constants_exactly():
    for value in (0.0, 7.3, -3.75, 1.0e6):
        p = np.full((16, 16), value, np.float32)
        for i in range(3, 13, 3):
            for k in range(3, 13, 4):
                assert laplacian(p, i, k, PROD_DX, PROD_DX) == 0.0


def test_laplacian_exact_on_quadratic_float32():
    # power-of-two spacing keeps (i dx)^2 and its differences exact in f32
    dx = 0.25
    i = np.arange(48, dtype=np.float32)
    p = np.square(i * np.float32(dx))[:, None] + np.zeros((1, 48), np.float32)
    for ii in range(3, 45, 4):
        v = laplacian(p, ii, 10, dx, 2.0)
        assert abs(float(v) - 2.0) < 1e-5


def test_laplacian_quadratic_production_spacing_float64():
    i = np.arange(64, dtype=np.float64)
    p = np.square(i * PROD_DX)[:, None] + np.zeros((1, 64))
    for ii in range(3, 61, 5):
        v = laplacian(p, ii, 8, PROD_DX, 1.0)
        assert abs(v - 2.0) / 2.0 < 1e-10


def test_laplacian_exact_on_degree_six_polynomial():
    # the 7-point stencil differentiates x^6 without truncation error
    dx = 0.5
    x = np.arange(40, dtype=np.float64) * dx
    p = (x ** 6)[:, None] + np.zeros((1, 40))
    for ii in range(6, 34, 3):
        want = 30.0 * x[ii] ** 4
        got = laplacian(p, ii, 20, dx, 1.0)
        assert abs(got - want) / want < 1e-9


def test_laplacian_sixth_order_convergence_on_sine():
    # halving dx should shrink the sine error by about 2^6
    def err(dx, i0):
        n = 4 * i0
        x = np.arange(n) * dx
        p = np.sin(2 * np.pi * x)[:, None] + np.zeros((1, n))
        exact = -(2 * np.pi) ** 2 * math.sin(2 * np.pi * x[i0])
        return abs(laplacian(p, i0, n // 2, dx, 1.0) - exact)

    e1 = err(1.0 / 64, 16)   # x0 = 0.25
    e2 = err(1.0 / 128, 32)  # same x0
    assert 40.0 < e1 / e2 < 96.0


# ----------------------------------------------------------------- CFL

def test_cfl_number_at_production_values():
    grid = GridSpec()
    m = VelocityModel.homogeneous(1500.0, (16, 16))
    assert math.isclose(cfl_number(m, grid), 0.25 * math.sqrt(2), rel_tol=1e-9)
    check_cfl(m, grid)  # passes
    m3000 = VelocityModel.homogeneous(3000.0, (16, 16))
    assert math.isclose(cfl_number(m3000, grid), 0.5 * math.sqrt(2), rel_tol=1e-9)
    check_cfl(m3000, grid)  # 0.707 still passes


def test_cfl_violation_raises_before_stepping():
    grid = GridSpec(dt=1e-5)  # 3000 * 1e-5 * sqrt(2)/0.015 = 2.83
    m = VelocityModel.homogeneous(3000.0, (16, 16))
    with pytest.raises(ConfigError, match="CFL"):
        simulate(m, grid, SourceSpec(position=(8, 8)), ReceiverArray(((8, 4),), 0))


# ---------------------------------------------------------------- step

def test_step_is_quiescent_before_source_onset():
    m = VelocityModel.homogeneous(1500.0, (32, 32))
    grid = GridSpec(n_steps=10)
    state = WaveState.zeros((32, 32))
    state = step(state, m, grid, SourceSpec(position=(16, 16)), 0)
    # s[0] carries exp(-100); nothing measurable enters the field
    assert float(np.abs(state.p_cur).max()) < 1e-30


def test_step_rotates_buffers_without_copying():
    m = VelocityModel.homogeneous(1500.0, (16, 16))
    state = WaveState.zeros((16, 16))
    old_cur, old_next, old_prev = state.p_cur, state.p_next, state.p_prev
    out = step(state, m, GridSpec(), SourceSpec(position=(8, 8)), 120)
    assert out.p_cur is old_next
    assert out.p_prev is old_cur
    assert out.p_next is old_prev


def test_ghost_ring_stays_zero_through_stepping():
    m = VelocityModel.homogeneous(1500.0, (32, 32))
    grid = GridSpec()
    state = WaveState.zeros((32, 32))
    for n in range(160):
        state = step(state, m, grid, SourceSpec(position=(16, 16)), n)
    assert float(np.abs(state.p_cur).max()) > 0
    ring = state.p_cur.copy()
    ring[3:-3, 3:-3] = 0
    assert not ring.any()


# ------------------------------------------------------------ simulate

def test_simulate_is_bit_deterministic():
    m = VelocityModel.homogeneous(1500.0, (48, 48))
    grid = GridSpec(n_steps=300)
    src = SourceSpec(position=(24, 24))
    rcv = ReceiverArray(((24, 40), (10, 12)), 100)
    a = simulate(m, grid, src, rcv)
    b = simulate(m, grid, src, rcv)
    assert a.dtype == np.float32 and a.shape == (200, 2)
    assert np.array_equal(a, b)


def test_gather_rows_match_timesteps():
    m = VelocityModel.homogeneous(1500.0, (48, 48))
    grid = GridSpec(n_steps=250)
    src = SourceSpec(position=(24, 24))
    rcv = ReceiverArray(((24, 40),), 60)
    seen = {}

    def capture(t, state):
        seen[t] = state.p_cur[24 + 3, 40 + 3]

    g = simulate(m, grid, src, rcv, on_step=capture)
    assert g.shape == (190, 1)
    # row m holds the field at timestep record_start + m
    for mrow in range(190):
        assert g[mrow, 0] == seen[60 + mrow]


def test_record_start_zero_first_row_is_quiescent():
    m = VelocityModel.homogeneous(1500.0, (32, 32))
    g = simulate(m, GridSpec(n_steps=50), SourceSpec(position=(16, 16)),
                 ReceiverArray(((16, 20),), 0))
    assert g.shape == (50, 1)
    assert not g[0].any()


def test_on_step_called_for_every_timestep():
    m = VelocityModel.homogeneous(1500.0, (32, 32))
    ts = []
    simulate(m, GridSpec(n_steps=40), SourceSpec(position=(16, 16)),
             ReceiverArray(((16, 20),), 0), on_step=lambda t, s: ts.append(t))
    assert ts == list(range(1, 41))


def test_simulate_rejects_bad_geometry():
    m = VelocityModel.homogeneous(1500.0, (32, 32))
    grid = GridSpec(n_steps=50)
    with pytest.raises(ConfigError, match="source"):
        simulate(m, grid, SourceSpec(position=(32, 5)), ReceiverArray(((8, 8),), 0))
    with pytest.raises(ConfigError, match="receiver"):
        simulate(m, grid, SourceSpec(position=(8, 5)), ReceiverArray(((8, 99),), 0))
    with pytest.raises(ConfigError, match="record_start"):
        simulate(m, grid, SourceSpec(position=(8, 5)), ReceiverArray(((8, 8),), 50))


def test_simulate_supports_float64():
    m = VelocityModel.homogeneous(1500.0, (32, 32))
    g = simulate(m, GridSpec(n_steps=150), SourceSpec(position=(16, 16)),
                 ReceiverArray(((16, 24),), 0), dtype=np.float64)
    assert g.dtype == np.float64
    assert np.isfinite(g).all() and np.abs(g).max() > 0


def test_instability_detected_and_named():
    # per-axis Courant 0.65 passes the configured check (0.919 <= 1) but
    # exceeds the true stability bound of the 7-point stencil (~0.575)
    dt_bad = 0.65 * PROD_DX / 1500.0
    grid = GridSpec(dt=dt_bad, n_steps=1200)
    m = VelocityModel.homogeneous(1500.0, (64, 64))
    assert cfl_number(m, grid) <= 1.0
    with pytest.raises(NumericalInstabilityError, match=r"timestep \d+"):
        simulate(m, grid, SourceSpec(position=(32, 32)), ReceiverArray(((32, 50),), 0))


# ------------------------------------------------------------ snapshot

def test_snapshot_of_zero_state_is_zero():
    s = WaveState.zeros((40, 40))
    img = snapshot(s)
    assert img.shape == (40, 40)
    assert not img.any()


def test_snapshot_is_a_pure_copy():
    s = WaveState.zeros((16, 16))
    s.p_cur[8, 8] = 1.5
    a = snapshot(s)
    b = snapshot(s)
    assert np.array_equal(a, b)
    a[0, 0] = 9.0
    assert s.p_cur[3, 3] == 0.0


def test_snapshot_shows_annular_wavefront():
    m = VelocityModel.homogeneous(1500.0, (128, 128))
    src = SourceSpec(position=(64, 64))
    grabbed = {}

    def grab(t, state):
        if t == 250:
            grabbed["img"] = snapshot(state)

    simulate(m, GridSpec(n_steps=250), src, ReceiverArray(((64, 100),), 0),
             on_step=grab)
    p = np.abs(grabbed["img"])
    ii, kk = np.meshgrid(np.arange(128), np.arange(128), indexing="ij")
    radius = np.hypot(ii - 64.0, kk - 64.0)
    peak_r = float(radius.flat[int(np.argmax(p))])
    expected = (250 - 100) * PROD_DT * 1500.0 / PROD_DX  # 37.5 cells
    assert abs(peak_r - expected) <= 8.0
