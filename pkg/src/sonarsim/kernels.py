"""Hot stencil kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time from the ``SONARSIM_BACKEND``
environment variable: ``numba`` (default when numba imports), ``numpy``
(vectorized fallback, no JIT). Both backends evaluate the update with the
same operand association, and all scalars are pre-cast to the field dtype,
so the two paths agree bit for bit on one platform.

The spatial operator is a 7-point second-difference stencil per axis,
written in difference form ``sum_j c_j * ((p[i+j]-p[i]) + (p[i-j]-p[i]))``
so a constant field is annihilated exactly in floating point.
"""

import os

import numpy as np

# Offsets +-1, +-2, +-3; the implied center coefficient is -2*(C1+C2+C3) = -49/18.
STENCIL_C1 = 1.5
STENCIL_C2 = -3.0 / 20.0
STENCIL_C3 = 1.0 / 90.0


def _inner_numpy(p_prev, p_cur, p_next, c2dt2, pad, c1, c2, c3, two, ix2, iz2, src, si, sk):
    n_i = p_cur.shape[0] - 2 * pad
    n_k = p_cur.shape[1] - 2 * pad

    def sh(di, dk):
        return p_cur[pad + di:pad + di + n_i, pad + dk:pad + dk + n_k]

    pc = sh(0, 0)
    dxx = (c1 * ((sh(1, 0) - pc) + (sh(-1, 0) - pc))
           + c2 * ((sh(2, 0) - pc) + (sh(-2, 0) - pc))
           + c3 * ((sh(3, 0) - pc) + (sh(-3, 0) - pc)))
    dzz = (c1 * ((sh(0, 1) - pc) + (sh(0, -1) - pc))
           + c2 * ((sh(0, 2) - pc) + (sh(0, -2) - pc))
           + c3 * ((sh(0, 3) - pc) + (sh(0, -3) - pc)))
    lap = dxx * ix2 + dzz * iz2
    p_next[pad:pad + n_i, pad:pad + n_k] = (
        (two * pc - p_prev[pad:pad + n_i, pad:pad + n_k]) + c2dt2 * lap
    )
    if src != 0.0:
        p_next[si + pad, sk + pad] += src


def _build_inner_numba():
    # The GNU OpenMP threading layer is not fork-safe and corpus builds
    # fork worker pools, so prefer numba's own fork-safe pool unless the
    # user explicitly chose a layer.
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    from numba import njit, prange

    @njit(parallel=True, cache=True)
    def _inner_numba(p_prev, p_cur, p_next, c2dt2, pad, c1, c2, c3, two, ix2, iz2, src, si, sk):
        n_i = p_cur.shape[0] - 2 * pad
        n_k = p_cur.shape[1] - 2 * pad
        for ii in prange(n_i):
            i = ii + pad
            for kk in range(n_k):
                k = kk + pad
                pc = p_cur[i, k]
                dxx = (c1 * ((p_cur[i + 1, k] - pc) + (p_cur[i - 1, k] - pc))
                       + c2 * ((p_cur[i + 2, k] - pc) + (p_cur[i - 2, k] - pc))
                       + c3 * ((p_cur[i + 3, k] - pc) + (p_cur[i - 3, k] - pc)))
                dzz = (c1 * ((p_cur[i, k + 1] - pc) + (p_cur[i, k - 1] - pc))
                       + c2 * ((p_cur[i, k + 2] - pc) + (p_cur[i, k - 2] - pc))
                       + c3 * ((p_cur[i, k + 3] - pc) + (p_cur[i, k - 3] - pc)))
                lap = dxx * ix2 + dzz * iz2
                p_next[i, k] = (two * pc - p_prev[i, k]) + c2dt2[ii, kk] * lap
        if src != 0.0:
            p_next[si + pad, sk + pad] += src

    return _inner_numba


def _make_entry(inner):
    def step_interior(p_prev, p_cur, p_next, c2dt2, pad, inv_dx2, inv_dz2, src_term, si, sk):
        """Advance one leapfrog step over the interior; ghost ring untouched."""
        t = p_cur.dtype.type
        inner(p_prev, p_cur, p_next, c2dt2, pad,
              t(STENCIL_C1), t(STENCIL_C2), t(STENCIL_C3), t(2.0),
              t(inv_dx2), t(inv_dz2), t(src_term), si, sk)

    return step_interior


def _select_backend():
    requested = os.environ.get("SONARSIM_BACKEND", "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(f"SONARSIM_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numpy":
        return "numpy", _make_entry(_inner_numpy)
    try:
        inner = _build_inner_numba()
    except ImportError:
        if requested == "numba":
            raise
        return "numpy", _make_entry(_inner_numpy)
    return "numba", _make_entry(inner)


BACKEND, step_interior = _select_backend()

# Explicit entries for the backend-comparison benchmark and equality tests.
step_interior_numpy = _make_entry(_inner_numpy)


def make_step_interior_numba():
    """Build (or fetch from the on-disk cache) the jitted entry, whatever BACKEND is."""
    return _make_entry(_build_inner_numba())
