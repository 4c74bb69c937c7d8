#!/usr/bin/env python3
"""Benchmark the time-stepping kernel: numba backend against the numpy
fallback, with a bit-identity check between the two.

Usage:
    python3 benchmarks/bench_stencil.py [--size 256] [--steps 400]
                                        [--dtype float32]
"""

import argparse
import time

import numpy as np

from sonarsim import kernels
from sonarsim.wavesim import SourceSpec, source_amplitude

DX = 0.015
DT = 2.5e-6
SPEED = 1500.0


def run(entry, size, steps, dtype):
    """Zero-start run with a centered wavelet source; returns (field, seconds)."""
    pad = 3
    shape = (size + 2 * pad, size + 2 * pad)
    p_prev = np.zeros(shape, dtype)
    p_cur = np.zeros(shape, dtype)
    p_next = np.zeros(shape, dtype)
    c2dt2 = np.full((size, size), (SPEED * DT) ** 2, dtype)
    src = SourceSpec(position=(size // 2, size // 2))
    inv = 1.0 / (DX * DX)

    t0 = time.perf_counter()
    for n in range(steps):
        term = DT * DT * source_amplitude(n, src, DT)
        entry(p_prev, p_cur, p_next, c2dt2, pad, inv, inv, term,
              src.position[0], src.position[1])
        p_prev, p_cur, p_next = p_cur, p_next, p_prev
    elapsed = time.perf_counter() - t0
    return p_cur, elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256, help="grid edge in cells")
    ap.add_argument("--steps", type=int, default=400)
    ap.add_argument("--dtype", choices=("float32", "float64"), default="float32")
    args = ap.parse_args()
    dtype = np.dtype(args.dtype)
    cells = args.size * args.size

    entries = {"numpy": kernels.step_interior_numpy}
    try:
        entries["numba"] = kernels.make_step_interior_numba()
    except ImportError:
        print("numba unavailable; timing the numpy fallback only")

    fields = {}
    for name, entry in entries.items():
        run(entry, 32, 8, dtype)  # warm up (jit compile, allocator)
        fields[name], seconds = run(entry, args.size, args.steps, dtype)
        rate = args.steps / seconds
        print(f"{name:6s} {args.size}x{args.size} {args.dtype}: "
              f"{seconds:7.3f} s  {rate:8.1f} steps/s  "
              f"{rate * cells / 1e6:8.1f} Mcell/s")

    if len(fields) == 2:
        same = np.array_equal(fields["numba"], fields["numpy"])
        print(f"bit-identical results: {same}")
        if not same:
            raise SystemExit("backends disagree")


if __name__ == "__main__":
    main()
