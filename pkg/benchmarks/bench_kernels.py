#!/usr/bin/env python3
"""Benchmark the numba kernels against their numpy/python fallbacks.

Run from the repo root:

    python benchmarks/bench_kernels.py

Covers the three kernel families: the file checksum, mock-vector
generation, and the incremental all-k sweep. Results on both paths must be
bit-identical; this script re-checks that while timing.
"""

import time

import numpy as np

from embedsim import kernels


def timeit(fn, repeats=5):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def fmt(seconds):
    return f"{seconds * 1e3:9.2f} ms"


def bench_xxh64():
    rng = np.random.default_rng(0)
    data = rng.integers(0, 256, size=8 * 1024 * 1024, dtype=np.uint8)
    raw = data.tobytes()

    t_nb, h_nb = timeit(lambda: int(kernels._xxh64_nb(data, np.uint64(0))))
    t_py, h_py = timeit(lambda: kernels._xxh64_py(raw, 0), repeats=1)
    assert h_nb == h_py
    gbps = len(raw) / t_nb / 1e9
    print(f"xxh64 8 MiB          numba {fmt(t_nb)} ({gbps:4.1f} GB/s)   "
          f"python {fmt(t_py)}   speedup {t_py / t_nb:7.1f}x")


def bench_mock_rows():
    rng = np.random.default_rng(1)
    hashes = rng.integers(0, 2**64, size=20_000, dtype=np.uint64)
    dim = 512

    t_nb, out_nb = timeit(lambda: kernels._mock_rows_nb(hashes, np.uint64(3), dim))
    t_np, out_np = timeit(lambda: kernels._mock_rows_np(hashes, 3, dim))
    assert np.array_equal(out_nb, out_np)
    print(f"mock rows 20k x 512  numba {fmt(t_nb)}                 "
          f"numpy  {fmt(t_np)}   speedup {t_np / t_nb:7.1f}x")


def bench_sweep():
    rng = np.random.default_rng(2)
    n = 100_000
    pa = (rng.permutation(n) + 1).astype(np.int64)
    pb = (rng.permutation(n) + 1).astype(np.int64)
    inv_a = np.empty(n, dtype=np.int64)
    inv_b = np.empty(n, dtype=np.int64)
    inv_a[pa - 1] = np.arange(n, dtype=np.int64)
    inv_b[pb - 1] = np.arange(n, dtype=np.int64)

    t_nb, out_nb = timeit(lambda: kernels._sweep_nb(pa, pb, inv_a, inv_b))
    t_np, out_np = timeit(lambda: kernels._sweep_np(pa, pb))
    assert np.array_equal(out_nb[0], out_np[0])
    assert np.array_equal(out_nb[1], out_np[1])
    print(f"sweep n=100k         numba {fmt(t_nb)}                 "
          f"numpy  {fmt(t_np)}   speedup {t_np / t_nb:7.1f}x")


def main():
    if not kernels.NUMBA_ENABLED:
        raise SystemExit(
            "numba path is disabled (EMBEDSIM_NO_NUMBA set or numba missing); "
            "nothing to compare"
        )
    print("warming up JIT...")
    kernels.xxh64(b"warmup")
    kernels.mock_rows(np.array([1], dtype=np.uint64), 0, 4)
    kernels.sweep_curves(np.array([1], dtype=np.int64), np.array([1], dtype=np.int64))
    print()
    bench_xxh64()
    bench_mock_rows()
    bench_sweep()


if __name__ == "__main__":
    main()
