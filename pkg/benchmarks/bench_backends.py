#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Workloads mirror the hot paths: batched bundle computation over many price
rows, and deviation-filtering a full breakpoint grid.  Run:

    python3 benchmarks/bench_backends.py [--rows 20000] [--repeat 5]

The numba path pays a one-time JIT cost (cached on disk afterwards); timings
below exclude it by warming both backends first.
"""

import argparse
import random
import time
from fractions import Fraction

import numpy as np

from pricegame import Buyer, Market, SetFunction
from pricegame.backend import get_backend
from pricegame.backend.encode import encode_market
from pricegame.equilibrium import breakpoints


def build_market(rng: random.Random, n: int, m: int) -> Market:
    """Random coverage-valuation market (monotone submodular by construction)."""
    buyers = []
    for _ in range(m):
        k = 4
        weights = [rng.randint(1, 6) for _ in range(k)]
        covers = [rng.randrange(1, 1 << k) for _ in range(n)]
        table = []
        for mask in range(1 << n):
            covered = 0
            mm = mask
            while mm:
                low = mm & (-mm)
                covered |= covers[low.bit_length() - 1]
                mm ^= low
            table.append(sum(w for e, w in enumerate(weights) if covered & (1 << e)))
        buyers.append(Buyer(SetFunction(n, table), "submodular"))
    return Market(n, (Fraction(0),) * n, "unlimited", tuple(buyers))


def bench_bundles(market: Market, rows: int, repeat: int):
    rng = np.random.default_rng(7)
    enc = encode_market(market, extras=[Fraction(40)])
    P = rng.integers(0, enc.scaled(Fraction(40)), size=(rows, market.n), dtype=np.int64)
    W = np.zeros((rows, market.m), dtype=np.int64)
    results = {}
    for name in ("numpy", "numba"):
        be = get_backend(name)
        args = (enc.values, enc.card, enc.keys, enc.budgets, P,
                enc.single_copy, enc.order, W, enc.lowbit, enc.bits)
        be.bundles_rows(*args)  # warm-up / JIT
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = be.bundles_rows(*args)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, out)
    assert (results["numpy"][1] == results["numba"][1]).all()
    return {k: v[0] for k, v in results.items()}


def bench_grid_filter(market: Market, repeat: int):
    axes = []
    for i in range(1, market.n + 1):
        pts = list(breakpoints(market, i))
        pts.append(pts[-1] + 1)
        axes.append(pts)
    dev = [sorted(set(p) | {(a + b) / 2 for a, b in zip(p, p[1:])}) for p in axes]
    extras = [v for pts in axes + dev for v in pts]
    enc = encode_market(market, extras=extras)
    grid_flat = np.array([enc.scaled(v) for pts in axes for v in pts], dtype=np.int64)
    grid_off = np.cumsum([0] + [len(p) for p in axes]).astype(np.int64)
    dev_flat = np.array([enc.scaled(v) for d in dev for v in d], dtype=np.int64)
    dev_off = np.cumsum([0] + [len(d) for d in dev]).astype(np.int64)
    withheld = np.zeros(market.m, dtype=np.int64)
    size = int(np.prod([len(p) for p in axes]))
    results = {}
    for name in ("numpy", "numba"):
        be = get_backend(name)
        args = (enc.values, enc.card, enc.keys, enc.budgets, enc.costs,
                enc.single_copy, enc.order, withheld,
                grid_flat, grid_off, dev_flat, dev_off, 0,
                enc.lowbit, enc.bits)
        be.grid_filter(*args)
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = be.grid_filter(*args)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, np.asarray(out, dtype=bool))
    assert (results["numpy"][1] == results["numba"][1]).all()
    return size, {k: v[0] for k, v in results.items()}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = random.Random(1234)
    print(f"{'workload':<38} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for n, m in ((3, 3), (4, 2), (6, 2)):
        market = build_market(rng, n, m)
        times = bench_bundles(market, args.rows, args.repeat)
        label = f"bundles {args.rows} rows (n={n}, m={m})"
        print(f"{label:<38} {times['numpy']*1e3:>8.2f}ms {times['numba']*1e3:>8.2f}ms"
              f" {times['numpy']/times['numba']:>8.1f}x")
    for n, m in ((3, 3), (4, 2)):
        market = build_market(rng, n, m)
        size, times = bench_grid_filter(market, args.repeat)
        label = f"grid filter {size} points (n={n}, m={m})"
        print(f"{label:<38} {times['numpy']*1e3:>8.2f}ms {times['numba']*1e3:>8.2f}ms"
              f" {times['numpy']/times['numba']:>8.1f}x")


if __name__ == "__main__":
    main()
