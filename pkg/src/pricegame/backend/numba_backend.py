"""Numba-compiled implementation of the batch kernels.

Mirrors :mod:`pricegame.backend.numpy_backend` result-for-result; the inner
best-response loop walks submasks of the available set directly, which is
where the speedup over the vectorized fallback comes from.  Compiled objects
are cached on disk, so the first call per interpreter pays the JIT cost once.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _psum_fill(p_row, lowbit, psum):
    psum[0] = 0
    for s in range(1, psum.shape[0]):
        low = s & (-s)
        psum[s] = psum[s ^ low] + p_row[lowbit[s]]


@njit(cache=True)
def _best_response(values_j, card, keys_j, budget, psum, avail):
    best_mask = 0
    best_u = np.int64(0)
    best_card = np.int64(0)
    best_key = np.int64(0)
    sub = avail
    while True:
        if sub != 0:
            c = psum[sub]
            if budget < 0 or c <= budget:
                u = values_j[sub] - c
                take = False
                if u > best_u:
                    take = True
                elif u == best_u:
                    if card[sub] > best_card:
                        take = True
                    elif card[sub] == best_card and keys_j[sub] > best_key:
                        take = True
                if take:
                    best_mask = sub
                    best_u = u
                    best_card = card[sub]
                    best_key = keys_j[sub]
        if sub == 0:
            break
        sub = (sub - 1) & avail
    return best_mask


@njit(cache=True)
def _alloc_into(values, card, keys, budgets, single_copy, order, withheld_row, psum, full, out):
    m = values.shape[0]
    if single_copy:
        avail = full
        for pos in range(m):
            j = order[pos]
            mask = _best_response(
                values[j], card, keys[j], budgets[j], psum, avail & ~withheld_row[pos]
            )
            out[j] = mask
            avail &= ~mask
    else:
        for j in range(m):
            out[j] = _best_response(values[j], card, keys[j], budgets[j], psum, full)


@njit(cache=True)
def _bundles_rows(values, card, keys, budgets, prices, single_copy, order, withheld, lowbit):
    G = prices.shape[0]
    m = values.shape[0]
    size = values.shape[1]
    full = size - 1
    out = np.zeros((G, m), dtype=np.int64)
    psum = np.zeros(size, dtype=np.int64)
    for g in range(G):
        _psum_fill(prices[g], lowbit, psum)
        _alloc_into(
            values, card, keys, budgets, single_copy, order, withheld[g], psum, full, out[g]
        )
    return out


@njit(cache=True)
def _grid_filter(values, card, keys, budgets, costs, single_copy, order,
                 withheld_static, grid_flat, grid_off, dev_flat, dev_off, eps, lowbit):
    n = costs.shape[0]
    m = values.shape[0]
    size = values.shape[1]
    full = size - 1
    sizes = np.empty(n, dtype=np.int64)
    G = 1
    for i in range(n):
        sizes[i] = grid_off[i + 1] - grid_off[i]
        G *= sizes[i]
    ok = np.zeros(G, dtype=np.bool_)
    p = np.empty(n, dtype=np.int64)
    psum = np.empty(size, dtype=np.int64)
    base = np.empty(m, dtype=np.int64)
    tmp = np.empty(m, dtype=np.int64)
    for g in range(G):
        rem = g
        for i in range(n - 1, -1, -1):
            p[i] = grid_flat[grid_off[i] + rem % sizes[i]]
            rem //= sizes[i]
        _psum_fill(p, lowbit, psum)
        _alloc_into(values, card, keys, budgets, single_copy, order, withheld_static, psum, full, base)
        good = True
        for i in range(n):
            bit = 1 << i
            cur = 0
            for j in range(m):
                if base[j] & bit:
                    cur += 1
            cur_profit = cur * (p[i] - costs[i])
            orig = p[i]
            for t in range(dev_off[i], dev_off[i + 1]):
                d = dev_flat[t]
                if d == orig:
                    continue
                p[i] = d
                _psum_fill(p, lowbit, psum)
                _alloc_into(values, card, keys, budgets, single_copy, order, withheld_static, psum, full, tmp)
                a = 0
                for j in range(m):
                    if tmp[j] & bit:
                        a += 1
                if a * (d - costs[i]) > cur_profit + eps:
                    good = False
                    break
            p[i] = orig
            if not good:
                break
        ok[g] = good
    return ok


def bundles_rows(values, card, keys, budgets, prices, single_copy, order, withheld,
                 lowbit, bits):
    return _bundles_rows(values, card, keys, budgets, prices, single_copy, order,
                         withheld, lowbit)


def grid_filter(values, card, keys, budgets, costs, single_copy, order,
                withheld_static, grid_flat, grid_off, dev_flat, dev_off, eps,
                lowbit, bits):
    return _grid_filter(values, card, keys, budgets, costs, single_copy, order,
                        withheld_static, grid_flat, grid_off, dev_flat, dev_off,
                        np.int64(eps), lowbit)
