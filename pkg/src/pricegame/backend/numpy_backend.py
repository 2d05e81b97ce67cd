"""Vectorized numpy implementation of the batch kernels.

Same contract as :mod:`pricegame.backend.numba_backend`: given scaled-int64
arrays, compute buyer bundles for many price rows at once, and filter price
grids down to deviation-proof candidates.  Kept free of per-subset Python
loops; rows are processed as whole arrays.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

_NEG = -(1 << 62)


def _choose(util, valid, card, keys):
    """Row-wise argmax of (utility, cardinality, priority key) over subsets."""
    u = np.where(valid, util, _NEG)
    best_u = u.max(axis=1, keepdims=True)
    tie1 = u == best_u
    c = np.where(tie1, card[None, :], -1)
    best_c = c.max(axis=1, keepdims=True)
    tie2 = c == best_c
    k = np.where(tie2, keys[None, :], -1)
    return k.argmax(axis=1)


def bundles_rows(values, card, keys, budgets, prices, single_copy, order, withheld,
                 lowbit, bits):
    """Chosen bundle mask per (price row, buyer).

    ``withheld[g, pos]`` hides items from the buyer at arrival position
    ``pos`` (single-copy only).  Returns int64 ``(G, m)``.
    """
    G = prices.shape[0]
    m = values.shape[0]
    size = values.shape[1]
    full = size - 1
    masks = np.arange(size, dtype=np.int64)
    psum = prices @ bits.T  # (G, 2^n)
    out = np.zeros((G, m), dtype=np.int64)
    if not single_copy:
        for j in range(m):
            util = values[j][None, :] - psum
            valid = np.ones((G, size), dtype=bool)
            if budgets[j] >= 0:
                valid &= psum <= budgets[j]
            out[:, j] = _choose(util, valid, card, keys[j])
        return out
    avail = np.full(G, full, dtype=np.int64)
    for pos in range(m):
        j = int(order[pos])
        allowed = avail & ~withheld[:, pos]
        valid = (masks[None, :] & ~allowed[:, None]) == 0
        if budgets[j] >= 0:
            valid &= psum <= budgets[j]
        util = values[j][None, :] - psum
        chosen = _choose(util, valid, card, keys[j])
        out[:, j] = chosen
        avail &= ~chosen
    return out


def _alpha_for(bundles, item):
    return ((bundles >> item) & 1).sum(axis=1)


def grid_filter(values, card, keys, budgets, costs, single_copy, order,
                withheld_static, grid_flat, grid_off, dev_flat, dev_off, eps,
                lowbit, bits):
    """Deviation-proof filter over the full price grid.

    The grid is the cartesian product of the per-seller candidate lists in
    ``grid_flat``/``grid_off`` (C order, last seller fastest).  A point
    survives when no seller can strictly beat its current profit plus ``eps``
    by switching to any deviation candidate in ``dev_flat``/``dev_off``.
    Survivors may still hide off-candidate deviations; callers re-verify them
    exactly.
    """
    n = costs.shape[0]
    m = values.shape[0]
    grids = [grid_flat[grid_off[i]:grid_off[i + 1]] for i in range(n)]
    mesh = np.meshgrid(*grids, indexing="ij")
    P = np.stack([g.reshape(-1) for g in mesh], axis=1).astype(np.int64)
    G = P.shape[0]
    withheld = np.broadcast_to(withheld_static[None, :], (G, m)).copy()

    base = bundles_rows(values, card, keys, budgets, P, single_copy, order, withheld,
                        lowbit, bits)
    ok = np.ones(G, dtype=bool)
    for i in range(n):
        cur_profit = _alpha_for(base, i) * (P[:, i] - costs[i])
        cands = dev_flat[dev_off[i]:dev_off[i + 1]]
        k = len(cands)
        if k == 0:
            continue
        P_dev = np.repeat(P, k, axis=0)
        P_dev[:, i] = np.tile(cands, G)
        w_dev = np.repeat(withheld, k, axis=0)
        dev_bundles = bundles_rows(
            values, card, keys, budgets, P_dev, single_copy, order, w_dev, lowbit, bits
        )
        alpha = _alpha_for(dev_bundles, i).reshape(G, k)
        profits = alpha * (P_dev[:, i].reshape(G, k) - costs[i])
        ok &= profits.max(axis=1) <= cur_profit + eps
    return ok
