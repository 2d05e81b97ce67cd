"""Rescaling exact rationals to int64 arrays for the kernels.

All values, costs, budgets, and every price a computation will touch share
one common denominator; multiplying through by twice that denominator maps
the whole computation onto integers (the extra factor two keeps midpoints of
consecutive candidate prices integral).  Arithmetic then stays exact as long
as magnitudes fit comfortably in int64; ``encode_market`` refuses instances
that would not, and callers fall back to the pure-Fraction path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm

import numpy as np

from ..errors import ScaleOverflowError
from ..market import SINGLE_COPY, Market, priority_key

_INT64_SAFE = 1 << 62


@lru_cache(maxsize=None)
def subset_tables(n: int):
    """Static per-n tables: cardinality, lowest-bit index, and bit matrix."""
    size = 1 << n
    card = np.zeros(size, dtype=np.int64)
    lowbit = np.zeros(size, dtype=np.int64)
    bits = np.zeros((size, n), dtype=np.int64)
    for s in range(1, size):
        card[s] = bin(s).count("1")
        lowbit[s] = (s & -s).bit_length() - 1
        for b in range(n):
            if s & (1 << b):
                bits[s, b] = 1
    card.setflags(write=False)
    lowbit.setflags(write=False)
    bits.setflags(write=False)
    return card, lowbit, bits


@dataclass
class EncodedMarket:
    n: int
    m: int
    scale: int
    values: np.ndarray   # (m, 2^n) int64
    keys: np.ndarray     # (m, 2^n) int64, priority tie-break key per subset
    budgets: np.ndarray  # (m,) int64, -1 when absent
    costs: np.ndarray    # (n,) int64
    single_copy: bool
    order: np.ndarray    # (m,) int64, 0-based arrival sequence
    card: np.ndarray
    lowbit: np.ndarray
    bits: np.ndarray

    def scaled(self, v: Fraction) -> int:
        num = v.numerator * self.scale
        if num % v.denominator:
            raise ScaleOverflowError(
                f"value {v} not representable at scale {self.scale}"
            )
        return num // v.denominator

    def scaled_prices(self, rows) -> np.ndarray:
        out = np.empty((len(rows), self.n), dtype=np.int64)
        for r, row in enumerate(rows):
            for i, p in enumerate(row):
                out[r, i] = self.scaled(p)
        return out

    def unscaled(self, x: int) -> Fraction:
        return Fraction(int(x), self.scale)


def encode_market(market: Market, extras=()) -> EncodedMarket:
    """Encode a market, sizing the scale to also cover ``extras`` exactly."""
    n, m = market.n, market.m
    denom = 2
    fracs = []
    for b in market.buyers:
        fracs.extend(b.valuation.values)
        if b.budget is not None:
            fracs.append(b.budget)
    fracs.extend(market.costs)
    for v in fracs:
        denom = lcm(denom, 2 * v.denominator)
    extras = list(extras)
    for v in extras:
        denom = lcm(denom, 2 * v.denominator)

    max_abs = 1
    for v in fracs + extras:
        scaled = abs(v.numerator) * (denom // v.denominator)
        if scaled > max_abs:
            max_abs = scaled
    # Utilities sum at most n+2 scaled terms; profits multiply by at most m.
    if max_abs * (n + 2) * max(m, 2) >= _INT64_SAFE:
        raise ScaleOverflowError(
            f"scale {denom} with magnitude {max_abs} exceeds the int64 fast path"
        )

    card, lowbit, bits = subset_tables(n)
    size = 1 << n
    values = np.zeros((m, size), dtype=np.int64)
    keys = np.zeros((m, size), dtype=np.int64)
    budgets = np.full(m, -1, dtype=np.int64)
    for j, b in enumerate(market.buyers):
        table = b.valuation.values
        for s in range(size):
            v = table[s]
            values[j, s] = v.numerator * (denom // v.denominator)
            keys[j, s] = priority_key(s, b.ranks, n)
        if b.budget is not None:
            budgets[j] = b.budget.numerator * (denom // b.budget.denominator)
    costs = np.array(
        [c.numerator * (denom // c.denominator) for c in market.costs],
        dtype=np.int64,
    )
    order = np.array([b - 1 for b in market.arrival_order], dtype=np.int64)
    return EncodedMarket(
        n=n,
        m=m,
        scale=denom,
        values=values,
        keys=keys,
        budgets=budgets,
        costs=costs,
        single_copy=market.supply == SINGLE_COPY,
        order=order,
        card=card,
        lowbit=lowbit,
        bits=bits,
    )
