"""Nash equilibrium verification and grid enumeration for the pricing game.

A seller's profit, as a function of its own price with everything else held
fixed, is piecewise linear: demand for the item only changes where some
buyer's comparison between a bundle containing the item and one without it
flips.  All such flip prices are differences of the form

    (v_j(S + i) - p(S)) - (v_j(T) - p(T)),   S, T excluding i,

plus budget-feasibility boundaries ``B - p(T)``.  The deviation scan collects
these candidates, evaluates the profit at each one, and compares segment
suprema (demand at a gap midpoint times the gap's right endpoint) against the
current profit, which decides "a strictly improving deviation exists" exactly
-- including suprema the tie-break never attains.  When the candidate set
would be too large the scan degrades to marginal-value breakpoints only and
says so in the verdict.

Grid enumeration restricts to the cartesian product of per-seller breakpoint
sets (plus one canonical above-everything price for unsold items), batch
filters it through an array backend, and re-verifies the survivors exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .backend import get_backend
from .backend.encode import encode_market
from .errors import GridLimitError, HypothesisError, ScaleOverflowError
from .market import (
    SINGLE_COPY,
    Allocation,
    Market,
    allocate,
    check_prices,
    is_market_clearing,
    preference_withheld_masks,
    price_of,
)
from .rationals import parse_value

DIFF_CAP = 1 << 16
DEFAULT_MAX_GRID = 10**6


@dataclass(frozen=True)
class SellerDeviation:
    """Best unilateral move found for one seller at a fixed pricing."""

    current_profit: Fraction
    best_price: Fraction
    best_profit: Fraction
    best_pref: int | None = None


@dataclass(frozen=True)
class Verdict:
    epsilon: Fraction
    is_equilibrium: bool
    market_clearing: bool
    per_seller: tuple[SellerDeviation, ...]
    allocation: Allocation
    prices: tuple[Fraction, ...]
    prefs: tuple[int, ...] | None = None
    search: str = "exhaustive"


def breakpoints(market: Market, i: int, p_rest=None) -> tuple[Fraction, ...]:
    """Candidate prices for seller ``i`` (1-based): cost, every buyer marginal
    of item ``i`` on top of any other-item subset, and, when a budgeted buyer
    is present and the other sellers' prices are supplied, every nonnegative
    budget residual."""
    if not 1 <= i <= market.n:
        raise HypothesisError(f"seller {i} outside 1..{market.n}")
    bit = 1 << (i - 1)
    others = market.full_mask & ~bit
    out = {market.costs[i - 1]}
    for buyer in market.buyers:
        values = buyer.valuation.values
        sub = others
        while True:
            out.add(values[sub | bit] - values[sub])
            if sub == 0:
                break
            sub = (sub - 1) & others
        if buyer.budget is not None and p_rest is not None:
            sub = others
            while True:
                r = buyer.budget - price_of(p_rest, sub)
                if r >= 0:
                    out.add(r)
                if sub == 0:
                    break
                sub = (sub - 1) & others
    return tuple(sorted(out))


def _deviation_candidates(market: Market, i: int, prices, diff_cap: int = DIFF_CAP):
    """Flip-price candidates for seller ``i`` given the others' prices.

    Returns ``(sorted candidates, exhaustive flag)``.  The exhaustive set adds
    every bundle-swap difference to the breakpoints; beyond ``diff_cap`` pairs
    only the breakpoints are used.
    """
    bit = 1 << (i - 1)
    others = market.full_mask & ~bit
    cands = set(breakpoints(market, i, p_rest=prices))
    cands.add(Fraction(0))
    cands.add(prices[i - 1])

    n_pairs = market.m * (1 << bin(others).count("1")) ** 2
    exhaustive = n_pairs <= diff_cap
    if exhaustive:
        other_subs = list(_submasks(others))
        for buyer in market.buyers:
            values = buyer.valuation.values
            uin = {}
            uout = {}
            for s in other_subs:
                ps = price_of(prices, s)
                uin[s] = values[s | bit] - ps
                uout[s] = values[s] - ps
            for s in other_subs:
                for t in other_subs:
                    d = uin[s] - uout[t]
                    if d >= 0:
                        cands.add(d)
    return sorted(cands), exhaustive


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


class _BundleEvaluator:
    """Batch bundle computation: scaled-int backend when it fits, Fractions
    otherwise.  Rows are (price tuple, withheld tuple) pairs."""

    def __init__(self, market: Market, extras):
        self.market = market
        try:
            self.enc = encode_market(market, extras=extras)
        except ScaleOverflowError:
            self.enc = None

    def bundles(self, rows):
        market = self.market
        if self.enc is None:
            out = []
            for prices, withheld in rows:
                out.append(allocate(market, prices, withheld=withheld).bundles)
            return out
        enc = self.enc
        P = enc.scaled_prices([r[0] for r in rows])
        W = np.zeros((len(rows), market.m), dtype=np.int64)
        for r, (_, withheld) in enumerate(rows):
            if withheld:
                W[r, :] = withheld
        res = get_backend().bundles_rows(
            enc.values, enc.card, enc.keys, enc.budgets, P,
            enc.single_copy, enc.order, W, enc.lowbit, enc.bits,
        )
        return [tuple(int(x) for x in row) for row in res]


def _alpha(bundles, i: int) -> int:
    bit = 1 << (i - 1)
    return sum(1 for b in bundles if b & bit)


def _profits_from_bundles(market: Market, prices, bundles):
    out = []
    for i in range(1, market.n + 1):
        out.append(_alpha(bundles, i) * (prices[i - 1] - market.costs[i - 1]))
    return tuple(out)


def _allocation_from_bundles(market: Market, prices, bundles) -> Allocation:
    alpha = tuple(_alpha(bundles, i) for i in range(1, market.n + 1))
    profits = tuple(
        alpha[i] * (prices[i] - market.costs[i]) for i in range(market.n)
    )
    sw = Fraction(0)
    for j, mask in enumerate(bundles):
        sw += market.buyers[j].valuation.value(mask) - market.cost_of(mask)
    return Allocation(tuple(bundles), alpha, profits, sw)


def _pref_options(market: Market, prefs, i: int):
    """Deviation branches for seller i: same-pref only, or both buyer prefs."""
    if prefs is None:
        return [None]
    return [1, 2]


def _scan(market: Market, prices, eps: Fraction, prefs, diff_cap: int):
    """Shared deviation scan; returns the full verdict."""
    prices = check_prices(market, prices)
    base_withheld = preference_withheld_masks(market, prefs) if prefs is not None else None

    per_seller_cands = []
    exhaustive = True
    extras = list(prices) + [eps]
    for i in range(1, market.n + 1):
        cands, exh = _deviation_candidates(market, i, prices, diff_cap)
        top = cands[-1] + 1
        cands = cands + [top]
        exhaustive = exhaustive and exh
        per_seller_cands.append(cands)
        extras.extend(cands)
        extras.extend((a + b) / 2 for a, b in zip(cands, cands[1:]))

    rows = [(prices, base_withheld)]
    probes = []  # (seller i, pref, kind, price-for-profit) aligned with rows[1:]
    for i in range(1, market.n + 1):
        cands = per_seller_cands[i - 1]
        for pref in _pref_options(market, prefs, i):
            if pref is None:
                withheld = base_withheld
            else:
                new_prefs = list(prefs)
                new_prefs[i - 1] = pref
                withheld = preference_withheld_masks(market, tuple(new_prefs))
            for c in cands:
                row_p = prices[: i - 1] + (c,) + prices[i:]
                rows.append((row_p, withheld))
                probes.append((i, pref, "point", c))
            for a, b in zip(cands, cands[1:]):
                mid = (a + b) / 2
                row_p = prices[: i - 1] + (mid,) + prices[i:]
                rows.append((row_p, withheld))
                probes.append((i, pref, "gap", b))

    evaluator = _BundleEvaluator(market, extras)
    bundles = evaluator.bundles(rows)

    base = bundles[0]
    base_alloc = _allocation_from_bundles(market, prices, base)
    clearing = is_market_clearing(market, prices, base_alloc)

    best = {}
    for (i, pref, kind, price), row_bundles in zip(probes, bundles[1:]):
        a = _alpha(row_bundles, i)
        if kind == "gap" and price == per_seller_cands[i - 1][-1] and a != 0:
            raise RuntimeError(
                f"demand for item {i} persists beyond every candidate price; "
                "flip-point set incomplete"
            )
        profit = a * (price - market.costs[i - 1])
        cur = best.get(i)
        cand = (profit, price, pref)
        if cur is None or profit > cur[0] or (profit == cur[0] and price < cur[1]):
            best[i] = cand

    per_seller = []
    is_eq = True
    for i in range(1, market.n + 1):
        profit, price, pref = best[i]
        dev = SellerDeviation(
            current_profit=base_alloc.profits[i - 1],
            best_price=price,
            best_profit=profit,
            best_pref=pref,
        )
        per_seller.append(dev)
        if profit > base_alloc.profits[i - 1] + eps:
            is_eq = False

    return Verdict(
        epsilon=eps,
        is_equilibrium=is_eq,
        market_clearing=clearing,
        per_seller=tuple(per_seller),
        allocation=base_alloc,
        prices=prices,
        prefs=tuple(prefs) if prefs is not None else None,
        search="exhaustive" if exhaustive else "breakpoints",
    )


def verify(market: Market, prices, eps=0, diff_cap: int = DIFF_CAP) -> Verdict:
    """Is the pricing an eps-Nash equilibrium of the seller game?

    ``is_equilibrium`` holds when no seller has a unilateral price change
    improving its profit by strictly more than ``eps``; the comparison uses
    profit suprema, so it is exact even when the improving price is an open
    endpoint the buyer tie-break never attains.
    """
    eps = parse_value(eps)
    if eps < 0:
        raise HypothesisError(f"epsilon must be nonnegative, got {eps}")
    return _scan(market, prices, eps, None, diff_cap)


def best_deviation(market: Market, i: int, prices, diff_cap: int = DIFF_CAP):
    """Most profitable candidate move for seller ``i``; ties break toward the
    lowest price.  Returns ``(price, profit)``."""
    verdict = _scan(market, prices, Fraction(0), None, diff_cap)
    dev = verdict.per_seller[i - 1]
    return dev.best_price, dev.best_profit


def verify_preference_game(market: Market, prices, prefs, eps=0,
                           diff_cap: int = DIFF_CAP) -> Verdict:
    """Equilibrium check for the game where each seller also picks which of
    the two buyers it prefers; deviations range over price candidates crossed
    with both preferences."""
    eps = parse_value(eps)
    if eps < 0:
        raise HypothesisError(f"epsilon must be nonnegative, got {eps}")
    prefs = tuple(prefs)
    preference_withheld_masks(market, prefs)  # validates shape and scope
    return _scan(market, prices, eps, prefs, diff_cap)


def _grid_axes(market: Market, max_grid: int):
    axes = []
    total = 1
    for i in range(1, market.n + 1):
        pts = list(breakpoints(market, i))
        pts.append(pts[-1] + 1)  # canonical price for an unsold item
        axes.append(pts)
        total *= len(pts)
    if total > max_grid:
        raise GridLimitError(
            f"grid of {total} points exceeds the budget of {max_grid}"
        )
    return axes, total


def _phase1_survivors(market: Market, axes, eps: Fraction, prefs):
    """Backend-filtered grid indices that no candidate-price deviation kills."""
    dev_sets = []
    for pts in axes:
        dev = sorted(set(pts) | {(a + b) / 2 for a, b in zip(pts, pts[1:])})
        dev_sets.append(dev)
    extras = [eps]
    for pts, dev in zip(axes, dev_sets):
        extras.extend(pts)
        extras.extend(dev)
    try:
        enc = encode_market(market, extras=extras)
    except ScaleOverflowError:
        return None  # caller falls back to verifying every grid point
    grid_flat = np.array(
        [enc.scaled(v) for pts in axes for v in pts], dtype=np.int64
    )
    grid_off = np.cumsum([0] + [len(p) for p in axes]).astype(np.int64)
    dev_flat = np.array(
        [enc.scaled(v) for dev in dev_sets for v in dev], dtype=np.int64
    )
    dev_off = np.cumsum([0] + [len(d) for d in dev_sets]).astype(np.int64)
    withheld = np.zeros(market.m, dtype=np.int64)
    if prefs is not None:
        withheld[:] = preference_withheld_masks(market, prefs)
    ok = get_backend().grid_filter(
        enc.values, enc.card, enc.keys, enc.budgets, enc.costs,
        enc.single_copy, enc.order, withheld,
        grid_flat, grid_off, dev_flat, dev_off, enc.scaled(eps),
        enc.lowbit, enc.bits,
    )
    return np.flatnonzero(ok)


def _grid_point(axes, flat_index: int):
    point = []
    rem = flat_index
    for pts in reversed(axes):
        rem, pos = divmod(rem, len(pts))
        point.append(pts[pos])
    return tuple(reversed(point))


def enumerate_grid_equilibria(market: Market, eps=0, max_grid: int = DEFAULT_MAX_GRID,
                              diff_cap: int = DIFF_CAP):
    """All grid pricings that verify as eps-Nash equilibria.

    The grid restricts each seller to its breakpoints plus one canonical
    above-everything price: within a region of constant demand a sold
    seller's profit rises with its price, so equilibrium prices of sold items
    sit at demand-flip points, and unsold items are canonicalized.  Flip
    points of bundle-swap form depend on the other sellers' prices and are
    not all in the static per-seller grid, so enumeration is complete for
    market-clearing equilibria (always priced at smallest marginals) but may
    miss non-clearing equilibria pinned at cross-coupled swap prices; every
    returned pricing, however, is verified exactly.  Returns
    ``[(prices, Verdict)]`` in lexicographic grid order.
    """
    eps = parse_value(eps)
    if eps < 0:
        raise HypothesisError(f"epsilon must be nonnegative, got {eps}")
    axes, total = _grid_axes(market, max_grid)
    survivors = _phase1_survivors(market, axes, eps, None)
    if survivors is None:
        survivors = range(total)
    out = []
    for flat in survivors:
        prices = _grid_point(axes, int(flat))
        verdict = verify(market, prices, eps, diff_cap)
        if verdict.is_equilibrium:
            out.append((prices, verdict))
    return out


def enumerate_preference_equilibria(market: Market, eps=0,
                                    max_grid: int = DEFAULT_MAX_GRID,
                                    diff_cap: int = DIFF_CAP):
    """Grid sweep of the price-and-preference game: every (pricing, prefs)
    state that verifies.  Returns ``[(prices, prefs, Verdict)]``."""
    eps = parse_value(eps)
    if eps < 0:
        raise HypothesisError(f"epsilon must be nonnegative, got {eps}")
    if market.supply != SINGLE_COPY or market.m != 2:
        raise HypothesisError("preference game needs single-copy supply and two buyers")
    axes, total = _grid_axes(market, max_grid)
    out = []
    for prefs in itertools.product((1, 2), repeat=market.n):
        survivors = _phase1_survivors(market, axes, eps, prefs)
        if survivors is None:
            survivors = range(total)
        for flat in survivors:
            prices = _grid_point(axes, int(flat))
            verdict = verify_preference_game(market, prices, prefs, eps, diff_cap)
            if verdict.is_equilibrium:
                out.append((prices, prefs, verdict))
    return out
