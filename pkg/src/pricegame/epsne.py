"""Constructive eps-equilibria for single-copy markets with one submodular
buyer, served first, ahead of additive buyers.

Prices start at the best outside offer (the largest additive-buyer value per
item) and rise in steps of exactly eps while the raising seller's item stays
sold.  Each committed raise is checked for collateral damage: if any other
item drops out of the allocation the buyer's choice map was not up-consistent
for this instance and the run aborts loudly with its trace instead of
returning a bogus pricing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from .backend import get_backend
from .backend.encode import encode_market
from .characterize import eliminate_costs
from .equilibrium import Verdict, verify
from .errors import HypothesisError, ScaleOverflowError, UpConsistencyError
from .market import SINGLE_COPY, Market, allocate
from .rationals import parse_value


@dataclass(frozen=True)
class AscentTrace:
    initial: tuple[Fraction, ...]
    raises: tuple[tuple[int, Fraction, Fraction], ...]  # (seller, old, new)
    final: tuple[Fraction, ...]
    termination: str


def _check_hypothesis(market: Market):
    if market.supply != SINGLE_COPY:
        raise HypothesisError("the ascent needs single-copy supply")
    first = market.arrival_order[0]
    flags = [b.valuation.classify() for b in market.buyers]
    if not flags[first - 1].submodular or not flags[first - 1].monotone:
        raise HypothesisError(
            f"buyer {first} (first arrival) must be monotone submodular"
        )
    for pos, bnum in enumerate(market.arrival_order[1:], start=2):
        if not flags[bnum - 1].additive:
            raise HypothesisError(
                f"buyer {bnum} at arrival position {pos} must be additive; "
                "only the first buyer may be non-additive"
            )
    for b in market.buyers:
        if b.budget is not None:
            raise HypothesisError("the ascent does not support budgets")
    return first


class _SoldProbe:
    """Union-of-bundles for batches of price rows, on the fast path when the
    instance fits the int64 encoding."""

    def __init__(self, market: Market, extras):
        self.market = market
        try:
            self.enc = encode_market(market, extras=extras)
        except ScaleOverflowError:
            self.enc = None

    def sold(self, price_rows) -> list[int]:
        if self.enc is None:
            out = []
            for prices in price_rows:
                union = 0
                for b in allocate(self.market, prices).bundles:
                    union |= b
                out.append(union)
            return out
        enc = self.enc
        P = enc.scaled_prices(price_rows)
        W = np.zeros((len(price_rows), self.market.m), dtype=np.int64)
        res = get_backend().bundles_rows(
            enc.values, enc.card, enc.keys, enc.budgets, P,
            enc.single_copy, enc.order, W, enc.lowbit, enc.bits,
        )
        return [int(np.bitwise_or.reduce(row)) for row in res]


def construct_eps_ne(market: Market, eps) -> tuple[tuple[Fraction, ...], AscentTrace]:
    """Run the price ascent; returns the final pricing and its trace.

    The result is re-verified before returning: it must be an eps-equilibrium
    and market clearing, else the run errors out.  Requires zero costs; for
    markets with costs use :func:`with_costs`.
    """
    eps = parse_value(eps)
    if eps <= 0:
        raise HypothesisError(f"epsilon must be positive, got {eps}")
    first = _check_hypothesis(market)
    if not market.zero_costs():
        raise HypothesisError("costs present; use with_costs")

    n = market.n
    others = [j for j in range(1, market.m + 1) if j != first]
    initial = tuple(
        max((market.buyers[j - 1].valuation.top_marginal(i) for j in others),
            default=Fraction(0))
        for i in range(1, n + 1)
    )
    prices = list(initial)
    raises: list[tuple[int, Fraction, Fraction]] = []

    v_first = market.buyers[first - 1].valuation
    singles = [v_first.value(1 << (i - 1)) for i in range(1, n + 1)]
    probe = _SoldProbe(
        market, extras=list(initial) + singles + [eps, max(singles) + eps]
    )

    sold = probe.sold([tuple(prices)])[0]
    if sold != market.full_mask:
        raise UpConsistencyError(
            f"initial outside-offer pricing leaves items "
            f"{bin(market.full_mask & ~sold)} unsold",
            AscentTrace(initial, tuple(raises), tuple(prices), "aborted"),
        )

    cap = n
    for i in range(1, n + 1):
        room = singles[i - 1] - initial[i - 1]
        if room > 0:
            cap += ceil(room / eps) + 1
    steps = 0
    while True:
        trials = []
        for i in range(1, n + 1):
            row = list(prices)
            row[i - 1] += eps
            trials.append(tuple(row))
        unions = probe.sold(trials)
        raised = False
        for i in range(1, n + 1):
            new_sold = unions[i - 1]
            if not new_sold & (1 << (i - 1)):
                continue
            if new_sold != market.full_mask:
                raises.append((i, prices[i - 1], prices[i - 1] + eps))
                raise UpConsistencyError(
                    f"raising seller {i} to {prices[i - 1] + eps} knocked items "
                    f"{bin(market.full_mask & ~new_sold)} out of the allocation; "
                    "the buyer choice map is not up-consistent here",
                    AscentTrace(initial, tuple(raises), trials[i - 1], "aborted"),
                )
            raises.append((i, prices[i - 1], prices[i - 1] + eps))
            prices = list(trials[i - 1])
            raised = True
            break
        if not raised:
            break
        steps += 1
        if steps > cap:
            raise RuntimeError(
                f"ascent exceeded its termination bound of {cap} raises"
            )

    final = tuple(prices)
    trace = AscentTrace(initial, tuple(raises), final, "no seller can raise")
    verdict = verify(market, final, eps)
    if not verdict.is_equilibrium or not verdict.market_clearing:
        raise UpConsistencyError(
            "ascent finished but its pricing failed re-verification "
            f"(equilibrium={verdict.is_equilibrium}, "
            f"clearing={verdict.market_clearing})",
            trace,
        )
    return final, trace


def with_costs(market: Market, eps) -> tuple[tuple[Fraction, ...], AscentTrace, Verdict]:
    """Ascent for markets with production costs, via the zero-cost twin.

    The twin's extra buyer absorbs items nobody real wants, so the returned
    pricing need not clear the original market; the returned verdict reports
    the original market's view of it.
    """
    _check_hypothesis(market)
    twin = eliminate_costs(market)
    prices, trace = construct_eps_ne(twin, eps)
    return prices, trace, verify(market, prices, parse_value(eps))
