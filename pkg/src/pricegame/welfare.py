"""Social welfare, the allocative optimum, price of anarchy/stability, and
the harmonic-number welfare audit for zero-cost unlimited-supply markets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import inf

from .errors import GridLimitError, HypothesisError
from .market import UNLIMITED, Market, allocate, check_prices
from .equilibrium import verify

DEFAULT_MAX_STATES = 10**6


def harmonic(m: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, m + 1)), Fraction(0))


def social_welfare(market: Market, prices) -> Fraction:
    """Total buyer value minus production cost of the induced allocation."""
    return allocate(market, prices).social_welfare


def opt_welfare(market: Market, max_states: int = DEFAULT_MAX_STATES) -> Fraction:
    """Best achievable welfare over all allocations.

    Unlimited supply decomposes per buyer; the single-copy optimum assigns
    each item to one buyer or to nobody, enumerated exhaustively (budgets do
    not constrain the allocative optimum).
    """
    if market.supply == UNLIMITED:
        total = Fraction(0)
        for buyer in market.buyers:
            best = Fraction(0)
            for mask in range(1 << market.n):
                u = buyer.valuation.value(mask) - market.cost_of(mask)
                if u > best:
                    best = u
            total += best
        return total
    states = (market.m + 1) ** market.n
    if states > max_states:
        raise GridLimitError(
            f"{states} assignments exceed the budget of {max_states}"
        )
    best = Fraction(0)
    for assign in itertools.product(range(market.m + 1), repeat=market.n):
        bundles = [0] * market.m
        cost = Fraction(0)
        for i, owner in enumerate(assign):
            if owner:
                bundles[owner - 1] |= 1 << i
                cost += market.costs[i]
        sw = (
            sum(
                (market.buyers[j].valuation.value(bundles[j]) for j in range(market.m)),
                Fraction(0),
            )
            - cost
        )
        if sw > best:
            best = sw
    return best


@dataclass(frozen=True)
class PoaPos:
    """OPT over worst / best equilibrium welfare; None when no equilibria were
    supplied, infinity when some equilibrium has zero welfare but OPT > 0."""

    opt: Fraction
    poa: object = None  # Fraction | float("inf") | None
    pos: object = None


def poa_pos(market: Market, equilibria) -> PoaPos:
    """Anarchy/stability ratios over an explicit list of equilibria.

    ``equilibria`` is a list of price vectors or of ``(prices, verdict)``
    pairs as produced by the grid enumeration.
    """
    opt = opt_welfare(market)
    cleaned = []
    for e in equilibria:
        if isinstance(e, tuple) and len(e) == 2 and hasattr(e[1], "is_equilibrium"):
            cleaned.append(e[0])
        else:
            cleaned.append(tuple(e))
    if not cleaned:
        return PoaPos(opt=opt)
    welfares = [social_welfare(market, p) for p in cleaned]
    lo, hi = min(welfares), max(welfares)

    def ratio(sw):
        if sw == 0:
            return inf if opt > 0 else Fraction(0)
        return opt / sw

    return PoaPos(opt=opt, poa=ratio(lo), pos=ratio(hi))


@dataclass(frozen=True)
class WelfareAudit:
    """Accounting behind the harmonic welfare bound at an equilibrium.

    ``buy_count[i]`` is how many buyers take item i+1; ``rank[j][i]`` counts
    buyers whose marginal for item i+1 (on top of their own bundle minus the
    item) weakly exceeds buyer j+1's.  The bound says the total value of the
    whole ground set is at most H_m times the realized total value.
    """

    buy_count: tuple[int, ...]
    rank: tuple[tuple[int, ...], ...]
    lhs: Fraction
    rhs: Fraction
    h_m: Fraction
    realized: Fraction
    holds: bool


def hm_bound_audit(market: Market, prices, check_equilibrium: bool = True) -> WelfareAudit:
    """Audit the harmonic welfare bound at a pure-equilibrium pricing of a
    zero-cost unlimited-supply market."""
    if market.supply != UNLIMITED:
        raise HypothesisError("the harmonic bound applies to unlimited supply")
    if not market.zero_costs():
        raise HypothesisError("the harmonic bound is proved for zero production costs")
    prices = check_prices(market, prices)
    if check_equilibrium:
        verdict = verify(market, prices, 0)
        if not verdict.is_equilibrium:
            raise HypothesisError("pricing is not a pure equilibrium; audit undefined")

    alloc = allocate(market, prices)
    m = market.m
    buy = list(alloc.alpha)
    marg = [[Fraction(0)] * market.n for _ in range(m)]
    for j, buyer in enumerate(market.buyers):
        bundle = alloc.bundles[j]
        for i in range(market.n):
            marg[j][i] = buyer.valuation.marginal(i + 1, bundle & ~(1 << i))
    rank = [
        tuple(
            sum(1 for jp in range(m) if marg[jp][i] >= marg[j][i])
            for i in range(market.n)
        )
        for j in range(m)
    ]
    full = market.full_mask
    lhs = sum((b.valuation.value(full) for b in market.buyers), Fraction(0))
    realized = sum(
        (market.buyers[j].valuation.value(alloc.bundles[j]) for j in range(m)),
        Fraction(0),
    )
    h_m = harmonic(m)
    rhs = h_m * realized
    return WelfareAudit(
        buy_count=tuple(buy),
        rank=tuple(rank),
        lhs=lhs,
        rhs=rhs,
        h_m=h_m,
        realized=realized,
        holds=lhs <= rhs,
    )
