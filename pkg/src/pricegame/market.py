"""Market instances, buyer best responses, and allocation semantics.

Two supply regimes are supported:

* ``unlimited`` -- every seller holds one copy per buyer, so buyers pick their
  bundles independently;
* ``single_copy`` -- one copy per seller, buyers served sequentially in a
  fixed arrival order, each choosing from what is left.

A buyer picks a utility-maximizing bundle; ties go first to the larger bundle
and then to the lexicographically best bundle under the buyer's item priority.
The functions here are the exact, pure-Python reference path; the array
backends in :mod:`pricegame.backend` must agree with them bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import HypothesisError, ValidationError
from .rationals import parse_value
from .setfn import SetFunction, items_of, popcount

UNLIMITED = "unlimited"
SINGLE_COPY = "single_copy"


def priority_key(mask: int, ranks: tuple[int, ...], n: int) -> int:
    """Bigger is better: favors bundles containing higher-priority items."""
    key = 0
    m = mask
    while m:
        low = m & (-m)
        key |= 1 << (n - 1 - ranks[low.bit_length() - 1])
        m ^= low
    return key


@dataclass(frozen=True)
class Buyer:
    """One buyer: valuation, declared class, tie priority, optional budget.

    ``tie_priority`` lists items from most to least preferred and resolves
    equal-size utility ties; it defaults to ascending item number.  Budgets
    are only supported for additive valuations.
    """

    valuation: SetFunction
    declared_class: str = "general"
    tie_priority: tuple[int, ...] = ()
    budget: Fraction | None = None

    def __post_init__(self):
        n = self.valuation.n
        prio = tuple(self.tie_priority) or tuple(range(1, n + 1))
        if sorted(prio) != list(range(1, n + 1)):
            raise ValidationError(f"tie priority {prio} is not a permutation of 1..{n}")
        object.__setattr__(self, "tie_priority", prio)
        ranks = [0] * n
        for pos, item in enumerate(prio):
            ranks[item - 1] = pos
        object.__setattr__(self, "_ranks", tuple(ranks))
        if self.declared_class not in ("additive", "submodular", "general"):
            raise ValidationError(f"unknown buyer class {self.declared_class!r}")
        if self.budget is not None:
            budget = parse_value(self.budget)
            if budget < 0:
                raise ValidationError(f"negative budget {budget}")
            object.__setattr__(self, "budget", budget)

    @property
    def ranks(self) -> tuple[int, ...]:
        return self._ranks  # type: ignore[attr-defined]


@dataclass(frozen=True)
class Market:
    """Sellers with costs and a supply regime, plus the buyers."""

    n: int
    costs: tuple[Fraction, ...]
    supply: str
    buyers: tuple[Buyer, ...]
    arrival_order: tuple[int, ...] = ()

    def __post_init__(self):
        costs = tuple(parse_value(c) for c in self.costs)
        if len(costs) != self.n:
            raise ValidationError(f"expected {self.n} costs, got {len(costs)}")
        if any(c < 0 for c in costs):
            raise ValidationError("costs must be nonnegative")
        object.__setattr__(self, "costs", costs)
        if self.supply not in (UNLIMITED, SINGLE_COPY):
            raise ValidationError(f"unknown supply mode {self.supply!r}")
        buyers = tuple(self.buyers)
        if not buyers:
            raise ValidationError("at least one buyer required")
        for b in buyers:
            if b.valuation.n != self.n:
                raise ValidationError(
                    f"buyer ground set {b.valuation.n} does not match n={self.n}"
                )
        object.__setattr__(self, "buyers", buyers)
        m = len(buyers)
        if self.supply == SINGLE_COPY:
            order = tuple(self.arrival_order) or tuple(range(1, m + 1))
            if sorted(order) != list(range(1, m + 1)):
                raise ValidationError(
                    f"arrival order {order} is not a permutation of 1..{m}"
                )
        else:
            if self.arrival_order:
                raise ValidationError("arrival order only applies to single-copy supply")
            order = tuple(range(1, m + 1))
        object.__setattr__(self, "arrival_order", order)

    @property
    def m(self) -> int:
        return len(self.buyers)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def cost_of(self, mask: int) -> Fraction:
        total = Fraction(0)
        m = mask
        while m:
            low = m & (-m)
            total += self.costs[low.bit_length() - 1]
            m ^= low
        return total

    def zero_costs(self) -> bool:
        return all(c == 0 for c in self.costs)


def check_prices(market: Market, prices) -> tuple[Fraction, ...]:
    prices = tuple(parse_value(p) for p in prices)
    if len(prices) != market.n:
        raise ValidationError(f"expected {market.n} prices, got {len(prices)}")
    if any(p < 0 for p in prices):
        raise ValidationError("prices must be nonnegative")
    return prices


def price_of(prices, mask: int) -> Fraction:
    total = Fraction(0)
    m = mask
    while m:
        low = m & (-m)
        total += prices[low.bit_length() - 1]
        m ^= low
    return total


def best_response(buyer: Buyer, available: int, prices) -> int:
    """Utility-maximizing bundle out of ``available`` at the given prices.

    Ties break toward the larger bundle, then toward the bundle whose
    membership is best under the buyer's tie priority.  With a budget, only
    bundles whose total price stays within it compete (additive buyers only).
    """
    n = buyer.valuation.n
    if available < 0 or available > (1 << n) - 1:
        raise ValidationError(f"available mask {available} outside ground set of {n}")
    if buyer.budget is not None and buyer.declared_class != "additive":
        raise HypothesisError("budgets are only supported for additive valuations")

    values = buyer.valuation.values
    ranks = buyer.ranks
    budget = buyer.budget

    best_mask = 0
    best_u = Fraction(0)
    best_card = 0
    best_key = 0
    sub = available
    while True:
        if sub:
            cost = price_of(prices, sub)
            if budget is None or cost <= budget:
                u = values[sub] - cost
                if u >= best_u:
                    card = popcount(sub)
                    key = priority_key(sub, ranks, n)
                    if (u, card, key) > (best_u, best_card, best_key):
                        best_mask, best_u, best_card, best_key = sub, u, card, key
        if sub == 0:
            break
        sub = (sub - 1) & available
    return best_mask


@dataclass(frozen=True)
class Allocation:
    """Bundles per buyer plus the derived per-seller tallies."""

    bundles: tuple[int, ...]
    alpha: tuple[int, ...]
    profits: tuple[Fraction, ...]
    social_welfare: Fraction

    def bundle_items(self) -> tuple[tuple[int, ...], ...]:
        return tuple(items_of(b) for b in self.bundles)


def _finish_allocation(market: Market, prices, bundles) -> Allocation:
    alpha = [0] * market.n
    for mask in bundles:
        m = mask
        while m:
            low = m & (-m)
            alpha[low.bit_length() - 1] += 1
            m ^= low
    profits = tuple(
        alpha[i] * (prices[i] - market.costs[i]) for i in range(market.n)
    )
    sw = Fraction(0)
    for j, mask in enumerate(bundles):
        sw += market.buyers[j].valuation.value(mask) - market.cost_of(mask)
    return Allocation(tuple(bundles), tuple(alpha), profits, sw)


def allocate(market: Market, prices, withheld: tuple[int, ...] | None = None) -> Allocation:
    """Allocation induced by a pricing.

    ``withheld`` is only meaningful for single-copy supply: entry ``k`` masks
    the items hidden from the buyer at arrival position ``k`` (used by the
    game where sellers also pick a preferred buyer).
    """
    prices = check_prices(market, prices)
    bundles = [0] * market.m
    if market.supply == UNLIMITED:
        for j, buyer in enumerate(market.buyers):
            bundles[j] = best_response(buyer, market.full_mask, prices)
    else:
        avail = market.full_mask
        for pos, bnum in enumerate(market.arrival_order):
            j = bnum - 1
            hidden = withheld[pos] if withheld else 0
            chosen = best_response(market.buyers[j], avail & ~hidden, prices)
            bundles[j] = chosen
            avail &= ~chosen
    return _finish_allocation(market, prices, bundles)


def is_market_clearing(market: Market, prices, allocation: Allocation | None = None) -> bool:
    """Every copy sold: all buyers take everything (unlimited) or the bundles
    cover the ground set (single copy)."""
    if allocation is None:
        allocation = allocate(market, prices)
    if market.supply == UNLIMITED:
        return all(b == market.full_mask for b in allocation.bundles)
    union = 0
    for b in allocation.bundles:
        union |= b
    return union == market.full_mask


def preference_withheld_masks(market: Market, prefs: tuple[int, ...]) -> tuple[int, ...]:
    """Per-arrival-position hidden-item masks for seller buyer preferences.

    ``prefs[i]`` is the 1-based buyer number seller ``i+1`` prefers.  A seller
    preferring the later buyer withholds its item from the earlier one.  Only
    defined for two buyers.
    """
    if market.supply != SINGLE_COPY or market.m != 2:
        raise HypothesisError("seller preferences need single-copy supply and two buyers")
    if len(prefs) != market.n or any(p not in (1, 2) for p in prefs):
        raise ValidationError(f"prefs must give a buyer (1 or 2) per seller, got {prefs}")
    first = market.arrival_order[0]
    hidden_first = 0
    for i, p in enumerate(prefs):
        if p != first:
            hidden_first |= 1 << i
    return (hidden_first, 0)
