"""Closed-form existence and uniqueness conditions for market-clearing
equilibria in the one-copy-per-buyer supply regime, plus the reduction that
trades production costs for an extra additive buyer in single-copy markets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import HypothesisError
from .market import SINGLE_COPY, UNLIMITED, Buyer, Market
from .setfn import SetFunction


@dataclass(frozen=True)
class ItemCheck:
    """One inequality of the per-item condition family."""

    label: str
    lhs: Fraction
    rhs: Fraction
    ok: bool
    strict: bool


@dataclass(frozen=True)
class ItemCondition:
    item: int
    order: tuple[int, ...]          # buyers sorted by marginal, smallest first
    marginals: tuple[Fraction, ...]  # per buyer, original buyer order
    checks: tuple[ItemCheck, ...]
    ok: bool
    strict: bool


@dataclass(frozen=True)
class ConditionReport:
    per_item: tuple[ItemCondition, ...]
    ok: bool
    strict: bool


def top_marginals(market: Market, i: int) -> tuple[Fraction, ...]:
    """Each buyer's marginal for item i on top of all other items."""
    return tuple(b.valuation.top_marginal(i) for b in market.buyers)


def mc_condition(market: Market) -> ConditionReport:
    """Necessary-and-sufficient test for a market-clearing pure equilibrium
    with m buyers and m copies per item.

    Per item, with buyers ordered by non-decreasing marginal, the j-th
    marginal net of cost may exceed the smallest by at most a factor of
    m/(m-j+1), and the smallest marginal must cover the cost.
    """
    if market.supply != UNLIMITED:
        raise HypothesisError("the market-clearing condition needs unlimited supply")
    m = market.m
    items = []
    overall = True
    overall_strict = True
    for i in range(1, market.n + 1):
        c = market.costs[i - 1]
        marg = top_marginals(market, i)
        order = tuple(sorted(range(1, m + 1), key=lambda j: marg[j - 1]))
        lo = marg[order[0] - 1]
        checks = [
            ItemCheck(
                label="min marginal covers cost",
                lhs=c,
                rhs=lo,
                ok=lo >= c,
                strict=lo > c,
            )
        ]
        for pos, j in enumerate(order, start=1):
            bound = Fraction(m, m - pos + 1) * (lo - c)
            gap = marg[j - 1] - c
            checks.append(
                ItemCheck(
                    label=f"buyer {j} marginal within factor {m}/{m - pos + 1}",
                    lhs=gap,
                    rhs=bound,
                    ok=gap <= bound,
                    strict=pos == 1 or gap < bound,
                )
            )
        ok = all(ch.ok for ch in checks)
        strict = all(ch.strict for ch in checks)
        items.append(ItemCondition(i, order, marg, tuple(checks), ok, strict))
        overall = overall and ok
        overall_strict = overall_strict and strict
    return ConditionReport(tuple(items), overall, overall_strict)


def unique_mc_pricing(market: Market) -> tuple[Fraction, ...]:
    """The one market-clearing equilibrium pricing: each item at its smallest
    buyer marginal.  Raises when the existence condition fails."""
    report = mc_condition(market)
    if not report.ok:
        bad = [ic.item for ic in report.per_item if not ic.ok]
        raise HypothesisError(
            f"no market-clearing pure equilibrium exists (items {bad} fail)"
        )
    return tuple(min(ic.marginals) for ic in report.per_item)


@dataclass(frozen=True)
class UniquenessReport:
    applies: bool
    non_additive_buyers: tuple[int, ...]
    report: ConditionReport


def uniqueness_condition(market: Market) -> UniquenessReport:
    """Sufficient condition for the grid game to have exactly one pure
    equilibrium (necessarily market clearing): at most one buyer is
    non-additive and the clearing condition holds strictly."""
    if market.supply != UNLIMITED:
        raise HypothesisError("the uniqueness condition needs unlimited supply")
    non_additive = tuple(
        j
        for j, b in enumerate(market.buyers, start=1)
        if not b.valuation.classify().additive
    )
    report = mc_condition(market)
    applies = len(non_additive) <= 1 and report.strict
    return UniquenessReport(applies, non_additive, report)


def eliminate_costs(market: Market) -> Market:
    """Zero-cost single-copy twin: append one additive buyer, last in the
    arrival order, valuing each item at its production cost.

    Under the convention that an unsold item is priced at its cost, the twin
    has the same equilibria; each seller's profit shifts by the constant cost
    of its item.
    """
    if market.supply != SINGLE_COPY:
        raise HypothesisError("cost elimination applies to single-copy supply")
    cost_buyer = Buyer(
        valuation=SetFunction.additive(market.costs),
        declared_class="additive",
    )
    return Market(
        n=market.n,
        costs=(Fraction(0),) * market.n,
        supply=SINGLE_COPY,
        buyers=market.buyers + (cost_buyer,),
        arrival_order=market.arrival_order + (market.m + 1,),
    )
