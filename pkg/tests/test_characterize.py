import random
from fractions import Fraction

import pytest

from pricegame import (
    Buyer,
    HypothesisError,
    Market,
    SetFunction,
    allocate,
    eliminate_costs,
    enumerate_grid_equilibria,
    mc_condition,
    unique_mc_pricing,
    uniqueness_condition,
    verify,
)
from pricegame.characterize import top_marginals

from genmarkets import additive_valuation, coverage_valuation, random_single_copy


def test_condition_fails_on_wide_marginal_gap(load):
    market = load("two_copy_wide_gap.json")
    report = mc_condition(market)
    assert not report.ok
    item1 = report.per_item[0]
    assert not item1.ok
    assert item1.marginals == (10, 70)  # submodular buyer 10, additive buyer 70
    failing = [ch for ch in item1.checks if not ch.ok]
    assert any(ch.lhs == 70 and ch.rhs == 20 for ch in failing)


def test_condition_passes_both_submodular(load):
    market = load("two_copy_both_submodular.json")
    report = mc_condition(market)
    assert report.ok
    assert top_marginals(market, 1) == (9, 5)
    assert top_marginals(market, 2) == (10, 15)
    assert top_marginals(market, 3) == (10, 19)


def test_single_buyer_condition_reduces_to_cost_cover():
    v = SetFunction.additive([4, 1])
    market = Market(2, (2, 2), "unlimited", (Buyer(v, "additive"),))
    report = mc_condition(market)
    assert [ic.ok for ic in report.per_item] == [True, False]


def test_unique_pricing(load):
    market = load("two_copy_both_submodular.json")
    prices = unique_mc_pricing(market)
    assert prices == (5, 10, 10)
    verdict = verify(market, prices, 0)
    assert verdict.is_equilibrium and verdict.market_clearing


def test_unique_pricing_identical_additive_buyers():
    v = SetFunction.additive([6, 9])
    market = Market(2, (1, 1), "unlimited", (Buyer(v, "additive"),) * 3)
    prices = unique_mc_pricing(market)
    assert prices == (6, 9)
    alloc = allocate(market, prices)
    assert alloc.profits == (3 * 5, 3 * 8)


def test_unique_pricing_raises_when_condition_fails(load):
    with pytest.raises(HypothesisError):
        unique_mc_pricing(load("two_copy_wide_gap.json"))


def test_uniqueness_not_applicable_with_two_submodular(load):
    market = load("two_copy_both_submodular.json")
    uniq = uniqueness_condition(market)
    assert not uniq.applies
    assert uniq.non_additive_buyers == (1, 2)


def test_uniqueness_boundary_not_strict():
    # marginal exactly twice the smaller one: non-strict, and a second
    # (non-clearing) equilibrium appears on the grid
    market = Market(1, (0,), "unlimited",
                    (Buyer(SetFunction.additive([4]), "additive"),
                     Buyer(SetFunction.additive([2]), "additive")))
    uniq = uniqueness_condition(market)
    assert mc_condition(market).ok and not uniq.applies
    found = enumerate_grid_equilibria(market, 0)
    prices = [p for p, _ in found]
    assert (Fraction(2),) in prices and (Fraction(4),) in prices
    clearing = {p: v.market_clearing for p, v in found}
    assert clearing[(Fraction(2),)] and not clearing[(Fraction(4),)]


def test_uniqueness_condition_pins_grid_to_one_equilibrium():
    rng = random.Random(41)
    tried = 0
    while tried < 12:
        n = rng.randint(1, 3)
        m = rng.randint(2, 3)
        buyers = [Buyer(coverage_valuation(rng, n, 10), "submodular")]
        buyers += [Buyer(additive_valuation(rng, n, 10), "additive")
                   for _ in range(m - 1)]
        market = Market(n, (Fraction(0),) * n, "unlimited", tuple(buyers))
        uniq = uniqueness_condition(market)
        if not uniq.applies:
            continue
        tried += 1
        found = enumerate_grid_equilibria(market, 0)
        assert [p for p, _ in found] == [unique_mc_pricing(market)]


def test_eliminate_costs_structure():
    v = SetFunction.additive([7, 9])
    market = Market(2, (3, 5), "single_copy",
                    (Buyer(v, "additive"), Buyer(v, "additive")), (2, 1))
    twin = eliminate_costs(market)
    assert twin.m == 3
    assert twin.arrival_order == (2, 1, 3)
    assert twin.zero_costs()
    assert twin.buyers[2].valuation.weights == (3, 5)
    with pytest.raises(HypothesisError):
        eliminate_costs(Market(2, (0, 0), "unlimited", (Buyer(v, "additive"),)))


def test_zero_cost_elimination_is_inert_on_grid():
    rng = random.Random(43)
    market = random_single_copy(rng, 2, 2, vmax=8)
    twin = eliminate_costs(market)
    ours = [p for p, _ in enumerate_grid_equilibria(market, 0)]
    theirs = [p for p, _ in enumerate_grid_equilibria(twin, 0)]
    assert ours == theirs


def _grid_axes_union(a: Market, b: Market):
    from pricegame import breakpoints
    axes = []
    for i in range(1, a.n + 1):
        pts = sorted(set(breakpoints(a, i)) | set(breakpoints(b, i)))
        pts.append(pts[-1] + 1)
        axes.append(pts)
    return axes


def test_cost_elimination_grid_correspondence():
    # pricings where every unsold item sits exactly at its cost verify
    # identically in the original market and its zero-cost twin, with profits
    # shifted by the cost
    import itertools
    rng = random.Random(47)
    for _ in range(6):
        market = random_single_copy(rng, 2, 2, vmax=8, cost_max=4)
        twin = eliminate_costs(market)
        axes = _grid_axes_union(market, twin)
        for prices in itertools.product(*axes):
            alloc = allocate(market, prices)
            sold = 0
            for b in alloc.bundles:
                sold |= b
            convention = all(
                prices[i] == market.costs[i]
                for i in range(market.n)
                if not sold & (1 << i)
            )
            if not convention:
                continue
            mine = verify(market, prices, Fraction(1, 3))
            twins = verify(twin, prices, Fraction(1, 3))
            assert mine.is_equilibrium == twins.is_equilibrium
            for i in range(market.n):
                assert (
                    twins.allocation.profits[i]
                    == mine.allocation.profits[i] + market.costs[i]
                )
