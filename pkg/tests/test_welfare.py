import random
from fractions import Fraction
from math import inf

import pytest

from pricegame import (
    Buyer,
    HypothesisError,
    Market,
    SetFunction,
    enumerate_grid_equilibria,
    harmonic,
    hm_bound_audit,
    mc_condition,
    opt_welfare,
    poa_pos,
    social_welfare,
    unique_mc_pricing,
)
from conftest import harmonic_market
from genmarkets import coverage_valuation


def test_harmonic_values():
    assert harmonic(1) == 1
    assert harmonic(3) == Fraction(11, 6)
    assert harmonic(5) == Fraction(137, 60)


def test_single_item_market_welfare():
    market = harmonic_market(3)
    assert social_welfare(market, (1,)) == 1
    assert opt_welfare(market) == Fraction(11, 6)


def test_welfare_examples(load):
    market = load("two_copy_both_submodular.json")
    assert social_welfare(market, (10, 10, 20)) == 200  # 100 + 100
    assert opt_welfare(market) == 215  # 110 + 105, zero costs
    assert social_welfare(market, (0, 0, 0)) == 215


def test_opt_welfare_zero_when_worthless():
    v = SetFunction.additive([0, 0])
    market = Market(2, (0, 0), "unlimited", (Buyer(v, "additive"),))
    assert opt_welfare(market) == 0


def test_opt_welfare_single_copy_assignment():
    a = SetFunction.from_table(2, {(1,): 10, (2,): 10, (1, 2): 12})
    b = SetFunction.additive([9, 1])
    market = Market(2, (0, 0), "single_copy",
                    (Buyer(a, "submodular"), Buyer(b, "additive")), (1, 2))
    # best split: item 2 to the first buyer, item 1 to the second
    assert opt_welfare(market) == 19


def test_poa_ratios_shifted_single_item():
    market = harmonic_market(3, Fraction(1, 10))
    found = enumerate_grid_equilibria(market, 0)
    ratios = poa_pos(market, found)
    assert ratios.opt == Fraction(11, 6) + Fraction(1, 10)
    assert ratios.poa == Fraction(58, 33)
    assert ratios.pos == Fraction(58, 33)  # single equilibrium


def test_poa_one_when_unique_clearing_equilibrium(load):
    market = load("two_copy_both_submodular.json")
    found = enumerate_grid_equilibria(market, 0)
    ratios = poa_pos(market, found)
    assert ratios.poa == 1 and ratios.pos == 1


def test_poa_empty_and_infinite():
    market = harmonic_market(2)
    assert poa_pos(market, []).poa is None
    # a zero-welfare pricing reported as an equilibrium yields infinite ratio
    ratios = poa_pos(market, [(Fraction(5),)])
    assert ratios.poa == inf


def test_hm_audit_tight_at_harmonic_market():
    market = harmonic_market(5)
    audit = hm_bound_audit(market, (1,))
    assert audit.holds
    assert audit.lhs == Fraction(137, 60)
    assert audit.rhs == Fraction(137, 60)
    assert audit.buy_count == (1,)
    assert audit.h_m == Fraction(137, 60)


def test_hm_audit_trivial_at_clearing_pricing():
    rng = random.Random(53)
    done = 0
    while done < 8:
        n = rng.randint(1, 3)
        m = rng.randint(1, 3)
        buyers = tuple(Buyer(coverage_valuation(rng, n, 10), "submodular")
                       for _ in range(m))
        market = Market(n, (Fraction(0),) * n, "unlimited", buyers)
        if not mc_condition(market).ok:
            continue
        done += 1
        prices = unique_mc_pricing(market)
        audit = hm_bound_audit(market, prices)
        assert audit.holds
        assert audit.lhs == audit.realized  # everyone takes everything
        assert all(1 <= r <= m for row in audit.rank for r in row)


def test_hm_audit_random_grid_equilibria():
    rng = random.Random(59)
    audited = 0
    for _ in range(15):
        n = rng.randint(1, 3)
        m = rng.randint(1, 3)
        buyers = tuple(Buyer(coverage_valuation(rng, n, 10), "submodular")
                       for _ in range(m))
        market = Market(n, (Fraction(0),) * n, "unlimited", buyers)
        for prices, verdict in enumerate_grid_equilibria(market, 0):
            audit = hm_bound_audit(market, prices, check_equilibrium=False)
            audited += 1
            assert audit.holds
            # equilibrium revenue never exceeds realized value
            alloc = verdict.allocation
            revenue = sum(
                (Fraction(a) * p for a, p in zip(alloc.alpha, prices)),
                Fraction(0),
            )
            assert revenue <= audit.realized
    assert audited


def test_pos_one_whenever_condition_holds_cheaply():
    rng = random.Random(61)
    done = 0
    while done < 8:
        n = rng.randint(1, 2)
        m = rng.randint(1, 3)
        buyers = tuple(Buyer(coverage_valuation(rng, n, 10), "submodular")
                       for _ in range(m))
        market = Market(n, (Fraction(0),) * n, "unlimited", buyers)
        if not mc_condition(market).ok:
            continue
        done += 1
        ratios = poa_pos(market, enumerate_grid_equilibria(market, 0))
        assert ratios.pos == 1


def test_hm_audit_scope_errors():
    market = harmonic_market(2)
    with pytest.raises(HypothesisError):
        hm_bound_audit(market, (Fraction(3, 4),))  # not an equilibrium
    costly = Market(1, (1,), "unlimited", market.buyers)
    with pytest.raises(HypothesisError):
        hm_bound_audit(costly, (1,))


def test_harmonic_market_clearing_price_is_smallest_share():
    market = harmonic_market(4)
    from pricegame import mc_condition as _mc, unique_mc_pricing as _ump
    assert _mc(market).ok
    assert _ump(market) == (Fraction(1, 4),)
