"""Market-clearing equilibrium existence for two additive buyers, two copies
per item, no production costs, and a budget on buyer 1.

Items are analyzed in non-increasing order of ``v1 - v2``.  Candidate
equilibria come in two families: prices at ``min(v1, v2)`` everywhere with
slack budget, or a boundary pricing indexed by a prefix length k that pins
the first k items at ``v2`` and spreads the remaining budget so the rest
share one utility slack for buyer 1.  Each family carries a small set of
inequality bullets, checked by exhaustive subset enumeration; passing bullets
certify the pricing, and the two families together decide existence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .equilibrium import Verdict, verify
from .errors import HypothesisError
from .market import UNLIMITED, Market
from .rationals import parse_value

ENUM_CAP = 1 << 20

_NEG_INF = Fraction(-(1 << 80))


@dataclass(frozen=True)
class BulletCheck:
    label: str
    ok: bool | None           # None: undecided, enumeration over the cap
    witness: str = ""


@dataclass(frozen=True)
class CandidateVerdict:
    label: str                # "slack-budget" or "boundary k=…"
    k: int | None
    pricing: tuple[Fraction, ...]   # original item order
    bullets: tuple[BulletCheck, ...]
    ok: bool | None


@dataclass(frozen=True)
class BudgetReport:
    sorted_order: tuple[int, ...]   # original item numbers, v1-v2 non-increasing
    slack_case: CandidateVerdict
    boundary_cases: tuple[CandidateVerdict, ...]
    exists: bool | None
    equilibria: tuple[tuple[Fraction, ...], ...]


def _require_appendix_market(market: Market):
    if market.supply != UNLIMITED:
        raise HypothesisError("budget analysis needs unlimited (two-copy) supply")
    if market.m != 2:
        raise HypothesisError("budget analysis covers exactly two buyers")
    if not market.zero_costs():
        raise HypothesisError("budget analysis assumes zero production costs")
    b1, b2 = market.buyers
    if not b1.valuation.classify().additive or not b2.valuation.classify().additive:
        raise HypothesisError("budget analysis covers additive buyers only")
    if b1.budget is None or b2.budget is not None:
        raise HypothesisError("exactly buyer 1 must carry the budget")
    v1 = tuple(b1.valuation.top_marginal(i) for i in range(1, market.n + 1))
    v2 = tuple(b2.valuation.top_marginal(i) for i in range(1, market.n + 1))
    return v1, v2, b1.budget


def sorted_item_order(market: Market) -> tuple[int, ...]:
    """Item numbers with ``v1 - v2`` non-increasing; equal differences keep
    their original relative order so equal-difference items price together."""
    v1, v2, _ = _require_appendix_market(market)
    return tuple(
        sorted(range(1, market.n + 1), key=lambda i: -(v1[i - 1] - v2[i - 1]))
    )


def boundary_pricing(market: Market, k: int) -> tuple[Fraction, ...]:
    """The budget-exhausting candidate pricing with prefix length ``k``.

    In sorted order, the first k items cost ``v2`` and the rest split the
    leftover budget so buyer 1 sees one common utility slack; the full vector
    sums to the budget whenever ``k < n``.  Returned in original item order.
    """
    v1, v2, budget = _require_appendix_market(market)
    n = market.n
    if not 0 <= k <= n:
        raise HypothesisError(f"prefix length {k} outside 0..{n}")
    order = sorted_item_order(market)
    v1s = [v1[i - 1] for i in order]
    v2s = [v2[i - 1] for i in order]
    sorted_prices = _boundary_sorted(v1s, v2s, budget, k)
    out = [Fraction(0)] * n
    for pos, item in enumerate(order):
        out[item - 1] = sorted_prices[pos]
    return tuple(out)


def _boundary_sorted(v1s, v2s, budget: Fraction, k: int) -> list[Fraction]:
    n = len(v1s)
    prices = list(v2s[:k])
    if k < n:
        rest = n - k
        pool = sum(v1s[k:], Fraction(0)) + sum(v2s[:k], Fraction(0)) - budget
        for i in range(k, n):
            prices.append(v1s[i] - pool / rest)
    return prices


def _subset_sum(vals, idxs) -> Fraction:
    return sum((vals[j] for j in idxs), Fraction(0))


def check_condition_set1(market: Market, enum_cap: int = ENUM_CAP) -> CandidateVerdict:
    """Certificate for the equilibrium that leaves budget unspent: every item
    at the cheaper buyer's value."""
    v1, v2, budget = _require_appendix_market(market)
    n = market.n
    order = sorted_item_order(market)
    v1s = [v1[i - 1] for i in order]
    v2s = [v2[i - 1] for i in order]
    prefix = 0
    while prefix < n and v1s[prefix] - v2s[prefix] > 0:
        prefix += 1

    pricing_sorted = [min(a, b) for a, b in zip(v1s, v2s)]
    bullets = []

    bad = [order[i] for i in range(n) if v2s[i] > 2 * v1s[i]]
    bullets.append(
        BulletCheck(
            label="no item worth twice as much to the unbudgeted buyer",
            ok=not bad,
            witness=f"items {bad}" if bad else "",
        )
    )

    total = sum(pricing_sorted, Fraction(0))
    bullets.append(
        BulletCheck(
            label="pricing leaves budget slack",
            ok=total < budget,
            witness="" if total < budget else f"sum {total} >= budget {budget}",
        )
    )

    bullets.append(_jump_bullet(v1s, v2s, pricing_sorted, budget, prefix,
                                free_positions=(), threshold=_NEG_INF,
                                order=order, enum_cap=enum_cap))

    ok = _combine(bullets)
    pricing = [Fraction(0)] * n
    for pos, item in enumerate(order):
        pricing[item - 1] = pricing_sorted[pos]
    return CandidateVerdict("slack-budget", None, tuple(pricing), tuple(bullets), ok)


def _jump_bullet(v1s, v2s, prices, budget, prefix, free_positions, threshold,
                 order, enum_cap) -> BulletCheck:
    """The quantified bullet: a seller of a prefix item i jumping above
    ``2 v2_i`` must not leave buyer 1 better off keeping item i and dropping
    some bundle A (prefix items) and C (non-prefix items) instead."""
    label = "no profitable jump above twice the rival value"
    n = len(v1s)
    combos = 0
    for pos_i in range(prefix):
        gain = v1s[pos_i] - 2 * v2s[pos_i]
        if gain <= 0 or not gain > threshold:
            continue
        others = [p for p in range(prefix) if p != pos_i]
        for a_set in _subsets(others):
            for c_set in _subsets(free_positions):
                combos += 1
                if combos > enum_cap:
                    return BulletCheck(
                        label=label, ok=None,
                        witness=f"undecided: enumeration beyond {enum_cap} combos",
                    )
                kept_prefix = [p for p in others if p not in a_set]
                kept_free = [p for p in free_positions if p not in c_set]
                spend = (
                    2 * v2s[pos_i]
                    + _subset_sum(v2s, kept_prefix)
                    + _subset_sum(prices, kept_free)
                )
                if spend >= budget:
                    continue
                slack = sum(
                    (v1s[p] - prices[p] for p in list(a_set) + list(c_set)),
                    Fraction(0),
                )
                if slack < gain:
                    return BulletCheck(
                        label=label,
                        ok=False,
                        witness=(
                            f"item {order[pos_i]} with dropped sets "
                            f"A={[order[p] for p in a_set]} "
                            f"C={[order[p] for p in c_set]}: "
                            f"slack {slack} < gain {gain}"
                        ),
                    )
    return BulletCheck(label=label, ok=True)


def _subsets(positions):
    for r in range(len(positions) + 1):
        yield from itertools.combinations(positions, r)


def _combine(bullets) -> bool | None:
    if any(b.ok is False for b in bullets):
        return False
    if any(b.ok is None for b in bullets):
        return None
    return True


def check_condition_set2(market: Market, k: int, enum_cap: int = ENUM_CAP) -> CandidateVerdict:
    """Certificate for the budget-exhausting boundary pricing with prefix k."""
    v1, v2, budget = _require_appendix_market(market)
    n = market.n
    if not 0 <= k <= n:
        raise HypothesisError(f"prefix length {k} outside 0..{n}")
    order = sorted_item_order(market)
    v1s = [v1[i - 1] for i in order]
    v2s = [v2[i - 1] for i in order]
    prices = _boundary_sorted(v1s, v2s, budget, k)

    bullets = []
    total = sum(prices, Fraction(0))
    bullets.append(
        BulletCheck(
            label="pricing consumes the budget exactly",
            ok=total == budget,
            witness="" if total == budget else f"sum {total} != budget {budget}",
        )
    )

    bad = [order[i] for i in range(n) if not 0 <= prices[i] <= v1s[i]]
    bullets.append(
        BulletCheck(
            label="prices between zero and the budgeted buyer's values",
            ok=not bad,
            witness=f"items {bad}" if bad else "",
        )
    )

    bad = [order[i] for i in range(n) if v2s[i] > 2 * prices[i]]
    bullets.append(
        BulletCheck(
            label="no price below half the rival value",
            ok=not bad,
            witness=f"items {bad}" if bad else "",
        )
    )

    if k < n:
        left_ok = prices[k] < v2s[k]
        right_ok = k == 0 or v1s[k] - prices[k] <= v1s[k - 1] - v2s[k - 1]
        ok = left_ok and right_ok
        witness = "" if ok else (
            f"first free item {order[k]}: price {prices[k]} vs rival {v2s[k]}"
            + ("" if right_ok else ", slack exceeds last prefix difference")
        )
    else:
        ok, witness = True, ""
    bullets.append(BulletCheck(label="boundary slack bracket", ok=ok, witness=witness))

    threshold = (v1s[k] - prices[k]) if k < n else _NEG_INF
    bullets.append(_jump_bullet(v1s, v2s, prices, budget, k,
                                free_positions=tuple(range(k, n)),
                                threshold=threshold, order=order,
                                enum_cap=enum_cap))

    okall = _combine(bullets)
    pricing = [Fraction(0)] * n
    for pos, item in enumerate(order):
        pricing[item - 1] = prices[pos]
    return CandidateVerdict(f"boundary k={k}", k, tuple(pricing), tuple(bullets), okall)


def decide_mc_pne(market: Market, enum_cap: int = ENUM_CAP) -> BudgetReport:
    """Decide whether a market-clearing pure equilibrium exists, assembling
    all n+2 candidate pricings and their certificates."""
    order = sorted_item_order(market)
    slack = check_condition_set1(market, enum_cap)
    boundary = tuple(
        check_condition_set2(market, k, enum_cap) for k in range(market.n + 1)
    )
    verdicts = [slack.ok] + [b.ok for b in boundary]
    if any(v is True for v in verdicts):
        exists = True
    elif any(v is None for v in verdicts):
        exists = None
    else:
        exists = False
    equilibria = []
    for cand in (slack, *boundary):
        if cand.ok and cand.pricing not in equilibria:
            equilibria.append(cand.pricing)
    return BudgetReport(order, slack, boundary, exists, tuple(equilibria))


def budgeted_verify(market: Market, prices, eps=0) -> Verdict:
    """Deviation-search verification specialized to the budgeted two-buyer
    market; the independent check behind :func:`decide_mc_pne`."""
    _require_appendix_market(market)
    return verify(market, prices, parse_value(eps))


def candidate_grid_axes(market: Market) -> list[list[Fraction]]:
    """Per-seller price candidates covering every possible market-clearing
    equilibrium: both buyers' values, all boundary prices, and zero."""
    v1, v2, _ = _require_appendix_market(market)
    axes = []
    boundary = [boundary_pricing(market, k) for k in range(market.n + 1)]
    for i in range(1, market.n + 1):
        cands = {Fraction(0), v1[i - 1], v2[i - 1]}
        for p in boundary:
            if p[i - 1] >= 0:
                cands.add(p[i - 1])
        axes.append(sorted(cands))
    return axes
