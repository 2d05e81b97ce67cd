"""Command-line interface.

Every command reads one instance file and emits either a human summary or,
with ``--json``, a canonical machine report (stable key order, rationals as
``"num/den"``, byte-identical across reruns).

Exit codes: 0 success, 2 when the analyzed property does not hold (not an
equilibrium, empty enumeration, failed condition, ...), 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import inf

from . import budget as budget_mod
from . import characterize, epsne, equilibrium, welfare
from .errors import (
    GridLimitError,
    HypothesisError,
    UpConsistencyError,
    ValidationError,
)
from .instancefile import (
    canonical_json,
    dump_instance,
    instance_digest,
    load_instance,
)
from .market import allocate, best_response, is_market_clearing
from .rationals import format_human, format_value, parse_value
from .setfn import items_of

OK, PROPERTY_FAILS, ERROR = 0, 2, 1


def _parse_prices(text: str):
    return tuple(parse_value(tok) for tok in text.split(","))


def _parse_prefs(text: str):
    return tuple(int(tok) for tok in text.split(","))


def _fmt(v):
    if isinstance(v, Fraction):
        return format_value(v)
    if v == inf:
        return "inf"
    return v


def _fmt_prices(prices):
    return [format_value(p) for p in prices]


def _verdict_payload(v: equilibrium.Verdict) -> dict:
    return {
        "epsilon": format_value(v.epsilon),
        "is_equilibrium": v.is_equilibrium,
        "market_clearing": v.market_clearing,
        "search": v.search,
        "bundles": [list(items) for items in v.allocation.bundle_items()],
        "social_welfare": format_value(v.allocation.social_welfare),
        "per_seller": [
            {
                "current_profit": format_value(d.current_profit),
                "best_deviation_price": format_value(d.best_price),
                "best_deviation_profit": format_value(d.best_profit),
                **({"best_deviation_pref": d.best_pref} if d.best_pref is not None else {}),
            }
            for d in v.per_seller
        ],
    }


def _emit(args, payload: dict, human_lines) -> None:
    if args.json:
        sys.stdout.write(canonical_json(payload))
    else:
        for line in human_lines:
            print(line)


# ---------------------------------------------------------------- commands


def cmd_validate(args, market, warnings):
    flags = [b.valuation.classify() for b in market.buyers]
    payload = {
        "command": "validate",
        "instance": instance_digest(market),
        "n": market.n,
        "m": market.m,
        "supply": market.supply,
        "buyers": [
            {
                "class": b.declared_class,
                "additive": f.additive,
                "submodular": f.submodular,
                "subadditive": f.subadditive,
                "monotone": f.monotone,
                "budget": format_value(b.budget) if b.budget is not None else None,
            }
            for b, f in zip(market.buyers, flags)
        ],
        "warnings": warnings,
    }
    lines = [
        f"instance ok: n={market.n} sellers, m={market.m} buyers, supply={market.supply}"
    ]
    for j, (b, f) in enumerate(zip(market.buyers, flags), start=1):
        tags = [t for t, on in (("additive", f.additive), ("submodular", f.submodular),
                                ("subadditive", f.subadditive), ("monotone", f.monotone)) if on]
        line = f"  buyer {j}: declared {b.declared_class}; structure: {', '.join(tags)}"
        if b.budget is not None:
            line += f"; budget {format_human(b.budget)}"
        lines.append(line)
    lines += [f"  warning: {w}" for w in warnings]
    _emit(args, payload, lines)
    return OK


def cmd_best_response(args, market, warnings):
    prices = _parse_prices(args.prices)
    buyer = market.buyers[args.buyer - 1]
    mask = best_response(buyer, market.full_mask, prices)
    u = buyer.valuation.value(mask) - sum(
        (prices[i - 1] for i in items_of(mask)), Fraction(0)
    )
    payload = {
        "command": "best-response",
        "instance": instance_digest(market),
        "buyer": args.buyer,
        "prices": _fmt_prices(prices),
        "bundle": list(items_of(mask)),
        "utility": format_value(u),
    }
    _emit(args, payload, [
        f"buyer {args.buyer} buys {list(items_of(mask))} at utility {format_human(u)}"
    ])
    return OK


def cmd_allocate(args, market, warnings):
    prices = _parse_prices(args.prices)
    alloc = allocate(market, prices)
    clearing = is_market_clearing(market, prices, alloc)
    payload = {
        "command": "allocate",
        "instance": instance_digest(market),
        "prices": _fmt_prices(prices),
        "bundles": [list(t) for t in alloc.bundle_items()],
        "copies_sold": list(alloc.alpha),
        "profits": [format_value(p) for p in alloc.profits],
        "social_welfare": format_value(alloc.social_welfare),
        "market_clearing": clearing,
    }
    lines = [f"prices {', '.join(format_human(p) for p in prices)}"]
    for j, t in enumerate(alloc.bundle_items(), start=1):
        lines.append(f"  buyer {j} buys {list(t)}")
    lines.append(f"  copies sold per seller: {list(alloc.alpha)}")
    lines.append(f"  profits: {[format_human(p) for p in alloc.profits]}")
    lines.append(f"  social welfare {format_human(alloc.social_welfare)}; "
                 f"market clearing: {clearing}")
    _emit(args, payload, lines)
    return OK


def cmd_verify(args, market, warnings):
    prices = _parse_prices(args.prices)
    verdict = equilibrium.verify(market, prices, parse_value(args.eps))
    payload = {
        "command": "verify",
        "instance": instance_digest(market),
        "prices": _fmt_prices(prices),
        **_verdict_payload(verdict),
    }
    lines = [
        f"{'eps-equilibrium' if verdict.epsilon else 'pure equilibrium'}: "
        f"{verdict.is_equilibrium} (eps={format_human(verdict.epsilon)}); "
        f"market clearing: {verdict.market_clearing}"
    ]
    for i, d in enumerate(verdict.per_seller, start=1):
        lines.append(
            f"  seller {i}: profit {format_human(d.current_profit)}, best deviation "
            f"price {format_human(d.best_price)} -> {format_human(d.best_profit)}"
        )
    _emit(args, payload, lines)
    return OK if verdict.is_equilibrium else PROPERTY_FAILS


def cmd_characterize(args, market, warnings):
    report = characterize.mc_condition(market)
    uniq = characterize.uniqueness_condition(market)
    payload = {
        "command": "characterize",
        "instance": instance_digest(market),
        "market_clearing_condition": report.ok,
        "strict": report.strict,
        "uniqueness_applies": uniq.applies,
        "non_additive_buyers": list(uniq.non_additive_buyers),
        "per_item": [
            {
                "item": ic.item,
                "buyer_order": list(ic.order),
                "marginals": [format_value(v) for v in ic.marginals],
                "ok": ic.ok,
                "checks": [
                    {"label": ch.label, "lhs": format_value(ch.lhs),
                     "rhs": format_value(ch.rhs), "ok": ch.ok, "strict": ch.strict}
                    for ch in ic.checks
                ],
            }
            for ic in report.per_item
        ],
    }
    lines = [
        f"market-clearing equilibrium condition: {'passes' if report.ok else 'FAILS'}"
        f"{' (strict)' if report.strict else ''}",
        f"single-equilibrium condition applies: {uniq.applies}",
    ]
    for ic in report.per_item:
        lines.append(
            f"  item {ic.item}: marginals "
            f"{[format_human(v) for v in ic.marginals]} -> {'ok' if ic.ok else 'FAIL'}"
        )
        for ch in ic.checks:
            if not ch.ok:
                lines.append(
                    f"    {ch.label}: {format_human(ch.lhs)} vs {format_human(ch.rhs)}"
                )
    _emit(args, payload, lines)
    return OK if report.ok else PROPERTY_FAILS


def cmd_unique_pricing(args, market, warnings):
    try:
        prices = characterize.unique_mc_pricing(market)
    except HypothesisError as exc:
        payload = {
            "command": "unique-pricing",
            "instance": instance_digest(market),
            "exists": False,
            "reason": str(exc),
        }
        _emit(args, payload, [f"no market-clearing equilibrium: {exc}"])
        return PROPERTY_FAILS
    verdict = equilibrium.verify(market, prices, 0)
    payload = {
        "command": "unique-pricing",
        "instance": instance_digest(market),
        "exists": True,
        "prices": _fmt_prices(prices),
        "is_equilibrium": verdict.is_equilibrium,
        "market_clearing": verdict.market_clearing,
    }
    _emit(args, payload, [
        f"market-clearing equilibrium pricing: {[format_human(p) for p in prices]}",
        f"  verifies: equilibrium={verdict.is_equilibrium}, "
        f"clearing={verdict.market_clearing}",
    ])
    return OK


def cmd_construct_eps_ne(args, market, warnings):
    eps = parse_value(args.eps)
    try:
        if market.zero_costs():
            prices, trace = epsne.construct_eps_ne(market, eps)
            verdict = equilibrium.verify(market, prices, eps)
        else:
            prices, trace, verdict = epsne.with_costs(market, eps)
    except UpConsistencyError as exc:
        payload = {
            "command": "construct-eps-ne",
            "instance": instance_digest(market),
            "constructed": False,
            "reason": str(exc),
        }
        _emit(args, payload, [f"construction aborted: {exc}"])
        return PROPERTY_FAILS
    payload = {
        "command": "construct-eps-ne",
        "instance": instance_digest(market),
        "constructed": True,
        "epsilon": format_value(eps),
        "initial": _fmt_prices(trace.initial),
        "raises": [[i, format_value(a), format_value(b)] for i, a, b in trace.raises],
        "final": _fmt_prices(prices),
        "is_equilibrium": verdict.is_equilibrium,
        "market_clearing": verdict.market_clearing,
    }
    _emit(args, payload, [
        f"initial prices: {[format_human(p) for p in trace.initial]}",
        f"raises applied: {len(trace.raises)}",
        f"final prices:   {[format_human(p) for p in prices]}",
        f"eps-equilibrium: {verdict.is_equilibrium}; "
        f"market clearing: {verdict.market_clearing}",
    ])
    return OK


def cmd_grid_equilibria(args, market, warnings):
    eps = parse_value(args.eps)
    found = equilibrium.enumerate_grid_equilibria(market, eps, max_grid=args.max_grid)
    note = "enumeration covers the breakpoint grid plus canonical unsold prices"
    if any(b.budget is not None for b in market.buyers):
        note += ("; budget-boundary pricings lie off this grid, "
                 "use budget-check for those")
    payload = {
        "command": "grid-equilibria",
        "instance": instance_digest(market),
        "epsilon": format_value(eps),
        "count": len(found),
        "equilibria": [
            {
                "prices": _fmt_prices(p),
                "market_clearing": v.market_clearing,
                "social_welfare": format_value(v.allocation.social_welfare),
            }
            for p, v in found
        ],
        "note": note,
    }
    lines = [f"grid equilibria found: {len(found)} (eps={format_human(eps)})"]
    if any(b.budget is not None for b in market.buyers):
        lines.append("  note: " + note.split("; ", 1)[1])
    for p, v in found:
        lines.append(
            f"  {[format_human(x) for x in p]}  clearing={v.market_clearing} "
            f"welfare={format_human(v.allocation.social_welfare)}"
        )
    _emit(args, payload, lines)
    return OK if found else PROPERTY_FAILS


def cmd_welfare(args, market, warnings):
    prices = _parse_prices(args.prices)
    sw = welfare.social_welfare(market, prices)
    opt = welfare.opt_welfare(market)
    payload = {
        "command": "welfare",
        "instance": instance_digest(market),
        "prices": _fmt_prices(prices),
        "social_welfare": format_value(sw),
        "optimal_welfare": format_value(opt),
    }
    _emit(args, payload, [
        f"social welfare {format_human(sw)} of optimal {format_human(opt)}"
    ])
    return OK


def cmd_poa(args, market, warnings):
    eps = parse_value(args.eps)
    found = equilibrium.enumerate_grid_equilibria(market, eps, max_grid=args.max_grid)
    ratios = welfare.poa_pos(market, found)
    payload = {
        "command": "poa",
        "instance": instance_digest(market),
        "epsilon": format_value(eps),
        "count": len(found),
        "optimal_welfare": format_value(ratios.opt),
        "poa": _fmt(ratios.poa) if ratios.poa is not None else None,
        "pos": _fmt(ratios.pos) if ratios.pos is not None else None,
        "note": "ratios over grid equilibria only",
    }
    if not found:
        _emit(args, payload, ["no grid equilibria; anarchy/stability undefined"])
        return PROPERTY_FAILS
    _emit(args, payload, [
        f"{len(found)} grid equilibria; "
        f"price of anarchy {_fmt(ratios.poa)}, stability {_fmt(ratios.pos)} "
        f"(optimal welfare {format_human(ratios.opt)})"
    ])
    return OK


def cmd_hm_audit(args, market, warnings):
    prices = _parse_prices(args.prices)
    verdict = equilibrium.verify(market, prices, 0)
    if not verdict.is_equilibrium:
        payload = {
            "command": "hm-audit",
            "instance": instance_digest(market),
            "prices": _fmt_prices(prices),
            "holds": None,
            "reason": "pricing is not a pure equilibrium",
        }
        _emit(args, payload, ["pricing is not a pure equilibrium; audit undefined"])
        return PROPERTY_FAILS
    audit = welfare.hm_bound_audit(market, prices, check_equilibrium=False)
    payload = {
        "command": "hm-audit",
        "instance": instance_digest(market),
        "prices": _fmt_prices(prices),
        "holds": audit.holds,
        "lhs": format_value(audit.lhs),
        "rhs": format_value(audit.rhs),
        "harmonic": format_value(audit.h_m),
        "realized_value": format_value(audit.realized),
        "buy_count": list(audit.buy_count),
        "rank": [list(r) for r in audit.rank],
    }
    _emit(args, payload, [
        f"harmonic bound holds: {audit.holds} "
        f"({format_human(audit.lhs)} <= {format_human(audit.rhs)}"
        f" = H_m * {format_human(audit.realized)})",
        f"tight: {audit.lhs == audit.rhs}",
    ])
    return OK if audit.holds else PROPERTY_FAILS


def cmd_budget_check(args, market, warnings):
    report = budget_mod.decide_mc_pne(market)

    def cand_payload(c):
        return {
            "label": c.label,
            "pricing": _fmt_prices(c.pricing),
            "ok": c.ok,
            "bullets": [
                {"label": b.label, "ok": b.ok, "witness": b.witness}
                for b in c.bullets
            ],
        }

    payload = {
        "command": "budget-check",
        "instance": instance_digest(market),
        "exists": report.exists,
        "sorted_order": list(report.sorted_order),
        "slack_case": cand_payload(report.slack_case),
        "boundary_cases": [cand_payload(c) for c in report.boundary_cases],
        "equilibria": [_fmt_prices(p) for p in report.equilibria],
    }
    lines = [f"market-clearing equilibrium exists: {report.exists}"]
    for p in report.equilibria:
        lines.append(f"  pricing {[format_human(x) for x in p]}")
    if not report.exists:
        for c in (report.slack_case, *report.boundary_cases):
            failing = [b.label for b in c.bullets if b.ok is False]
            lines.append(f"  {c.label}: fails {failing}")
    _emit(args, payload, lines)
    return OK if report.exists else PROPERTY_FAILS


def cmd_reduce_costs(args, market, warnings):
    twin = characterize.eliminate_costs(market)
    dump_instance(twin, args.out)
    payload = {
        "command": "reduce-costs",
        "instance": instance_digest(market),
        "out": args.out,
        "twin_instance": instance_digest(twin),
        "buyers": twin.m,
    }
    _emit(args, payload, [
        f"wrote zero-cost twin with {twin.m} buyers to {args.out}"
    ])
    return OK


def cmd_preference_game(args, market, warnings):
    eps = parse_value(args.eps)
    if args.prices is not None:
        if args.prefs is None:
            raise ValidationError("--prices requires --prefs")
        prices = _parse_prices(args.prices)
        prefs = _parse_prefs(args.prefs)
        verdict = equilibrium.verify_preference_game(market, prices, prefs, eps)
        payload = {
            "command": "preference-game",
            "instance": instance_digest(market),
            "prices": _fmt_prices(prices),
            "prefs": list(prefs),
            **_verdict_payload(verdict),
        }
        _emit(args, payload, [
            f"equilibrium: {verdict.is_equilibrium}; "
            f"market clearing: {verdict.market_clearing}"
        ])
        return OK if verdict.is_equilibrium else PROPERTY_FAILS
    found = equilibrium.enumerate_preference_equilibria(market, eps, max_grid=args.max_grid)
    payload = {
        "command": "preference-game",
        "instance": instance_digest(market),
        "epsilon": format_value(eps),
        "count": len(found),
        "states": [
            {"prices": _fmt_prices(p), "prefs": list(q)} for p, q, _ in found
        ],
    }
    lines = [f"price-and-preference equilibria found: {len(found)} (eps={format_human(eps)})"]
    for p, q, _ in found:
        lines.append(f"  prices {[format_human(x) for x in p]} prefs {list(q)}")
    _emit(args, payload, lines)
    return OK if found else PROPERTY_FAILS


# ---------------------------------------------------------------- plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pricegame",
        description="Exact equilibrium analysis for posted-price combinatorial markets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **extra):
        p = sub.add_parser(name)
        p.add_argument("instance", help="instance JSON file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate)

    p = add("best-response", cmd_best_response)
    p.add_argument("--buyer", type=int, required=True)
    p.add_argument("--prices", required=True)

    p = add("allocate", cmd_allocate)
    p.add_argument("--prices", required=True)

    p = add("verify", cmd_verify)
    p.add_argument("--prices", required=True)
    p.add_argument("--eps", default="0")

    add("characterize", cmd_characterize)
    add("unique-pricing", cmd_unique_pricing)

    p = add("construct-eps-ne", cmd_construct_eps_ne)
    p.add_argument("--eps", required=True)

    p = add("grid-equilibria", cmd_grid_equilibria)
    p.add_argument("--eps", default="0")
    p.add_argument("--max-grid", type=int, default=equilibrium.DEFAULT_MAX_GRID)

    p = add("welfare", cmd_welfare)
    p.add_argument("--prices", required=True)

    p = add("poa", cmd_poa)
    p.add_argument("--eps", default="0")
    p.add_argument("--max-grid", type=int, default=equilibrium.DEFAULT_MAX_GRID)

    p = add("hm-audit", cmd_hm_audit)
    p.add_argument("--prices", required=True)

    add("budget-check", cmd_budget_check)

    p = add("reduce-costs", cmd_reduce_costs)
    p.add_argument("--out", required=True)

    p = add("preference-game", cmd_preference_game)
    p.add_argument("--prices")
    p.add_argument("--prefs")
    p.add_argument("--eps", default="0")
    p.add_argument("--max-grid", type=int, default=equilibrium.DEFAULT_MAX_GRID)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    warnings: list[str] = []
    try:
        market = load_instance(args.instance, warn=warnings.append)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        return args.fn(args, market, warnings)
    except (ValidationError, HypothesisError, GridLimitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
