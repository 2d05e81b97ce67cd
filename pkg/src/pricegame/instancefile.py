"""Reading, validating, and writing market instance files.

Instances are UTF-8 JSON.  All numbers are integers or ``"num/den"`` strings;
decimals are rejected so files stay exact.  Layout::

    {
      "schema": 1,
      "n": 3,
      "costs": [0, 0, 0],
      "supply": "single_copy",            // or "unlimited"
      "arrival_order": [1, 2],            // single_copy only
      "buyers": [
        {"class": "submodular",
         "valuation": {"table": {"1": 110, "1,2": 123, ...}},
         "tie_priority": [2, 1, 3],       // optional
         "budget": "12"},                 // optional, additive buyers only
        {"class": "additive", "valuation": {"additive": [10, 12, 14]}}
      ]
    }

Table keys are comma-separated sorted item numbers; the empty-set entry may
be omitted and defaults to zero (with a warning).  A buyer's declared class
is cross-checked against the valuation's actual structure.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from .errors import ValidationError
from .market import SINGLE_COPY, UNLIMITED, Buyer, Market
from .rationals import format_value, parse_value
from .setfn import MAX_ITEMS, SetFunction, items_of, mask_of

SCHEMA_VERSION = 1


def _parse_subset_key(key: str, n: int) -> int:
    key = key.strip()
    if not key:
        return 0
    try:
        items = [int(tok) for tok in key.split(",")]
    except ValueError:
        raise ValidationError(f"bad subset key {key!r}") from None
    return mask_of(items, n)


def _parse_valuation(node, n: int, buyer_no: int, warn) -> SetFunction:
    if not isinstance(node, dict) or len(node) != 1:
        raise ValidationError(
            f"buyer {buyer_no}: valuation must be {{'additive': [...]}} or {{'table': {{...}}}}"
        )
    if "additive" in node:
        per_item = node["additive"]
        if len(per_item) != n:
            raise ValidationError(
                f"buyer {buyer_no}: additive valuation needs {n} entries, got {len(per_item)}"
            )
        return SetFunction.additive(per_item)
    if "table" in node:
        table = node["table"]
        values = [None] * (1 << n)
        for key, raw in table.items():
            mask = _parse_subset_key(key, n)
            if values[mask] is not None:
                raise ValidationError(
                    f"buyer {buyer_no}: duplicate subset {key!r}"
                )
            values[mask] = parse_value(raw)
        if values[0] is None:
            warn(f"buyer {buyer_no}: empty-set value missing, defaulting to 0")
            values[0] = Fraction(0)
        missing = [m for m, v in enumerate(values) if v is None]
        if missing:
            names = [",".join(map(str, items_of(m))) for m in missing[:4]]
            raise ValidationError(
                f"buyer {buyer_no}: table missing {len(missing)} subsets (e.g. {names})"
            )
        return SetFunction(n, values)
    raise ValidationError(f"buyer {buyer_no}: unknown valuation form {list(node)}")


def parse_instance(data: dict, warn=None) -> Market:
    """Build a validated market from a decoded instance dict."""
    sink = warn if warn is not None else (lambda msg: None)

    if not isinstance(data, dict):
        raise ValidationError("instance must be a JSON object")
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {schema}")
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("missing or bad ground set size 'n'") from None
    if not 1 <= n <= MAX_ITEMS:
        raise ValidationError(f"n={n} outside 1..{MAX_ITEMS}")

    supply = data.get("supply", UNLIMITED)
    if supply not in (UNLIMITED, SINGLE_COPY):
        raise ValidationError(f"unknown supply mode {supply!r}")
    costs = data.get("costs", [0] * n)

    buyers = []
    raw_buyers = data.get("buyers")
    if not raw_buyers:
        raise ValidationError("instance needs at least one buyer")
    for bno, raw in enumerate(raw_buyers, start=1):
        cls = raw.get("class", "general")
        valuation = _parse_valuation(raw.get("valuation"), n, bno, sink)
        flags = valuation.classify()
        if cls == "additive" and not flags.additive:
            raise ValidationError(f"buyer {bno}: declared additive but is not")
        if cls == "submodular" and not (flags.submodular and flags.monotone):
            raise ValidationError(
                f"buyer {bno}: declared submodular but is not (monotone submodular)"
            )
        budget = raw.get("budget")
        if budget is not None and cls != "additive":
            raise ValidationError(
                f"buyer {bno}: budgets are only supported for additive buyers"
            )
        buyers.append(
            Buyer(
                valuation=valuation,
                declared_class=cls,
                tie_priority=tuple(raw.get("tie_priority", ())),
                budget=parse_value(budget) if budget is not None else None,
            )
        )

    return Market(
        n=n,
        costs=tuple(parse_value(c) for c in costs),
        supply=supply,
        buyers=tuple(buyers),
        arrival_order=tuple(data.get("arrival_order", ())),
    )


def load_instance(path, warn=None) -> Market:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from None
    return parse_instance(data, warn=warn)


def _reject_float(token):
    raise ValidationError(
        f"decimal literal {token!r} rejected; use integers or 'num/den' strings"
    )


def serialize_instance(market: Market) -> dict:
    """Canonical dict form; parsing it back yields an identical market."""
    buyers = []
    for b in market.buyers:
        if b.valuation.weights is not None:
            valuation = {"additive": [format_value(w) for w in b.valuation.weights]}
        else:
            table = {}
            for mask, v in enumerate(b.valuation.values):
                key = ",".join(map(str, items_of(mask)))
                table[key] = format_value(v)
            valuation = {"table": table}
        entry = {
            "class": b.declared_class,
            "valuation": valuation,
            "tie_priority": list(b.tie_priority),
        }
        if b.budget is not None:
            entry["budget"] = format_value(b.budget)
        buyers.append(entry)
    data = {
        "schema": SCHEMA_VERSION,
        "n": market.n,
        "costs": [format_value(c) for c in market.costs],
        "supply": market.supply,
        "buyers": buyers,
    }
    if market.supply == SINGLE_COPY:
        data["arrival_order"] = list(market.arrival_order)
    return data


def dump_instance(market: Market, path) -> None:
    Path(path).write_text(canonical_json(serialize_instance(market)), encoding="utf-8")


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def instance_digest(market: Market) -> str:
    blob = canonical_json(serialize_instance(market)).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]
