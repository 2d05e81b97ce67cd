"""Exact analysis engine for posted-price combinatorial markets.

Strategic sellers post one price each; buyers with set-function valuations
pick utility-maximizing bundles (ties to the larger bundle).  The package
computes best responses and allocations, verifies and enumerates (eps-)Nash
equilibria of the seller game, evaluates closed-form market-clearing
conditions, audits welfare bounds, and decides equilibrium existence for
budgeted two-buyer markets -- all in exact rational arithmetic.
"""

from .budget import (
    BudgetReport,
    boundary_pricing,
    budgeted_verify,
    check_condition_set1,
    check_condition_set2,
    decide_mc_pne,
)
from .characterize import (
    ConditionReport,
    eliminate_costs,
    mc_condition,
    unique_mc_pricing,
    uniqueness_condition,
)
from .epsne import AscentTrace, construct_eps_ne, with_costs
from .equilibrium import (
    Verdict,
    best_deviation,
    breakpoints,
    enumerate_grid_equilibria,
    enumerate_preference_equilibria,
    verify,
    verify_preference_game,
)
from .errors import (
    GridLimitError,
    HypothesisError,
    ScaleOverflowError,
    UpConsistencyError,
    ValidationError,
)
from .instancefile import (
    dump_instance,
    instance_digest,
    load_instance,
    parse_instance,
    serialize_instance,
)
from .market import (
    SINGLE_COPY,
    UNLIMITED,
    Allocation,
    Buyer,
    Market,
    allocate,
    best_response,
    is_market_clearing,
)
from .setfn import Classification, SetFunction, items_of, mask_of
from .welfare import (
    WelfareAudit,
    harmonic,
    hm_bound_audit,
    opt_welfare,
    poa_pos,
    social_welfare,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AscentTrace",
    "BudgetReport",
    "Buyer",
    "Classification",
    "ConditionReport",
    "GridLimitError",
    "HypothesisError",
    "Market",
    "ScaleOverflowError",
    "SetFunction",
    "SINGLE_COPY",
    "UNLIMITED",
    "UpConsistencyError",
    "ValidationError",
    "Verdict",
    "WelfareAudit",
    "allocate",
    "best_deviation",
    "best_response",
    "boundary_pricing",
    "breakpoints",
    "budgeted_verify",
    "check_condition_set1",
    "check_condition_set2",
    "construct_eps_ne",
    "decide_mc_pne",
    "dump_instance",
    "eliminate_costs",
    "enumerate_grid_equilibria",
    "enumerate_preference_equilibria",
    "harmonic",
    "hm_bound_audit",
    "instance_digest",
    "is_market_clearing",
    "items_of",
    "load_instance",
    "mask_of",
    "mc_condition",
    "opt_welfare",
    "parse_instance",
    "poa_pos",
    "serialize_instance",
    "social_welfare",
    "unique_mc_pricing",
    "uniqueness_condition",
    "verify",
    "verify_preference_game",
    "with_costs",
]
