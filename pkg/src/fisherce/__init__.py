"""Competitive equilibria for discrete Fisher markets with additive valuations.

Exact rational arithmetic throughout.  The main entry points are
:func:`make_market` / :func:`parse_market`, :func:`solve`, :func:`verify_ce`
and :func:`fairness_report`.
"""
from .demand import CeCertificate, CeViolation, DemandResult, demand, exhaust_budgets, verify_ce
from .errors import CapExceeded, PreconditionError, TheoremAlarm, ValidationError
from .experiments import (
    BatchReport,
    GenSpec,
    crossing_budgets,
    generate_market,
    ladder_budgets,
    perturb_budgets,
    run_batch,
)
from .fairness import (
    FairnessReport,
    check_ce_mms_guarantee,
    envy_checks,
    fairness_report,
    mms_value,
    nash_welfare_argmax,
)
from .frontier import (
    ParetoFrontier,
    ShareProfile,
    classify_proportionality,
    enumerate_allocations,
    in_genericity_exclusion_R,
    is_pareto_optimal,
    pareto_frontier,
    rectangle_T,
    shares,
)
from .market import (
    DEFAULT_CAPS,
    Allocation,
    BudgetProfile,
    Caps,
    Market,
    identical_item_classes,
    make_budgets,
    make_market,
    normalize,
    parse_market,
    serialize_market,
    validate_strictness,
)
from .pricing import (
    CombinationParams,
    characterization_violation,
    combination_prices,
    gamma_plan,
    gamma_scaled_ce,
    proportional_ce,
    second_welfare_ce,
)
from .solver import CAP_EXCEEDED, CE_FOUND, NO_CE_EXISTS, SolveOutcome, max_slack, price_lp, solve, solve_almost_equal
from .tatonnement import TatonnementConfig, TatonnementTrace, run_tatonnement

__version__ = "0.1.0"
