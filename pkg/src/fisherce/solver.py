"""Complete CE search: theorem-guided constructions first, then exhaustive LP.

The exhaustive phase is complete because every CE allocation is Pareto
optimal, so trying supporting prices for every PO allocation either finds a
CE or proves none exists.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .demand import CeCertificate, verify_ce
from .errors import CapExceeded, PreconditionError, TheoremAlarm
from .frontier import _get_table, classify_proportionality, in_any_R, shares
from .market import (
    DEFAULT_CAPS,
    Allocation,
    BudgetProfile,
    Caps,
    Market,
    check_assignment_cap,
    check_subset_cap,
    fmt,
    integer_row,
    mask_items,
    subset_sums,
    to_fraction,
    validate_strictness,
    value_point,
)
from .pricing import gamma_scaled_ce, proportional_ce
from .simplex import maximize

log = logging.getLogger(__name__)

CE_FOUND = "CE_FOUND"
NO_CE_EXISTS = "NO_CE_EXISTS"
CAP_EXCEEDED = "CAP_EXCEEDED"

STRATEGIES = ("auto", "proportional", "gamma", "exhaustive")


@dataclass(frozen=True)
class SolveOutcome:
    status: str
    certificate: CeCertificate | None = None
    strategy: str | None = None  # proportional | gamma_scaled | exhaustive_lp
    truncated_share_met: tuple[bool, ...] | None = None
    strictness_violated: bool = False
    detail: dict = field(default_factory=dict, compare=False)

    def to_dict(self, market: Market | None = None) -> dict:
        return {
            "status": self.status,
            "strategy": self.strategy,
            "certificate": self.certificate.to_dict(market) if self.certificate else None,
            "truncated_share_met": list(self.truncated_share_met) if self.truncated_share_met else None,
            "strictness_violated": self.strictness_violated,
            **({"detail": self.detail} if self.detail else {}),
        }


# ---------------------------------------------------------------- price LP

def minimal_better_bundles(values: Sequence[Fraction], threshold: Fraction) -> list[int]:
    """Masks ``T`` with ``v(T) > threshold`` such that dropping any item loses that."""
    ints, den = integer_row(values)
    thr = threshold * den  # compare in the integer scale
    vsum = subset_sums(ints)
    out = []
    for mask in range(1, len(vsum)):
        v = vsum[mask]
        if v <= thr:
            continue
        low = min(ints[j] for j in mask_items(mask))
        if v - low <= thr:
            out.append(mask)
    return out


def max_slack(market: Market, budgets, allocation: Allocation, caps: Caps = DEFAULT_CAPS):
    """Solve the max-slack LP; returns ``(delta, prices)``.

    Maximize ``delta`` over ``p >= 0`` with ``p(S_i) <= b_i`` and
    ``p(T) >= b_i + delta`` for every agent and every inclusion-minimal bundle
    ``T`` she strictly prefers to ``S_i``.  Supersets need no row: prices are
    nonnegative, so their constraint is implied.
    """
    check_subset_cap(market.m, caps)
    bs = tuple(to_fraction(b) for b in budgets)
    m = market.m
    # variables: p_0..p_{m-1}, d = delta + 1 >= 0 (delta >= -1 always feasible at p = 0)
    A, rhs = [], []
    for i in range(market.n):
        own = allocation.bundle(i)
        if own:
            row = [0] * (m + 1)
            for j in own:
                row[j] = 1
            A.append(row)
            rhs.append(bs[i])
    for i in range(market.n):
        own_value = market.value(i, allocation.bundle(i))
        for mask in minimal_better_bundles(market.values[i], own_value):
            row = [0] * (m + 1)
            for j in mask_items(mask):
                row[j] = -1
            row[m] = 1
            A.append(row)
            rhs.append(1 - bs[i])
    # d <= 2 (delta <= 1) keeps the LP bounded even with no preference rows
    cap_row = [0] * (m + 1)
    cap_row[m] = 1
    A.append(cap_row)
    rhs.append(Fraction(2))
    c = [0] * m + [1]
    sol = maximize(c, A, rhs)
    return sol.objective - 1, tuple(sol.x[:m])


def price_lp(market: Market, budgets, allocation: Allocation, caps: Caps = DEFAULT_CAPS):
    """Supporting prices for ``allocation`` or None when none exist."""
    delta, prices = max_slack(market, budgets, allocation, caps)
    if delta <= 0:
        return None
    return prices


# ---------------------------------------------------------------- solve

def _truncated_flags(market, budgets, allocation, caps):
    point = value_point(market, allocation)
    return tuple(point[i] >= shares(market, budgets, i, caps).b_minus for i in range(market.n))


def _found(market, budgets, cert, strategy, strict_bad, caps, **detail):
    if not verify_ce(market, budgets, cert.allocation, cert.prices).ok:
        raise AssertionError(f"{strategy} returned an unverified certificate")
    return SolveOutcome(CE_FOUND, cert, strategy, _truncated_flags(market, budgets, cert.allocation, caps),
                        strict_bad, dict(detail))


def _po_candidates(market: Market, caps: Caps):
    """Every allocation whose value point is Pareto optimal, frontier order first."""
    t = _get_table(market, caps)
    rank = {t.points[k]: r for r, k in enumerate(t.frontier_idx)}
    cands = [(rank[pt], idx) for idx, pt in enumerate(t.points) if pt in rank]
    cands.sort()
    for _, idx in cands:
        yield Allocation(t.owners[idx])


def exhaustive_search(market: Market, budgets, caps: Caps = DEFAULT_CAPS):
    """First PO allocation (lowest frontier index) with supporting prices."""
    for alloc in _po_candidates(market, caps):
        prices = price_lp(market, budgets, alloc, caps)
        if prices is not None:
            cert = verify_ce(market, budgets, alloc, prices)
            if not cert.ok:
                raise AssertionError(f"LP prices fail verification: {cert}")
            return cert
    return None


def solve(market: Market, budgets: BudgetProfile | Sequence, strategy: str = "auto",
          caps: Caps = DEFAULT_CAPS) -> SolveOutcome:
    """Find a CE or prove there is none.

    Order for ``auto``: budget-proportional PO allocation, anti-proportional
    PO allocation, scaled-valuation pricing for either agent (two agents
    only), exhaustive LP over the Pareto frontier.  A forced ``strategy``
    that does not apply raises :class:`PreconditionError`.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    bs = tuple(to_fraction(b) for b in budgets)
    try:
        check_subset_cap(market.m, caps)
        check_assignment_cap(market.n, market.m, caps)
    except CapExceeded as exc:
        return SolveOutcome(CAP_EXCEEDED, detail={"reason": str(exc)})
    strict_bad = not validate_strictness(market, caps, limit=1).ok
    two = market.n == 2

    if strategy in ("auto", "proportional") and two:
        cls = classify_proportionality(market, bs, caps)
        for witness, kind in ((cls.budget_proportional_witness, "budget_proportional"),
                              (cls.anti_proportional_witness, "anti_proportional")):
            if witness is not None:
                cert = proportional_ce(market, bs, witness, caps)
                return _found(market, bs, cert, "proportional", strict_bad, caps, kind=kind)
        if strategy == "proportional":
            raise PreconditionError("no budget-proportional or anti-proportional PO allocation", "not_applicable")

    if strategy in ("auto", "gamma") and two:
        reasons = {}
        for agent in (0, 1):
            try:
                cert = gamma_scaled_ce(market, bs, agent, caps)
            except PreconditionError as exc:
                reasons[agent] = exc.reason
                continue
            return _found(market, bs, cert, "gamma_scaled", strict_bad, caps, agent=agent)
        log.debug("scaled-valuation pricing not applicable: %s", reasons)
        if strategy == "gamma":
            raise PreconditionError(f"scaled-valuation pricing not applicable: {reasons}", "not_applicable")

    if strategy in ("proportional", "gamma") and not two:
        raise PreconditionError("closed-form strategies need exactly two agents", "n_not_2")

    cert = exhaustive_search(market, bs, caps)
    if cert is not None:
        return _found(market, bs, cert, "exhaustive_lp", strict_bad, caps)
    return SolveOutcome(NO_CE_EXISTS, strictness_violated=strict_bad)


# ---------------------------------------------------------------- near-equal budgets

def almost_equal_budgets(epsilon: Fraction) -> tuple[Fraction, Fraction]:
    """``b_1 = (1/2 + eps) / (1 + eps)``, ``b_2 = 1 - b_1``."""
    b1 = (Fraction(1, 2) + epsilon) / (1 + epsilon)
    return b1, 1 - b1


@dataclass(frozen=True)
class AlmostEqualPoint:
    epsilon: Fraction
    budgets: tuple[Fraction, Fraction]
    outcome: SolveOutcome

    @property
    def alarm(self) -> bool:
        return self.outcome.status == NO_CE_EXISTS


def _equal_budget_ce(market: Market, bs, caps):
    """CE at the perturbed budgets reusing prices built for exactly equal budgets.

    Applies when some PO allocation gives both agents at least 1/2; the
    equal-budget combination prices survive a small enough perturbation.
    """
    half = (Fraction(1, 2), Fraction(1, 2))
    cls = classify_proportionality(market, half, caps)
    if cls.budget_proportional_witness is None:
        return None
    alloc = cls.budget_proportional_witness
    prices = proportional_ce(market, half, alloc, caps).prices
    cert = verify_ce(market, bs, alloc, prices)
    return cert if cert.ok else None


def solve_almost_equal(market: Market, epsilon_grid: Sequence, caps: Caps = DEFAULT_CAPS,
                       max_shrink: int = 64) -> list[AlmostEqualPoint]:
    """Solve at slightly unequal budgets for each epsilon of a decreasing grid.

    An epsilon whose budgets fall in R_1 or R_2 is halved until they do not.
    Raises :class:`TheoremAlarm` when no grid point has a CE.
    """
    if market.n != 2:
        raise PreconditionError("near-equal budget analysis is for two agents", "n_not_2")
    out = []
    for eps in epsilon_grid:
        eps = to_fraction(eps)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        for _ in range(max_shrink):
            bs = almost_equal_budgets(eps)
            if not in_any_R(market, bs, caps):
                break
            eps /= 2
        else:
            raise RuntimeError("could not leave the exclusion set by shrinking epsilon")
        cert = _equal_budget_ce(market, bs, caps)
        if cert is not None:
            strict_bad = not validate_strictness(market, caps, limit=1).ok
            outcome = _found(market, bs, cert, "proportional", strict_bad, caps, kind="equal_budget_prices")
        else:
            outcome = solve(market, bs, caps=caps)
        out.append(AlmostEqualPoint(eps, bs, outcome))
    if out and all(p.alarm for p in out):
        raise TheoremAlarm("no CE at any near-equal budget pair")
    return out


def outcome_summary(outcome: SolveOutcome) -> dict:
    cert = outcome.certificate
    return {
        "status": outcome.status,
        "strategy": outcome.strategy,
        "owners": list(cert.allocation.owner) if cert else None,
        "prices": [fmt(p) for p in cert.prices] if cert else None,
    }
