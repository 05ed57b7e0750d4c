"""Closed-form equilibrium price constructions for two additive agents.

Every constructor returns a certificate only after :func:`verify_ce` has
accepted it.  A construction that fails verification raises
:class:`AssertionError`: the preconditions were checked, so that would be a
bug rather than an unlucky input.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .demand import CeCertificate, _Oracle, verify_ce
from .errors import PreconditionError, TheoremAlarm
from .frontier import (
    in_genericity_exclusion_R,
    is_anti_proportional,
    is_budget_proportional,
    is_pareto_optimal,
    rectangle_T,
    shares,
    _require_no_proportional,
    _require_two,
)
from .market import (
    DEFAULT_CAPS,
    Allocation,
    Caps,
    Market,
    mask_items,
    normalize,
    subset_sums,
    to_fraction,
    validate_strictness,
    value_point,
)


@dataclass(frozen=True)
class CombinationParams:
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("combination weights must be nonnegative")
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("at least one combination weight must be positive")


def combination_prices(market: Market, params: CombinationParams) -> tuple[Fraction, ...]:
    """``p_j = alpha * v_1({j}) + beta * v_2({j})``."""
    _require_two(market)
    v1, v2 = market.values
    return tuple(params.alpha * a + params.beta * b for a, b in zip(v1, v2))


def _checked(market, budgets, allocation, prices, what) -> CeCertificate:
    cert = verify_ce(market, budgets, allocation, prices)
    if not cert.ok:
        raise AssertionError(f"{what} produced prices that are not a CE: {cert}")
    return cert


def proportional_params(market: Market, budgets, allocation: Allocation) -> CombinationParams:
    """Weights of the budget-exhausting combination pricing for a (anti-)proportional allocation."""
    b1, b2 = (to_fraction(b) for b in budgets)
    x1, x2 = value_point(market, allocation)
    denom = x1 + x2 - 1
    if denom == 0:
        return CombinationParams(Fraction(1), Fraction(0))
    alpha = (x2 - b2) / denom
    return CombinationParams(alpha, 1 - alpha)


def proportional_ce(market: Market, budgets, allocation: Allocation, caps: Caps = DEFAULT_CAPS) -> CeCertificate:
    """CE supporting a PO allocation that is budget-proportional or anti-proportional."""
    _require_two(market)
    bs = tuple(to_fraction(b) for b in budgets)
    point = value_point(market, allocation)
    if not (is_budget_proportional(point, bs) or is_anti_proportional(point, bs)):
        raise PreconditionError("allocation is neither budget-proportional nor anti-proportional",
                                "not_proportional", allocation)
    if not is_pareto_optimal(market, allocation, caps):
        raise PreconditionError("allocation is not Pareto optimal", "not_po", allocation)
    prices = combination_prices(market, proportional_params(market, bs, allocation))
    for i in range(2):
        own = sum((prices[j] for j in allocation.bundle(i)), Fraction(0))
        if own != bs[i]:
            raise AssertionError(f"combination pricing does not exhaust budget {i}")
    return _checked(market, bs, allocation, prices, "proportional_ce")


@dataclass(frozen=True)
class GammaPlan:
    """Inputs to the agent-scaled pricing: ``p_j = gamma * v_agent({j})``."""

    agent: int
    gamma: Fraction
    case: int  # 1: gamma = b_i / b_i^+, 2: gamma = b_k / v_i(S_check^k_k)
    allocation: Allocation


def gamma_plan(market: Market, budgets, agent: int, caps: Caps = DEFAULT_CAPS) -> GammaPlan:
    """Check the preconditions of the scaled-valuation construction and compute gamma.

    Raises :class:`PreconditionError` tagged ``proportional_exists``,
    ``anti_proportional_exists``, ``in_R`` or ``T_nonempty``.
    :func:`gamma_scaled_ce` adds ``not_strict`` when the prices fail on a
    market with ties.
    """
    _require_two(market)
    bs = tuple(to_fraction(b) for b in budgets)
    _require_no_proportional(market, bs, caps)
    member, r = in_genericity_exclusion_R(market, bs, agent, caps)
    if member:
        raise PreconditionError(f"budgets lie in R_{agent + 1} (index r={r})", "in_R", r)
    inside = rectangle_T(market, bs, agent, caps)
    if inside:
        raise PreconditionError(f"rectangle T_{agent + 1} holds {len(inside)} allocations", "T_nonempty", inside[0])
    i, k = agent, 1 - agent
    sh_i = shares(market, bs, i, caps)
    sh_k = shares(market, bs, k, caps)
    first = bs[i] / sh_i.b_plus
    # v_i of agent k's bundle in S_check^k
    second = bs[k] / (1 - sh_k.check_point[i])
    if first == second:
        raise AssertionError("gamma terms tie although budgets are outside R")
    if first > second:
        return GammaPlan(agent, first, 1, sh_i.S_check)
    return GammaPlan(agent, second, 2, sh_k.S_check)


def gamma_scaled_ce(market: Market, budgets, agent: int, caps: Caps = DEFAULT_CAPS) -> CeCertificate:
    """CE with prices proportional to one agent's values, giving both agents their truncated share."""
    bs = tuple(to_fraction(b) for b in budgets)
    plan = gamma_plan(market, bs, agent, caps)
    prices = tuple(plan.gamma * v for v in market.values[agent])
    cert = verify_ce(market, bs, plan.allocation, prices)
    if not cert.ok:
        if not validate_strictness(market, caps, limit=1).ok:
            # the construction relies on strict preferences; ties can defeat it
            raise PreconditionError(f"scaled-valuation prices fail on a market with ties: {cert}", "not_strict", cert)
        raise AssertionError(f"gamma_scaled_ce produced prices that are not a CE: {cert}")
    point = value_point(market, plan.allocation)
    for a in range(2):
        if point[a] < shares(market, bs, a, caps).b_minus:
            if not validate_strictness(market, caps, limit=1).ok:
                raise PreconditionError("scaled-valuation CE misses a truncated share on a market with ties",
                                        "not_strict", cert)
            raise TheoremAlarm(f"scaled-valuation CE misses agent {a}'s truncated share")
    return cert


def second_welfare_ce(market: Market, allocation: Allocation, caps: Caps = DEFAULT_CAPS):
    """Budgets and prices that support a given PO allocation; returns (budgets, prices, certificate).

    Budgets are normalized to sum to 1 and prices are scaled by the same factor.
    """
    _require_two(market)
    if not is_pareto_optimal(market, allocation, caps):
        raise PreconditionError("allocation is not Pareto optimal", "not_po", allocation)
    holders = set(allocation.owner)
    if len(holders) == 1:
        (h,) = holders
        prices = [Fraction(1)] * market.m
        raw = [Fraction(0), Fraction(0)]
        raw[h] = Fraction(market.m)
        raw[1 - h] = Fraction(1, 2)
    else:
        prices = list(combination_prices(market, CombinationParams(Fraction(1), Fraction(1))))
        raw = [sum((prices[j] for j in allocation.bundle(i)), Fraction(0)) for i in range(2)]
    scale = sum(raw, Fraction(0))
    budgets = normalize(raw)
    prices = tuple(p / scale for p in prices)
    return budgets, prices, _checked(market, budgets, allocation, prices, "second_welfare_ce")


def characterization_violation(market: Market, allocation: Allocation, prices):
    """First ``(i, S, T)`` breaking the swap condition, or None.

    For ``S`` inside agent ``i``'s bundle and ``T`` inside the other's: if both
    agents value ``S`` above ``T`` then ``p(S) > p(T)`` must hold.  With
    additive values the marginal values in the general condition reduce to
    plain bundle values.
    """
    _require_two(market)
    prices = tuple(to_fraction(p) for p in prices)
    vals = [market.bundle_values(a) for a in range(2)]
    price_of = subset_sums(prices)
    for i in range(2):
        k = 1 - i
        own_i, own_k = allocation.mask(i), allocation.mask(k)
        subs_i = list(_submasks(own_i))
        subs_k = list(_submasks(own_k))
        for s in subs_i:
            for t in subs_k:
                if vals[i][s] > vals[i][t] and vals[k][s] > vals[k][t] and not price_of[s] > price_of[t]:
                    return i, mask_items(s), mask_items(t)
    return None


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask



def scaled_valuation_ces(market: Market, budgets, agent: int, caps: Caps = DEFAULT_CAPS):
    """Every ``(gamma, allocation)`` CE with prices ``gamma * v_agent``, over all ``gamma > 0``.

    Affordable sets only change at the breakpoints ``b_h / v_agent(T)``, so
    it suffices to test each breakpoint, each midpoint between neighbours, and
    one point on either side of the whole range.
    """
    _require_two(market)
    bs = tuple(to_fraction(b) for b in budgets)
    row = market.values[agent]
    bundle_vals = subset_sums(list(row))[1:]
    cuts = sorted({b / v for b in bs for v in bundle_vals})
    probes = [cuts[0] / 2] + cuts + [(a + b) / 2 for a, b in zip(cuts, cuts[1:])] + [cuts[-1] + 1]
    full = market.full_mask
    found = []
    for g in sorted(set(probes)):
        prices = [g * v for v in row]
        demanded = []
        for h in range(2):
            o = _Oracle(market.values[h], prices, bs[h])
            best, _ = o.best()
            demanded.append({s for s in range(len(o.vsum)) if o.vsum[s] == best and o.psum[s] <= o.budget})
        for s in sorted(demanded[0]):
            if full ^ s in demanded[1]:
                found.append((g, Allocation.from_masks([s, full ^ s], market.m)))
    return found
