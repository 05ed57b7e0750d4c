"""Allocation enumeration, Pareto-optimal sets and two-agent value-plane geometry.

Allocations are enumerated as owner vectors in lexicographic order
(``itertools.product(range(n), repeat=m)``, item 0 most significant).  When
identical items make several allocations share a value point, the frontier
keeps the first one in that order as the representative.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .errors import PreconditionError
from .market import (
    DEFAULT_CAPS,
    Allocation,
    BudgetProfile,
    Caps,
    Market,
    check_assignment_cap,
    integer_row,
    to_fraction,
)


def enumerate_allocations(market: Market, caps: Caps = DEFAULT_CAPS) -> Iterator[Allocation]:
    """Every owner vector exactly once, lexicographic order."""
    check_assignment_cap(market.n, market.m, caps)
    for owner in itertools.product(range(market.n), repeat=market.m):
        yield Allocation(owner)


class _Table:
    """Value points of every allocation, integer-scaled per agent."""

    def __init__(self, market: Market):
        rows = [integer_row(r) for r in market.values]
        self.dens = [d for _, d in rows]
        ints = [r for r, _ in rows]
        n, m = market.n, market.m
        self.owners = []
        self.points = []
        for owner in itertools.product(range(n), repeat=m):
            pt = [0] * n
            for j, o in enumerate(owner):
                pt[o] += ints[o][j]
            self.owners.append(owner)
            self.points.append(tuple(pt))
        # one representative per point: the first owner vector in enumeration order
        first: dict[tuple, int] = {}
        for idx, pt in enumerate(self.points):
            first.setdefault(pt, idx)
        self.first = first
        self.frontier_idx = self._non_dominated(list(first.values()), n)

    def _non_dominated(self, idxs, n):
        pts = self.points
        order = sorted(idxs, key=lambda k: pts[k], reverse=True)
        kept = []
        if n == 2:
            best2 = -1
            for k in order:
                if pts[k][1] > best2:
                    kept.append(k)
                    best2 = pts[k][1]
        else:
            for k in order:
                p = pts[k]
                if not any(all(q[a] >= p[a] for a in range(n)) for q in (pts[f] for f in kept)):
                    kept.append(k)
        kept.sort(key=lambda k: pts[k])
        return kept

    def frac_point(self, idx):
        return tuple(Fraction(v, d) for v, d in zip(self.points[idx], self.dens))


@lru_cache(maxsize=32)
def _table(market: Market) -> _Table:
    return _Table(market)


def _get_table(market: Market, caps: Caps) -> _Table:
    check_assignment_cap(market.n, market.m, caps)
    return _table(market)


@dataclass(frozen=True)
class ParetoFrontier:
    """Distinct PO value points with canonical representative allocations.

    Sorted ascending by value point (for two agents: by ``v_1(S_1)``).
    """

    allocations: tuple[Allocation, ...]
    points: tuple[tuple[Fraction, ...], ...]

    def __len__(self):
        return len(self.allocations)

    def __iter__(self):
        return iter(zip(self.allocations, self.points))

    def contains_point(self, point) -> bool:
        return tuple(point) in set(self.points)

    def to_json(self) -> list[dict]:
        return [
            {"owners": list(a.owner), "value_point": [str(v) for v in p]}
            for a, p in zip(self.allocations, self.points)
        ]


def pareto_frontier(market: Market, caps: Caps = DEFAULT_CAPS) -> ParetoFrontier:
    t = _get_table(market, caps)
    return ParetoFrontier(
        tuple(Allocation(t.owners[k]) for k in t.frontier_idx),
        tuple(t.frac_point(k) for k in t.frontier_idx),
    )


def all_value_points(market: Market, caps: Caps = DEFAULT_CAPS) -> list[tuple[Allocation, tuple[Fraction, ...]]]:
    t = _get_table(market, caps)
    return [(Allocation(o), t.frac_point(k)) for k, o in enumerate(t.owners)]


def is_pareto_optimal(market: Market, allocation: Allocation, caps: Caps = DEFAULT_CAPS) -> bool:
    from .market import value_point

    return pareto_frontier(market, caps).contains_point(value_point(market, allocation))


def dominates(p, q) -> bool:
    """Value point ``p`` weakly improves every coordinate of ``q`` and one strictly."""
    return all(a >= b for a, b in zip(p, q)) and any(a > b for a, b in zip(p, q))


# ---------------------------------------------------------------- shares

@dataclass(frozen=True)
class ShareProfile:
    """Truncated share ``b_minus`` (witness ``S_hat``) and augmented share ``b_plus`` (``S_check``)."""

    agent: int
    budget: Fraction
    b_minus: Fraction
    b_plus: Fraction
    S_hat: Allocation
    S_check: Allocation
    hat_point: tuple[Fraction, ...]
    check_point: tuple[Fraction, ...]


def shares(market: Market, budgets, agent: int, caps: Caps = DEFAULT_CAPS) -> ShareProfile:
    b = to_fraction(budgets[agent])
    front = pareto_frontier(market, caps)
    below = [(p[agent], k) for k, p in enumerate(front.points) if p[agent] <= b]
    above = [(p[agent], k) for k, p in enumerate(front.points) if p[agent] >= b]
    if not below or not above:
        # unreachable for normalized inputs: some PO allocation gives agent everything
        # or dominates the one that does, and one gives her nothing or dominates that
        raise PreconditionError(f"no PO allocation on one side of budget {b} for agent {agent}", "empty_share_set")
    # max/min keep the earliest frontier index on ties
    _, hat = max(below, key=lambda t: (t[0], -t[1]))
    _, chk = min(above, key=lambda t: (t[0], t[1]))
    return ShareProfile(
        agent, b, front.points[hat][agent], front.points[chk][agent],
        front.allocations[hat], front.allocations[chk], front.points[hat], front.points[chk],
    )


# ---------------------------------------------------------------- proportionality

@dataclass(frozen=True)
class ProportionalityClass:
    has_budget_proportional: bool
    has_anti_proportional_po: bool
    budget_proportional_witness: Allocation | None
    anti_proportional_witness: Allocation | None


def is_budget_proportional(point, budgets) -> bool:
    return all(v >= b for v, b in zip(point, budgets))


def is_anti_proportional(point, budgets) -> bool:
    return all(v <= b for v, b in zip(point, budgets)) and any(v < b for v, b in zip(point, budgets))


def classify_proportionality(market: Market, budgets, caps: Caps = DEFAULT_CAPS) -> ProportionalityClass:
    """Existence of budget-proportional / anti-proportional PO allocations, with witnesses.

    A budget-proportional allocation exists iff a PO one does (a dominating
    allocation stays proportional), so the frontier suffices.
    """
    bs = tuple(to_fraction(b) for b in budgets)
    front = pareto_frontier(market, caps)
    prop = next((a for a, p in front if is_budget_proportional(p, bs)), None)
    anti = next((a for a, p in front if is_anti_proportional(p, bs)), None)
    return ProportionalityClass(prop is not None, anti is not None, prop, anti)


def _require_two(market: Market):
    if market.n != 2:
        raise PreconditionError("value-plane geometry is defined for two agents only", "n_not_2")


def _require_no_proportional(market, budgets, caps):
    cls = classify_proportionality(market, budgets, caps)
    if cls.has_budget_proportional:
        raise PreconditionError("a budget-proportional allocation exists", "proportional_exists",
                                cls.budget_proportional_witness)
    if cls.has_anti_proportional_po:
        raise PreconditionError("an anti-proportional PO allocation exists", "anti_proportional_exists",
                                cls.anti_proportional_witness)


# ---------------------------------------------------------------- T_i and R_i

def rectangle_T(market: Market, budgets, agent: int, caps: Caps = DEFAULT_CAPS) -> list[Allocation]:
    """Allocations strictly inside the open rectangle bounded by the two truncated-share witnesses.

    Inside means ``v_i(S_hat^i_i) < v_i(S_i) < v_i(S_hat^k_i)`` and
    ``0 < v_k(S_k) < v_k(S_hat^k_k)``.
    """
    _require_two(market)
    _require_no_proportional(market, budgets, caps)
    i, k = agent, 1 - agent
    hat_i = shares(market, budgets, i, caps).hat_point
    hat_k = shares(market, budgets, k, caps).hat_point
    out = []
    for alloc, p in all_value_points(market, caps):
        if hat_i[i] < p[i] < hat_k[i] and 0 < p[k] < hat_k[k]:
            out.append(alloc)
    return out


def in_genericity_exclusion_R(market: Market, budgets, agent: int, caps: Caps = DEFAULT_CAPS) -> tuple[bool, int | None]:
    """Whether the budget pair lies in the zero-measure set R_agent; returns (member, r).

    ``r`` is 1-based over the PO allocations sorted by the agent's value, and
    only consecutive pairs ``(r, r+1)`` with ``r <= d-1`` are tested.
    """
    _require_two(market)
    b = to_fraction(budgets[agent])
    vals = sorted({p[agent] for p in pareto_frontier(market, caps).points})
    for r in range(len(vals) - 1):
        lo, hi = vals[r], vals[r + 1]
        # b / hi == (1 - b) / (1 - lo), cross-multiplied
        if b * (1 - lo) == (1 - b) * hi:
            return True, r + 1
    return False, None


def in_any_R(market: Market, budgets, caps: Caps = DEFAULT_CAPS) -> bool:
    return any(in_genericity_exclusion_R(market, budgets, i, caps)[0] for i in (0, 1))
