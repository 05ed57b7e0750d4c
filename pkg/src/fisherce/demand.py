"""Exact demand oracle and competitive-equilibrium verification.

This is the judge every constructor in the package answers to: a price
vector is accepted only when enumerating every bundle confirms that each
agent's allocated bundle is a most-preferred affordable one.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import PreconditionError
from .market import (
    DEFAULT_CAPS,
    Allocation,
    BudgetProfile,
    Caps,
    Market,
    bundle_price,
    check_prices,
    check_subset_cap,
    fmt,
    integer_row,
    lex_key,
    mask_items,
    subset_sums,
    to_fraction,
)


@dataclass(frozen=True)
class DemandResult:
    best_value: Fraction
    witness: tuple[int, ...]
    affordable: bool = True


@dataclass(frozen=True)
class CeCertificate:
    allocation: Allocation
    prices: tuple[Fraction, ...]
    budgets: tuple[Fraction, ...]
    demand_values: tuple[Fraction, ...]

    ok = True

    def to_dict(self, market: Market | None = None) -> dict:
        out = {
            "owners": list(self.allocation.owner),
            "prices": [fmt(p) for p in self.prices],
            "budgets": [fmt(b) for b in self.budgets],
            "demand_values": [fmt(v) for v in self.demand_values],
        }
        if market is not None:
            out["bundles"] = {
                market.agent_names[i]: [market.item_names[j] for j in self.allocation.bundle(i)]
                for i in range(market.n)
            }
        return out


@dataclass(frozen=True)
class CeViolation:
    """Why a pair is not a CE: ``agent`` overspends or has an affordable better bundle."""

    agent: int
    kind: str  # "over_budget" | "better_bundle"
    bundle: tuple[int, ...]
    bundle_value: Fraction
    bundle_price: Fraction

    ok = False

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "kind": self.kind,
            "bundle": list(self.bundle),
            "bundle_value": fmt(self.bundle_value),
            "bundle_price": fmt(self.bundle_price),
        }


class _Oracle:
    """Integer-scaled bundle tables for one value row at one price vector."""

    def __init__(self, values: Sequence[Fraction], prices: Sequence[Fraction], budget: Fraction):
        vints, self.vden = integer_row(values)
        self.vsum = subset_sums(vints)
        # prices and budget share one denominator so comparisons stay integral
        pints, self.pden = integer_row(list(prices) + [budget])
        self.budget = pints[-1]
        self.psum = subset_sums(pints[:-1])

    def best(self) -> tuple[int, int]:
        """(best integer value, lexicographically smallest maximizing mask)."""
        budget, psum, vsum = self.budget, self.psum, self.vsum
        best = -1
        for mask in range(len(vsum)):
            if psum[mask] <= budget and vsum[mask] > best:
                best = vsum[mask]
        winners = [mask for mask in range(len(vsum)) if vsum[mask] == best and psum[mask] <= budget]
        return best, min(winners, key=lex_key)


def demand(values: Sequence, prices: Sequence, budget, caps: Caps = DEFAULT_CAPS) -> DemandResult:
    """Most valuable bundle with price at most ``budget``, by full enumeration.

    Ties between maximizers go to the lexicographically smallest item set.
    Values, prices and budget may be on any common scale.
    """
    values = [to_fraction(v) for v in values]
    prices = [to_fraction(p) for p in prices]
    check_subset_cap(len(values), caps)
    oracle = _Oracle(values, prices, to_fraction(budget))
    best, mask = oracle.best()
    return DemandResult(Fraction(best, oracle.vden), mask_items(mask), True)


def verify_ce(
    market: Market,
    budgets: BudgetProfile | Sequence,
    allocation: Allocation,
    prices: Sequence,
    caps: Caps = DEFAULT_CAPS,
) -> CeCertificate | CeViolation:
    """Certificate if ``(allocation, prices)`` is a CE at ``budgets``, else the first violation.

    The test is value-based: ``v_i(S_i)`` must equal the demand value, the
    allocated bundle need not be the oracle's witness.
    """
    check_subset_cap(market.m, caps)
    budgets = tuple(to_fraction(b) for b in budgets)
    prices = check_prices(prices, market.m)
    demand_values = []
    for i in range(market.n):
        own = allocation.bundle(i)
        own_price = bundle_price(prices, own)
        if own_price > budgets[i]:
            return CeViolation(i, "over_budget", own, market.value(i, own), own_price)
        oracle = _Oracle(market.values[i], prices, budgets[i])
        best, mask = oracle.best()
        own_value = oracle.vsum[allocation.mask(i)]
        if best > own_value:
            return CeViolation(
                i, "better_bundle", mask_items(mask),
                Fraction(best, oracle.vden), Fraction(oracle.psum[mask], oracle.pden),
            )
        demand_values.append(Fraction(best, oracle.vden))
    return CeCertificate(allocation, prices, budgets, tuple(demand_values))


def exhaust_budgets(market: Market, budgets, allocation: Allocation, prices: Sequence) -> tuple[Fraction, ...]:
    """Raise one owned item's price per agent until every budget is spent exactly."""
    budgets = tuple(to_fraction(b) for b in budgets)
    cert = verify_ce(market, budgets, allocation, prices)
    if not cert.ok:
        raise PreconditionError("prices do not support the allocation", "not_ce", cert)
    out = list(cert.prices)
    for i in range(market.n):
        own = allocation.bundle(i)
        if not own:
            raise PreconditionError(f"agent {i} holds nothing; budget cannot be exhausted", "empty_bundle", i)
        out[own[0]] += budgets[i] - bundle_price(out, own)
    out = tuple(out)
    if not verify_ce(market, budgets, allocation, out).ok:
        raise AssertionError("budget exhaustion broke the equilibrium")
    return out
