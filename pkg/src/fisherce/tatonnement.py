"""Integer-price tâtonnement with randomized update scheduling.

Prices start at 0.  Each round computes every agent's demand witness; items
wanted by two or more agents go up by ``price_step`` and items nobody wants go
down (never below 0).  In the randomized variant the round visits the items
that need a change in random order and, after each single-item update, stops
early with probability ``1 - continue_probability``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .demand import CeCertificate, verify_ce
from .market import DEFAULT_CAPS, Allocation, Caps, Market, check_subset_cap, integer_row, lex_key, to_fraction

VARIANTS = ("randomized", "single", "all")


@dataclass(frozen=True)
class TatonnementConfig:
    max_iterations: int = 20000
    price_step: int = 1
    continue_probability: Fraction = Fraction(1, 2)
    rng_seed: int = 0
    budget_scale: int = 1000
    variant: str = "randomized"

    def __post_init__(self):
        p = to_fraction(self.continue_probability)
        object.__setattr__(self, "continue_probability", p)
        if not 0 < p < 1:
            raise ValueError("continue_probability must lie strictly between 0 and 1")
        if self.price_step < 1 or self.budget_scale < 1 or self.max_iterations < 0:
            raise ValueError("price_step and budget_scale must be positive, max_iterations nonnegative")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class TatonnementTrace:
    converged: bool
    iterations_used: int
    final_prices: tuple[int, ...]
    final_allocation: Allocation | None
    price_history_summary: tuple[tuple[int, int, int], ...]  # per item (min, max, final)
    integer_budgets: tuple[int, ...]
    budget_scale: int
    certificate: CeCertificate | None = None

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations_used": self.iterations_used,
            "final_prices": list(self.final_prices),
            "final_allocation": list(self.final_allocation.owner) if self.final_allocation else None,
            "price_history_summary": [
                {"min": lo, "max": hi, "final": last} for lo, hi, last in self.price_history_summary
            ],
            "integer_budgets": list(self.integer_budgets),
            "budget_scale": self.budget_scale,
        }


def integerize_budgets(budgets: Sequence, scale: int) -> tuple[int, ...]:
    """``round(b_i * scale)`` for every agent; each must stay positive."""
    out = tuple(round(to_fraction(b) * scale) for b in budgets)
    if any(b <= 0 for b in out):
        raise ValueError(f"budget scale {scale} rounds a budget to zero")
    return out


class _DemandTable:
    """Bundles sorted by decreasing value (lexicographic among equal values).

    An agent's demand witness is the first bundle in this order she can
    afford, which matches the exact demand oracle's tie-break.
    """

    def __init__(self, values: Sequence[Fraction], m: int):
        ints, _ = integer_row(values)
        masks = sorted(range(1 << m), key=lambda s: (-sum(ints[j] for j in range(m) if s >> j & 1), lex_key(s)))
        self.masks = np.array(masks, dtype=np.int64)
        self.bits = ((self.masks[:, None] >> np.arange(m)) & 1).astype(np.int64)

    def witness(self, prices: np.ndarray, budget: int) -> int:
        cost = self.bits @ prices
        return int(self.masks[int(np.argmax(cost <= budget))])  # the empty bundle is always affordable


def run_tatonnement(market: Market, budgets: Sequence, config: TatonnementConfig = TatonnementConfig(),
                    caps: Caps = DEFAULT_CAPS) -> TatonnementTrace:
    """Run the price process until demands partition the items or the iteration limit hits."""
    check_subset_cap(market.m, caps)
    m, n = market.m, market.n
    ib = integerize_budgets(budgets, config.budget_scale)
    tables = [_DemandTable(market.values[i], m) for i in range(n)]
    rng = np.random.default_rng(config.rng_seed)
    num, den = config.continue_probability.numerator, config.continue_probability.denominator
    step = config.price_step
    prices = np.zeros(m, dtype=np.int64)
    lo = [0] * m
    hi = [0] * m

    it = 0
    witnesses: list[int] = []
    converged = False
    while True:
        witnesses = [tables[i].witness(prices, ib[i]) for i in range(n)]
        counts = [sum(w >> j & 1 for w in witnesses) for j in range(m)]
        pending = [j for j in range(m) if counts[j] != 1]
        if not pending:
            converged = True
            break
        if it >= config.max_iterations:
            break
        it += 1
        if config.variant == "single":
            order = pending[:1]
        elif config.variant == "all":
            order = pending
        else:
            order = [pending[k] for k in rng.permutation(len(pending))]
        for pos, j in enumerate(order):
            if counts[j] >= 2:
                prices[j] += step
            else:
                prices[j] = max(0, prices[j] - step)
            p = int(prices[j])
            lo[j] = min(lo[j], p)
            hi[j] = max(hi[j], p)
            if config.variant == "randomized" and pos + 1 < len(order) and rng.integers(den) >= num:
                break

    final = tuple(int(p) for p in prices)
    summary = tuple((lo[j], hi[j], final[j]) for j in range(m))
    if not converged:
        return TatonnementTrace(False, it, final, None, summary, ib, config.budget_scale)
    owner = [0] * m
    for i, w in enumerate(witnesses):
        for j in range(m):
            if w >> j & 1:
                owner[j] = i
    alloc = Allocation(tuple(owner))
    scale = config.budget_scale
    cert = verify_ce(market, [Fraction(b, scale) for b in ib], alloc, [Fraction(p, scale) for p in final], caps)
    if not cert.ok:
        raise AssertionError(f"demands partition the items but the outcome does not verify: {cert}")
    return TatonnementTrace(True, it, final, alloc, summary, ib, scale, cert)
