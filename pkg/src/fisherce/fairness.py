"""Fairness certificates: maximin shares, envy notions and weighted Nash welfare."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .demand import CeCertificate, verify_ce
from .errors import CapExceeded, TheoremAlarm
from .frontier import enumerate_allocations, shares
from .market import DEFAULT_CAPS, Allocation, Caps, Market, fmt, integer_row, to_fraction, value_point

# ---------------------------------------------------------------- maximin share


def mms_value(values: Sequence, ell: int, d: int, caps: Caps = DEFAULT_CAPS) -> Fraction:
    """Best value of the worst ``ell`` parts over all partitions into ``d`` parts.

    Parts may be empty.  Partitions are enumerated unlabeled (restricted
    growth strings) so each multiset of parts is visited once.
    """
    if not (1 <= ell <= d):
        raise ValueError("need 1 <= ell <= d")
    vals = [to_fraction(v) for v in values]
    m = len(vals)
    blocks_max = min(d, m)
    if blocks_max**m > caps.max_assignments:
        raise CapExceeded(f"{blocks_max}^{m} partitions exceeds the limit")
    ints, den = integer_row(vals) if vals else ([], 1)
    best = 0
    sums: list[int] = []

    def visit(j: int):
        nonlocal best
        if j == m:
            parts = sorted(sums + [0] * (d - len(sums)))
            worst = sum(parts[:ell])
            if worst > best:
                best = worst
            return
        for b in range(len(sums)):
            sums[b] += ints[j]
            visit(j + 1)
            sums[b] -= ints[j]
        if len(sums) < blocks_max:
            sums.append(ints[j])
            visit(j + 1)
            sums.pop()

    visit(0)
    return Fraction(best, den)


@dataclass(frozen=True)
class MmsCheck:
    agent: int
    ell: int
    d: int
    value: Fraction
    met: bool


def mms_checks(market: Market, budgets, allocation: Allocation, d_max: int, caps: Caps = DEFAULT_CAPS) -> list[MmsCheck]:
    """Every ``ell``-out-of-``d`` share with ``ell/d <= b_i`` and ``d <= d_max``."""
    bs = tuple(to_fraction(b) for b in budgets)
    out = []
    cache: dict = {}
    for i in range(market.n):
        own = market.value(i, allocation.bundle(i))
        for d in range(1, d_max + 1):
            for ell in range(1, d + 1):
                if Fraction(ell, d) > bs[i]:
                    break
                key = (i, ell, d)
                if key not in cache:
                    cache[key] = mms_value(market.values[i], ell, d, caps)
                out.append(MmsCheck(i, ell, d, cache[key], own >= cache[key]))
    return out


def check_ce_mms_guarantee(market: Market, certificate: CeCertificate, d_max: int,
                           caps: Caps = DEFAULT_CAPS, raise_on_violation: bool = True) -> list[MmsCheck]:
    """Maximin-share checks on a CE allocation; a CE must meet all of them."""
    again = verify_ce(market, certificate.budgets, certificate.allocation, certificate.prices, caps)
    if not again.ok:
        raise ValueError(f"certificate does not verify: {again}")
    checks = mms_checks(market, certificate.budgets, certificate.allocation, d_max, caps)
    bad = [c for c in checks if not c.met]
    if bad and raise_on_violation:
        raise TheoremAlarm(f"CE misses a maximin share: {bad[0]}")
    return checks


# ---------------------------------------------------------------- envy


@dataclass(frozen=True)
class EnvyReport:
    ef1: bool
    ef1_star: bool
    justified_ef_coalitions: bool
    ef1_witness: tuple[int, int] | None = None  # (i, k): i envies k after removing any one item
    ef1_star_witness: tuple[int, int, int] | None = None  # (i, k, j)
    justified_ef_witness: tuple[int, tuple[int, ...]] | None = None  # (i, K)


def envy_checks(market: Market, budgets, allocation: Allocation) -> EnvyReport:
    """EF-1, EF-1* and justified envy-freeness for coalitions.

    "Agent i does not envy bundle X" is read as ``v_i(X) <= v_i(S_i)``.
    """
    bs = tuple(to_fraction(b) for b in budgets)
    n = market.n
    bundles = allocation.bundles(n)
    own = [market.value(i, bundles[i]) for i in range(n)]
    ef1_w = ef1s_w = jef_w = None
    for i in range(n):
        for k in range(n):
            if i == k or not bundles[k]:
                continue
            total = market.value(i, bundles[k])
            drops = [(j, total - market.values[i][j]) for j in bundles[k]]
            if ef1_w is None and not any(rest <= own[i] for _, rest in drops):
                ef1_w = (i, k)
            if ef1s_w is None:
                bad = next((j for j, rest in drops if rest > own[i]), None)
                if bad is not None:
                    ef1s_w = (i, k, bad)
    for i in range(n):
        others = [k for k in range(n) if k != i]
        for size in range(1, len(others) + 1):
            for K in itertools.combinations(others, size):
                if bs[i] < sum(bs[k] for k in K):
                    continue
                union = [j for k in K for j in bundles[k]]
                if market.value(i, union) > own[i]:
                    jef_w = jef_w or (i, K)
    return EnvyReport(ef1_w is None, ef1s_w is None, jef_w is None, ef1_w, ef1s_w, jef_w)


# ---------------------------------------------------------------- Nash welfare

_EXACT_BIT_LIMIT = 1 << 22


def _weights(budgets) -> list[int]:
    ints, _ = integer_row([to_fraction(b) for b in budgets])
    return ints


def _compare_products(a: Sequence[Fraction], b: Sequence[Fraction], weights: Sequence[int]) -> int:
    """Sign of ``prod a_i^w_i - prod b_i^w_i`` for positive entries."""
    bits = sum(w * (x.numerator.bit_length() + x.denominator.bit_length())
               for w, xs in zip(weights, zip(a, b)) for x in xs)
    if bits > _EXACT_BIT_LIMIT:
        raise CapExceeded("budget denominators too large for exact weighted-product comparison")
    pa = pb = Fraction(1)
    for w, x, y in zip(weights, a, b):
        pa *= x**w
        pb *= y**w
    return (pa > pb) - (pa < pb)


def _nash_better(p, q, weights) -> bool:
    """Whether value point ``p`` strictly beats ``q`` under the zero-factor convention."""
    p_pos = all(v > 0 for v in p)
    q_pos = all(v > 0 for v in q)
    if p_pos != q_pos:
        return p_pos
    if p_pos:
        return _compare_products(p, q, weights) > 0
    # both have zero factors: compare the products of the positive factors
    pa = [v if v > 0 else Fraction(1) for v in p]
    qa = [v if v > 0 else Fraction(1) for v in q]
    return _compare_products(pa, qa, weights) > 0


def nash_welfare_argmax(market: Market, budgets, caps: Caps = DEFAULT_CAPS) -> Allocation:
    """Allocation maximizing ``prod_i v_i(S_i)^{b_i}``; first in enumeration order on ties."""
    weights = _weights(budgets)
    best = best_pt = None
    for alloc in enumerate_allocations(market, caps):
        pt = value_point(market, alloc)
        if best is None or _nash_better(pt, best_pt, weights):
            best, best_pt = alloc, pt
    return best


# ---------------------------------------------------------------- report


@dataclass(frozen=True)
class FairnessReport:
    budget_proportional: tuple[bool, ...]
    truncated_share_met: tuple[bool, ...] | None
    augmented_share_met: tuple[bool, ...] | None
    envy: EnvyReport
    mms_results: tuple[MmsCheck, ...] = ()
    nash_welfare_optimal: bool | None = None
    values: tuple[Fraction, ...] = field(default=())

    def to_dict(self) -> dict:
        e = self.envy
        return {
            "values": [fmt(v) for v in self.values],
            "budget_proportional": list(self.budget_proportional),
            "truncated_share_met": _opt_list(self.truncated_share_met),
            "augmented_share_met": _opt_list(self.augmented_share_met),
            "ef1": e.ef1,
            "ef1_witness": e.ef1_witness,
            "ef1_star": e.ef1_star,
            "ef1_star_witness": e.ef1_star_witness,
            "justified_ef_coalitions": e.justified_ef_coalitions,
            "justified_ef_witness": [e.justified_ef_witness[0], list(e.justified_ef_witness[1])]
            if e.justified_ef_witness else None,
            "mms_results": [
                {"agent": c.agent, "ell": c.ell, "d": c.d, "value": fmt(c.value), "met": c.met}
                for c in self.mms_results
            ],
            "nash_welfare_optimal": self.nash_welfare_optimal,
        }


def _opt_list(x):
    return list(x) if x is not None else None


def fairness_report(market: Market, budgets, allocation: Allocation, mms_d_max: int | None = None,
                    nash: bool = False, caps: Caps = DEFAULT_CAPS) -> FairnessReport:
    bs = tuple(to_fraction(b) for b in budgets)
    point = value_point(market, allocation)
    prof = [shares(market, bs, i, caps) for i in range(market.n)]
    trunc = tuple(point[i] >= prof[i].b_minus for i in range(market.n))
    aug = tuple(point[i] >= prof[i].b_plus for i in range(market.n))
    mms = tuple(mms_checks(market, bs, allocation, mms_d_max, caps)) if mms_d_max else ()
    nash_opt = None
    if nash:
        best = nash_welfare_argmax(market, bs, caps)
        w = _weights(bs)
        nash_opt = not _nash_better(value_point(market, best), point, w)
    return FairnessReport(
        tuple(point[i] >= bs[i] for i in range(market.n)), trunc, aug,
        envy_checks(market, bs, allocation), mms, nash_opt, point,
    )
