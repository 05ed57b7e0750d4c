"""Random instances, budget selection and batch runs.

Randomness comes from numpy's PCG64 generator.  Each instance in a batch
gets its own seed derived from ``(base_seed, index)`` through
``numpy.random.SeedSequence``, so any single instance can be regenerated
without replaying the batch that produced it.
"""
from __future__ import annotations

import hashlib
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .fairness import check_ce_mms_guarantee
from .frontier import classify_proportionality, in_any_R, pareto_frontier
from .market import DEFAULT_CAPS, BudgetProfile, Caps, Market, fmt, make_budgets, make_market, normalize, to_fraction
from .solver import CE_FOUND, NO_CE_EXISTS, solve

_TWO53 = 1 << 53
MAX_RESAMPLES = 10_000
BUDGET_MODES = ("crossing", "perturbed_equal", "ladder", "explicit")


def instance_seed(base_seed: int, index: int) -> int:
    """64-bit seed for instance ``index`` of a batch."""
    a, b = np.random.SeedSequence([base_seed, index]).generate_state(2, dtype=np.uint32)
    return int(a) << 32 | int(b)


@dataclass(frozen=True)
class GenSpec:
    m: int
    n: int = 2
    distribution: str = "uniform"  # uniform | pareto
    pareto_shape: Fraction = Fraction(2)
    identical_preferences: bool = False
    rng_seed: int = 0
    spliddit_like: bool = False  # integer points summing to 1000 per agent

    def __post_init__(self):
        if self.distribution not in ("uniform", "pareto"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.n < 2 or self.m < 1:
            raise ValueError("need n >= 2 and m >= 1")
        if self.spliddit_like and self.m > 1000:
            raise ValueError("1000 points cannot cover more than 1000 items")


def _draw_row(rng: np.random.Generator, spec: GenSpec) -> list[Fraction]:
    if spec.spliddit_like:
        cuts = sorted(int(c) for c in rng.choice(np.arange(1, 1000), size=spec.m - 1, replace=False))
        edges = [0] + cuts + [1000]
        return [Fraction(edges[k + 1] - edges[k]) for k in range(spec.m)]
    if spec.distribution == "uniform":
        # integers in [1, 2^53) keep every value positive and exactly representable
        return [Fraction(int(k), _TWO53) for k in rng.integers(1, _TWO53, size=spec.m)]
    shape = float(spec.pareto_shape)
    # numpy's pareto is the Lomax form; adding 1 gives scale-1 Pareto.  Fraction(float) is exact.
    return [Fraction(float(x) + 1.0) for x in rng.pareto(shape, size=spec.m)]


def generate_market(spec: GenSpec) -> Market:
    rng = np.random.default_rng(spec.rng_seed)
    first = _draw_row(rng, spec)
    rows = [first] + [list(first) if spec.identical_preferences else _draw_row(rng, spec) for _ in range(spec.n - 1)]
    return make_market(rows)


def market_digest(market: Market) -> str:
    text = "|".join(",".join(fmt(v) for v in row) for row in market.values)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------- budgets

_OFFSETS = (Fraction(1, 2), Fraction(1, 3), Fraction(3, 4))


def crossing_budgets(market: Market, caps: Caps = DEFAULT_CAPS) -> list[BudgetProfile]:
    """Budget pairs strictly between consecutive frontier points in both coordinates.

    For frontier neighbours ``(x_r, y_r)`` and ``(x_{r+1}, y_{r+1})`` the first
    budget lies in ``(x_r, x_{r+1})`` and the second in ``(y_{r+1}, y_r)``.
    Per gap we take the midpoint and two off-center points of that window,
    nudging a point by 1/1000 of the window while it lies in R_1 or R_2.
    Gaps where the window is empty are skipped.
    """
    if market.n != 2:
        raise PreconditionError("crossing budgets are defined for two agents", "n_not_2")
    pts = pareto_frontier(market, caps).points
    out = []
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        lo, hi = max(x0, 1 - y0), min(x1, 1 - y1)
        if lo >= hi:
            continue
        width = hi - lo
        for t in _OFFSETS:
            b1 = lo + t * width
            k = 0
            while in_any_R(market, (b1, 1 - b1), caps):
                k += 1
                b1 = lo + t * width + k * width / 1000
                if b1 >= hi:
                    raise RuntimeError("could not leave the exclusion set inside the window")
            bp = BudgetProfile((b1, 1 - b1))
            if classify_proportionality(market, bp, caps).has_budget_proportional:
                raise AssertionError("crossing budgets admit a budget-proportional allocation")
            out.append(bp)
    return out


def perturb_budgets(budgets: Sequence, epsilon, rng_seed: int, market: Market | None = None,
                    caps: Caps = DEFAULT_CAPS) -> BudgetProfile:
    """Add uniform jitter in ``(-eps, eps)`` to each budget and renormalize.

    Resamples while a budget is nonpositive, two budgets coincide, or (two
    agents, ``market`` given) the pair lies in R_1 or R_2.
    """
    eps = to_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    base = [to_fraction(b) for b in budgets]
    rng = np.random.default_rng(rng_seed)
    for _ in range(MAX_RESAMPLES):
        draws = rng.integers(1, _TWO53, size=len(base))
        raw = [b + eps * (2 * Fraction(int(k), _TWO53) - 1) for b, k in zip(base, draws)]
        if any(b <= 0 for b in raw):
            continue
        bs = normalize(raw)
        if len(set(bs)) < len(bs):
            continue
        if market is not None and market.n == 2 and in_any_R(market, bs, caps):
            continue
        return BudgetProfile(bs, tuple(raw))
    raise RuntimeError(f"no admissible perturbation after {MAX_RESAMPLES} samples")


def ladder_budgets(n: int, start: int = 100, step: int = 3) -> BudgetProfile:
    """``(start, start + step, start + 2 step, ...)`` normalized."""
    return make_budgets([start + step * k for k in range(n)], n)


# ---------------------------------------------------------------- batches

@dataclass(frozen=True)
class InstanceRecord:
    index: int
    seed: int
    digest: str
    m: int
    budgets: tuple[Fraction, ...]
    status: str
    strategy: str | None
    truncated_share_met: tuple[bool, ...] | None
    mms_ok: bool | None
    alarm: str | None
    seconds: float = field(default=0.0, compare=False)

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "index": self.index,
            "seed": self.seed,
            "digest": self.digest,
            "m": self.m,
            "budgets": [fmt(b) for b in self.budgets],
            "status": self.status,
            "strategy": self.strategy,
            "truncated_share_met": list(self.truncated_share_met) if self.truncated_share_met else None,
            "mms_ok": self.mms_ok,
            "alarm": self.alarm,
        }
        if timing:
            d["seconds"] = round(self.seconds, 6)
        return d


@dataclass(frozen=True)
class BatchReport:
    records: tuple[InstanceRecord, ...]
    theorem_covered: bool

    @property
    def existence_rate(self) -> Fraction:
        if not self.records:
            return Fraction(0)
        found = sum(r.status == CE_FOUND for r in self.records)
        return Fraction(found, len(self.records))

    @property
    def strategy_histogram(self) -> dict:
        return dict(sorted(Counter(r.strategy or r.status for r in self.records).items()))

    @property
    def alarms(self) -> list[InstanceRecord]:
        return [r for r in self.records if r.alarm]

    def to_dict(self, timing: bool = False) -> dict:
        return {
            "instances": len(self.records),
            "theorem_covered": self.theorem_covered,
            "existence_rate": fmt(self.existence_rate),
            "strategy_histogram": self.strategy_histogram,
            "alarms": [r.index for r in self.alarms],
            "records": [r.to_dict(timing) for r in self.records],
        }


def _budgets_for(mode, market, seed, epsilon, explicit, caps) -> list[BudgetProfile]:
    if mode == "crossing":
        return crossing_budgets(market, caps)
    if mode == "perturbed_equal":
        return [perturb_budgets([Fraction(1, market.n)] * market.n, epsilon, seed, market, caps)]
    if mode == "ladder":
        return [ladder_budgets(market.n)]
    if mode == "explicit":
        if explicit is None:
            raise ValueError("explicit budget mode needs budgets")
        return [make_budgets(explicit, market.n)]
    raise ValueError(f"unknown budget mode {mode!r}")


def is_theorem_covered(gen: GenSpec, mode: str) -> bool:
    """Regimes where two-agent existence is guaranteed for generic budgets."""
    if gen.n != 2:
        return False
    if mode == "perturbed_equal":
        return True
    return gen.identical_preferences and mode in ("perturbed_equal", "crossing", "ladder")


def run_batch(gen: GenSpec, budget_mode: str, count: int, strategy: str = "auto",
              m_choices: Sequence[int] | None = None, epsilon=Fraction(1, 1000),
              explicit_budgets: Sequence | None = None, mms_d_max: int = 0,
              caps: Caps = DEFAULT_CAPS) -> BatchReport:
    """Generate ``count`` markets, pick budgets by ``budget_mode``, solve and audit each.

    Every found CE was re-verified by the solver.  In theorem-covered regimes
    a nonexistence verdict or a missed truncated share on the closed-form
    path is recorded as an alarm instead of being counted silently.
    """
    if budget_mode not in BUDGET_MODES:
        raise ValueError(f"unknown budget mode {budget_mode!r}")
    covered = is_theorem_covered(gen, budget_mode)
    records = []
    for idx in range(count):
        seed = instance_seed(gen.rng_seed, idx)
        ms = list(m_choices) if m_choices else [gen.m]
        m = ms[seed % len(ms)]
        market = generate_market(replace(gen, m=m, rng_seed=seed))
        for bp in _budgets_for(budget_mode, market, seed, epsilon, explicit_budgets, caps):
            start = time.perf_counter()
            out = solve(market, bp, strategy=strategy, caps=caps)
            mms_ok = None
            if mms_d_max and out.certificate is not None:
                checks = check_ce_mms_guarantee(market, out.certificate, mms_d_max, caps, raise_on_violation=False)
                mms_ok = all(c.met for c in checks)
            alarm = None
            if covered and out.status == NO_CE_EXISTS:
                alarm = "no CE in a theorem-covered regime"
            elif covered and out.strategy != "exhaustive_lp" and out.truncated_share_met is not None \
                    and not all(out.truncated_share_met):
                alarm = "closed-form CE misses a truncated share"
            elif mms_ok is False:
                alarm = "CE misses a maximin share"
            records.append(InstanceRecord(
                len(records), seed, market_digest(market), m, tuple(bp), out.status, out.strategy,
                out.truncated_share_met, mms_ok, alarm, time.perf_counter() - start,
            ))
    return BatchReport(tuple(records), covered)
