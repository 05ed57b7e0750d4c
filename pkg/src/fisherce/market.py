"""Domain model for discrete Fisher markets with additive valuations.

All numbers that affect correctness are :class:`fractions.Fraction`.  Bundles
are represented internally as bitmasks (bit ``j`` set means item ``j`` is in
the bundle); the public types expose item indices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CapExceeded, ValidationError


@dataclass(frozen=True)
class Caps:
    """Enumeration limits.

    ``max_subset_items`` bounds every 2^m subset enumeration; ``max_assignments``
    bounds every n^m allocation enumeration.
    """

    max_subset_items: int = 14
    max_assignments: int = 4_000_000


DEFAULT_CAPS = Caps()


def check_subset_cap(m: int, caps: Caps = DEFAULT_CAPS) -> None:
    if m > caps.max_subset_items:
        raise CapExceeded(f"2^{m} bundles exceeds the limit of 2^{caps.max_subset_items}")


def check_assignment_cap(n: int, m: int, caps: Caps = DEFAULT_CAPS) -> None:
    if n**m > caps.max_assignments:
        raise CapExceeded(f"{n}^{m} allocations exceeds the limit of {caps.max_assignments}")


# ---------------------------------------------------------------- rationals

def to_fraction(x) -> Fraction:
    """Parse an exact rational from a string ("7.9", "79/10"), int or Fraction.

    Floats are rejected: their binary expansion is not what the user wrote.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ValidationError(f"not a number: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not an exact rational: {x!r}") from exc
    raise ValidationError(f"expected a numeric string, int or Fraction, got {type(x).__name__}")


def fmt(x: Fraction) -> str:
    """Fraction as the string used in every JSON output ("3/8", "1")."""
    return str(x)


def normalize(xs: Iterable) -> tuple[Fraction, ...]:
    """Divide every entry by the exact total so that the result sums to 1."""
    xs = tuple(to_fraction(x) for x in xs)
    if any(x < 0 for x in xs):
        raise ValidationError("negative entry cannot be normalized")
    total = sum(xs, Fraction(0))
    if total == 0:
        raise ValidationError("cannot normalize a vector that sums to 0")
    return tuple(x / total for x in xs)


# ---------------------------------------------------------------- bundles

def mask_items(mask: int) -> tuple[int, ...]:
    """Item indices in a bitmask, ascending."""
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def items_mask(items: Iterable[int]) -> int:
    mask = 0
    for j in items:
        mask |= 1 << j
    return mask


def lex_key(mask: int) -> tuple[int, ...]:
    """Sort key realising the lexicographic order on item sets.

    Sets are compared as ascending index tuples, so () < (0,) < (0, 1) < (1,).
    """
    return mask_items(mask)


def subset_sums(weights: Sequence) -> list:
    """``out[mask] = sum(weights[j] for j in mask)`` for all 2^m masks."""
    out = [0] * (1 << len(weights))
    for mask in range(1, len(out)):
        low = mask & -mask
        out[mask] = out[mask ^ low] + weights[low.bit_length() - 1]
    return out


def integer_row(row: Sequence[Fraction]) -> tuple[list[int], int]:
    """Scale a rational row to integers: returns (ints, denominator)."""
    den = 1
    for x in row:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return [int(x * den) for x in row], den


# ---------------------------------------------------------------- model

@dataclass(frozen=True)
class Market:
    """Items, agents and normalized additive values ``values[i][j] = v_i({j})``."""

    item_names: tuple[str, ...]
    agent_names: tuple[str, ...]
    values: tuple[tuple[Fraction, ...], ...]
    raw_values: tuple[tuple[Fraction, ...], ...] | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.agent_names)

    @property
    def m(self) -> int:
        return len(self.item_names)

    @property
    def full_mask(self) -> int:
        return (1 << self.m) - 1

    def value(self, i: int, items: Iterable[int]) -> Fraction:
        row = self.values[i]
        return sum((row[j] for j in items), Fraction(0))

    def mask_value(self, i: int, mask: int) -> Fraction:
        return self.value(i, mask_items(mask))

    def bundle_values(self, i: int) -> list[Fraction]:
        """Agent ``i``'s value of every bundle, indexed by bitmask."""
        ints, den = integer_row(self.values[i])
        return [Fraction(v, den) for v in subset_sums(ints)]


@dataclass(frozen=True)
class BudgetProfile:
    budgets: tuple[Fraction, ...]
    raw: tuple[Fraction, ...] | None = field(default=None, compare=False)

    def __len__(self):
        return len(self.budgets)

    def __getitem__(self, i):
        return self.budgets[i]

    def __iter__(self):
        return iter(self.budgets)


@dataclass(frozen=True)
class Allocation:
    """``owner[j]`` is the agent holding item ``j``; every item is allocated."""

    owner: tuple[int, ...]

    def mask(self, i: int) -> int:
        return items_mask(j for j, o in enumerate(self.owner) if o == i)

    def bundle(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, o in enumerate(self.owner) if o == i)

    def bundles(self, n: int) -> list[tuple[int, ...]]:
        return [self.bundle(i) for i in range(n)]

    @classmethod
    def from_masks(cls, masks: Sequence[int], m: int) -> "Allocation":
        owner = [-1] * m
        for i, mask in enumerate(masks):
            for j in mask_items(mask):
                if owner[j] != -1:
                    raise ValidationError(f"item {j} allocated twice")
                owner[j] = i
        if -1 in owner:
            raise ValidationError("allocation leaves items unallocated")
        return cls(tuple(owner))

    @classmethod
    def from_bundles(cls, bundles: Sequence[Iterable[int]], m: int) -> "Allocation":
        return cls.from_masks([items_mask(b) for b in bundles], m)


def value_point(market: Market, alloc: Allocation) -> tuple[Fraction, ...]:
    """``(v_1(S_1), ..., v_n(S_n))``."""
    return tuple(market.value(i, alloc.bundle(i)) for i in range(market.n))


def bundle_price(prices: Sequence[Fraction], items: Iterable[int]) -> Fraction:
    return sum((prices[j] for j in items), Fraction(0))


def check_prices(prices: Sequence, m: int) -> tuple[Fraction, ...]:
    prices = tuple(to_fraction(p) for p in prices)
    if len(prices) != m:
        raise ValidationError(f"expected {m} prices, got {len(prices)}")
    if any(p < 0 for p in prices):
        raise ValidationError("prices must be nonnegative")
    return prices


def make_market(values, budgets=None, item_names=None, agent_names=None):
    """Build a validated, normalized market (and budgets, if given).

    ``values`` is an n x m matrix of anything :func:`to_fraction` accepts.
    Returns ``Market`` alone when ``budgets`` is None, else ``(Market, BudgetProfile)``.
    """
    raw = tuple(tuple(to_fraction(x) for x in row) for row in values)
    n = len(raw)
    if n < 2:
        raise ValidationError("a market needs at least 2 agents")
    m = len(raw[0])
    if m < 1:
        raise ValidationError("a market needs at least 1 item")
    for i, row in enumerate(raw):
        if len(row) != m:
            raise ValidationError(f"agent {i} has {len(row)} values, expected {m}")
        if any(x <= 0 for x in row):
            raise ValidationError(f"agent {i} has a non-positive item value")
    item_names = tuple(item_names) if item_names is not None else default_item_names(m)
    agent_names = tuple(agent_names) if agent_names is not None else tuple(str(i + 1) for i in range(n))
    if len(item_names) != m or len(agent_names) != n:
        raise ValidationError("name lists do not match the value matrix")
    market = Market(item_names, agent_names, tuple(normalize(r) for r in raw), raw)
    if budgets is None:
        return market
    return market, make_budgets(budgets, n)


def make_budgets(budgets, n: int | None = None) -> BudgetProfile:
    raw = tuple(to_fraction(b) for b in budgets)
    if n is not None and len(raw) != n:
        raise ValidationError(f"expected {n} budgets, got {len(raw)}")
    if any(b <= 0 for b in raw):
        raise ValidationError("budgets must be strictly positive")
    return BudgetProfile(normalize(raw), raw)


def default_item_names(m: int) -> tuple[str, ...]:
    if m <= 26:
        return tuple(chr(ord("A") + j) for j in range(m))
    return tuple(f"item{j}" for j in range(m))


# ---------------------------------------------------------------- file format

def parse_market(text: str | bytes) -> tuple[Market, BudgetProfile]:
    """Parse the JSON market file format.

    >>> mk, b = parse_market('{"items": ["A"], "agents": ['
    ...     '{"name": "x", "values": ["1"], "budget": "1/2"},'
    ...     '{"name": "y", "values": ["1"], "budget": "1/2"}]}')
    >>> b.budgets
    (Fraction(1, 2), Fraction(1, 2))
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        # parse_float keeps the literal digits, so 7.9 stays 79/10
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed market file: {exc}") from exc
    if not isinstance(doc, dict) or "items" not in doc or "agents" not in doc:
        raise ValidationError("market file needs 'items' and 'agents'")
    items = doc["items"]
    agents = doc["agents"]
    if not isinstance(items, list) or not isinstance(agents, list):
        raise ValidationError("'items' and 'agents' must be lists")
    try:
        values = [a["values"] for a in agents]
        budgets = [a["budget"] for a in agents]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"agent entry missing field: {exc}") from exc
    names = [str(a.get("name", i + 1)) for i, a in enumerate(agents)]
    for row in values:
        if not isinstance(row, list) or len(row) != len(items):
            raise ValidationError("every agent needs one value per item")
    return make_market(values, budgets, item_names=[str(x) for x in items], agent_names=names)


def market_to_dict(market: Market, budgets: BudgetProfile | None = None, raw: bool = True) -> dict:
    """Inverse of :func:`parse_market`; writes pre-normalization inputs when known."""
    rows = market.raw_values if raw and market.raw_values is not None else market.values
    if budgets is not None:
        bs = budgets.raw if raw and budgets.raw is not None else budgets.budgets
    agents = []
    for i, name in enumerate(market.agent_names):
        entry = {"name": name, "values": [fmt(x) for x in rows[i]]}
        if budgets is not None:
            entry["budget"] = fmt(bs[i])
        agents.append(entry)
    return {"items": list(market.item_names), "agents": agents}


def serialize_market(market: Market, budgets: BudgetProfile | None = None) -> str:
    return json.dumps(market_to_dict(market, budgets), indent=2)


# ---------------------------------------------------------------- structure

def identical_item_classes(market: Market) -> list[tuple[int, ...]]:
    """Group items whose value is equal for every agent, in first-index order."""
    classes: dict[tuple, list[int]] = {}
    for j in range(market.m):
        col = tuple(row[j] for row in market.values)
        classes.setdefault(col, []).append(j)
    return [tuple(c) for c in classes.values()]


@dataclass(frozen=True)
class StrictnessReport:
    """Per agent, pairs of non-identical bundles (as item tuples) with equal value."""

    ties: tuple[tuple[int, tuple[int, ...], tuple[int, ...]], ...]

    @property
    def ok(self) -> bool:
        return not self.ties


def _class_signature(mask: int, class_of: list[int], n_classes: int) -> tuple[int, ...]:
    counts = [0] * n_classes
    for j in mask_items(mask):
        counts[class_of[j]] += 1
    return tuple(counts)


def validate_strictness(market: Market, caps: Caps = DEFAULT_CAPS, limit: int | None = None) -> StrictnessReport:
    """Report equal-valued bundle pairs that are not permutations of identical items.

    Two bundles are "identical" when they hold the same number of items from
    every identical-item class.  ``limit`` truncates the report.
    """
    check_subset_cap(market.m, caps)
    classes = identical_item_classes(market)
    class_of = [0] * market.m
    for c, members in enumerate(classes):
        for j in members:
            class_of[j] = c
    ties = []
    for i in range(market.n):
        by_value: dict[Fraction, dict[tuple, int]] = {}
        for mask, v in enumerate(market.bundle_values(i)):
            sig = _class_signature(mask, class_of, len(classes))
            by_value.setdefault(v, {}).setdefault(sig, mask)
        for v, reps in by_value.items():
            if len(reps) < 2:
                continue
            masks = sorted(reps.values(), key=lex_key)
            for a in range(len(masks)):
                for b in range(a + 1, len(masks)):
                    ties.append((i, mask_items(masks[a]), mask_items(masks[b])))
                    if limit is not None and len(ties) >= limit:
                        return StrictnessReport(tuple(ties))
    return StrictnessReport(tuple(ties))
