"""Exact rational simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The origin is feasible when ``b >= 0``, so no phase one is needed.  The
tableau is kept in condensed form (one column per nonbasic variable) and
pivots follow Bland's rule, which cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class Unbounded(Exception):
    pass


@dataclass
class LpSolution:
    objective: Fraction
    x: list[Fraction]
    pivots: int


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence, max_pivots: int = 100_000) -> LpSolution:
    """Solve ``max c.x`` subject to ``A x <= b`` and ``x >= 0``.

    Entries may be ints or Fractions; the result is exact.

    >>> sol = maximize([1, 1], [[1, 2], [3, 1]], [4, 6])
    >>> sol.objective, sol.x
    (Fraction(14, 5), [Fraction(8, 5), Fraction(6, 5)])
    """
    n = len(c)
    rows = len(A)
    if any(Fraction(v) < 0 for v in b):
        raise ValueError("right-hand side must be nonnegative")
    T = [[Fraction(v) for v in row] for row in A]
    rhs = [Fraction(v) for v in b]
    cost = [Fraction(v) for v in c]
    z = Fraction(0)
    nonbasic = list(range(n))  # variable ids; slacks are n..n+rows-1
    basic = list(range(n, n + rows))
    pivots = 0
    while True:
        enter = None
        for col in sorted(range(n), key=lambda j: nonbasic[j]):
            if cost[col] > 0:
                enter = col
                break
        if enter is None:
            break
        leave = None
        best = None
        for r in range(rows):
            a = T[r][enter]
            if a > 0:
                ratio = rhs[r] / a
                if best is None or ratio < best or (ratio == best and basic[r] < basic[leave]):
                    best, leave = ratio, r
        if leave is None:
            raise Unbounded("objective is unbounded")
        z = _pivot(T, rhs, cost, z, leave, enter)
        basic[leave], nonbasic[enter] = nonbasic[enter], basic[leave]
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("pivot limit reached")
    x = [Fraction(0)] * n
    for r, var in enumerate(basic):
        if var < n:
            x[var] = rhs[r]
    return LpSolution(z, x, pivots)


def _pivot(T, rhs, cost, z, r, c):
    row = T[r]
    piv = row[c]
    inv = 1 / piv
    width = len(row)
    new_row = [v * inv for v in row]
    new_row[c] = inv
    rhs_r = rhs[r] * inv
    nz = [j for j in range(width) if j != c and new_row[j] != 0]
    for i in range(len(T)):
        if i == r:
            continue
        other = T[i]
        f = other[c]
        if f == 0:
            continue
        for j in nz:
            other[j] -= f * new_row[j]
        other[c] = -f * inv
        rhs[i] -= f * rhs_r
    f = cost[c]
    if f != 0:
        for j in nz:
            cost[j] -= f * new_row[j]
        cost[c] = -f * inv
        z += f * rhs_r
    T[r] = new_row
    rhs[r] = rhs_r
    return z
