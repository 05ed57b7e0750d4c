import itertools
from fractions import Fraction as F

import oracles
import pytest
from conftest import small_markets
from hypothesis import assume, given
from hypothesis import strategies as st

from fisherce.errors import CapExceeded
from fisherce.fairness import (
    check_ce_mms_guarantee,
    envy_checks,
    fairness_report,
    mms_checks,
    mms_value,
    nash_welfare_argmax,
)
from fisherce.market import Allocation, Caps, make_market, value_point
from fisherce.solver import CE_FOUND, price_lp, solve

EPS = F(1, 100)
ROW = [F(79, 10), 1, 5, 2]
NASH = ([[5, 4], [1000, 1]], [101, 100])
SEVEN_ITEMS = (
    [["0.1420", "0.0808", "0.1921", "0.1717", "0.1651", "0.1200", "0.1283"],
     ["0.0827", "0.1056", "0.1743", "0.1515", "0.1862", "0.1123", "0.1874"]],
    ["0.8093", "0.1907"],
)


def test_mms_examples():
    assert mms_value([1, 2, 3], 2, 3) == 3
    assert mms_value([1, 2, 3], 3, 3) == 6
    assert mms_value([F(1, 3)] * 3, 1, 3) == F(1, 3)
    assert mms_value([1, 2, 3], 5, 13) == 0
    assert mms_value([1, 2, 3], 1, 3) == 1
    assert mms_value([], 1, 2) == 0


def test_mms_errors():
    with pytest.raises(ValueError):
        mms_value([1, 2], 3, 2)
    with pytest.raises(CapExceeded):
        mms_value([1] * 6, 1, 6, Caps(max_assignments=1000))


def test_mms_checks_respect_budget_filter():
    market, budgets = make_market(*SEVEN_ITEMS)
    alloc = solve(market, budgets).certificate.allocation
    small = [(c.ell, c.d) for c in mms_checks(market, budgets, alloc, 6) if c.agent == 1]
    assert small == [(1, 6)]


def test_ce_mms_guarantee_five_items():
    market = make_market([[1, 2, 3, 4, 5], [5, 1, 4, 2, 3]])
    budgets = (F(1, 2) + F(1, 1000), F(1, 2) - F(1, 1000))
    cert = solve(market, budgets).certificate
    checks = check_ce_mms_guarantee(market, cert, 5)
    assert any((c.ell, c.d) == (2, 5) for c in checks) and all(c.met for c in checks)


def test_identical_rows_envy_witness():
    market, budgets = make_market([ROW, ROW], [F(1, 2) + EPS, F(1, 2) - EPS])
    alloc = Allocation.from_bundles([[0, 1], [2, 3]], 4)
    env = envy_checks(market, budgets, alloc)
    assert not env.ef1_star and env.ef1_star_witness == (1, 0, 1)
    assert market.value(1, [0]) == F(79, 159) > market.value(1, [2, 3]) == F(70, 159)
    assert env.ef1


def test_justified_ef_witness():
    # the poorer agent may envy, the richer one may not
    market = make_market([[1, 1], [1, 1]])
    env = envy_checks(market, (F(2, 3), F(1, 3)), Allocation((1, 1)))
    assert not env.justified_ef_coalitions and env.justified_ef_witness == (0, (1,))
    env = envy_checks(market, (F(1, 3), F(2, 3)), Allocation((1, 1)))
    assert env.justified_ef_coalitions


def test_nash_examples():
    market, budgets = make_market(*NASH)
    best = nash_welfare_argmax(market, budgets)
    assert best.owner == (1, 0)
    assert price_lp(market, budgets, best) is None
    assert nash_welfare_argmax(make_market([[1, 1], [1, 1]]), (F(1, 2), F(1, 2))).owner == (0, 1)
    assert nash_welfare_argmax(make_market([[1], [1]]), (F(1, 2), F(1, 2))).owner == (0,)


def test_fairness_report_json():
    market, budgets = make_market(*NASH)
    rep = fairness_report(market, budgets, Allocation((1, 0)), mms_d_max=2, nash=True)
    assert rep.nash_welfare_optimal
    doc = rep.to_dict()
    assert doc["values"] == ["4/9", "1000/1001"] and doc["budget_proportional"] == [False, True]
    rep = fairness_report(market, budgets, Allocation((0, 1)), nash=True)
    assert rep.nash_welfare_optimal is False


@given(st.lists(st.integers(0, 9), max_size=5), st.integers(1, 4), st.data())
def test_mms_matches_labeling_oracle(row, d, data):
    ell = data.draw(st.integers(1, d))
    assert mms_value(row, ell, d) == oracles.mms([F(v) for v in row], ell, d)


@given(st.lists(st.integers(0, 20), max_size=6), st.integers(1, 5), st.data())
def test_mms_monotone_in_ell(row, d, data):
    ell = data.draw(st.integers(1, d))
    assert all(mms_value(row, ell, d) <= mms_value(row, e, d) for e in range(ell, d + 1))


@given(st.lists(st.integers(0, 20), max_size=7))
def test_mms_one_of_two_is_cut_and_choose(row):
    m = len(row)
    best = max(
        min(sum(row[j] for j in range(m) if lab[j]), sum(row[j] for j in range(m) if not lab[j]))
        for lab in itertools.product((0, 1), repeat=m)
    )
    assert mms_value(row, 1, 2) == best


@given(small_markets(n=3, max_m=4, max_value=8), st.data())
def test_ef1_star_implies_ef1(market, data):
    owner = tuple(data.draw(st.lists(st.integers(0, 2), min_size=market.m, max_size=market.m)))
    env = envy_checks(market, (F(1, 3),) * 3, Allocation(owner))
    assert not env.ef1_star or env.ef1


@given(small_markets(max_m=5, max_value=20), st.integers(1, 999))
def test_ce_properties(market, k):
    budgets = (F(k, 1000), 1 - F(k, 1000))
    out = solve(market, budgets)
    assume(out.status == CE_FOUND)
    cert = out.certificate
    rep = fairness_report(market, budgets, cert.allocation, mms_d_max=4)
    assert rep.envy.justified_ef_coalitions
    assert all(c.met for c in rep.mms_results)
    assert all(t or not a for t, a in zip(rep.truncated_share_met, rep.augmented_share_met))
    lo, hi = sorted(budgets)
    if lo >= F(market.m - 1, market.m) * hi:
        assert rep.envy.ef1


@given(small_markets(max_m=4, max_value=9), st.integers(1, 19))
def test_nash_matches_oracle(market, k):
    budgets = (F(k, 20), 1 - F(k, 20))
    got = nash_welfare_argmax(market, budgets)
    want = oracles.nash_argmax(market, budgets)
    assert value_point(market, got) == oracles.point(market, want)
