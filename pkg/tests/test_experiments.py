import json
from fractions import Fraction as F

import pytest
from conftest import small_markets
from hypothesis import given, settings
from hypothesis import strategies as st

from fisherce.errors import PreconditionError
from fisherce.experiments import (
    GenSpec,
    crossing_budgets,
    generate_market,
    instance_seed,
    is_theorem_covered,
    ladder_budgets,
    market_digest,
    perturb_budgets,
    run_batch,
)
from fisherce.frontier import classify_proportionality, in_any_R
from fisherce.market import make_market
from fisherce.solver import CE_FOUND


def test_generation_is_deterministic():
    spec = GenSpec(m=4, rng_seed=1)
    assert generate_market(spec) == generate_market(spec)
    assert market_digest(generate_market(spec)) != market_digest(generate_market(GenSpec(m=4, rng_seed=2)))
    assert instance_seed(5, 3) == instance_seed(5, 3) != instance_seed(5, 4)


def test_identical_and_pareto_rows():
    mk = generate_market(GenSpec(m=5, identical_preferences=True, rng_seed=3))
    assert mk.values[0] == mk.values[1]
    mk = generate_market(GenSpec(m=6, n=3, distribution="pareto", rng_seed=4))
    for row in mk.values:
        assert all(v > 0 for v in row) and sum(row) == 1


def test_spliddit_like_rows_are_points():
    mk = generate_market(GenSpec(m=5, spliddit_like=True, rng_seed=9))
    for row in mk.values:
        assert all((v * 1000).denominator == 1 and v > 0 for v in row)


def test_genspec_validation():
    for kwargs in ({"distribution": "normal"}, {"n": 1}, {"m": 0}):
        with pytest.raises(ValueError):
            GenSpec(**{"m": 3, **kwargs})


def test_crossing_single_item():
    bps = crossing_budgets(make_market([[1], [1]]))
    assert [bp[0] for bp in bps] == [F(1, 2) + F(1, 1000), F(1, 3), F(3, 4)]


def test_crossing_identical_sixths():
    market = make_market([[1, 2, 3], [1, 2, 3]])
    bps = crossing_budgets(market)
    assert len(bps) == 18
    gaps = {int(bp[0] * 6) for bp in bps}
    assert gaps == set(range(6))
    with pytest.raises(PreconditionError):
        crossing_budgets(make_market([[1], [1], [1]]))


def test_perturb_examples():
    bp = perturb_budgets((F(1, 2), F(1, 2)), F(1, 100), 0, make_market([[1, 2], [2, 1]]))
    assert bp[0] != bp[1] and abs(bp[0] - F(1, 2)) < F(1, 100)
    assert perturb_budgets((F(1, 2), F(1, 2)), F(1, 100), 0) == perturb_budgets((F(1, 2), F(1, 2)), F(1, 100), 0)
    for eps in (0, -1):
        with pytest.raises(ValueError):
            perturb_budgets((F(1, 2), F(1, 2)), eps, 0)


def test_ladder():
    assert tuple(ladder_budgets(3)) == (F(100, 309), F(103, 309), F(106, 309))


def test_theorem_coverage():
    assert is_theorem_covered(GenSpec(m=4), "perturbed_equal")
    assert not is_theorem_covered(GenSpec(m=4), "crossing")
    assert is_theorem_covered(GenSpec(m=4, identical_preferences=True), "crossing")
    assert not is_theorem_covered(GenSpec(m=4, n=3), "perturbed_equal")


def test_batch_reproducible_and_clean():
    gen = GenSpec(m=4, rng_seed=11)
    a = run_batch(gen, "perturbed_equal", 15, m_choices=[4, 5, 6], mms_d_max=3)
    b = run_batch(gen, "perturbed_equal", 15, m_choices=[4, 5, 6], mms_d_max=3)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    assert a.existence_rate == 1 and not a.alarms
    assert sum(a.strategy_histogram.values()) == 15


def test_batch_crossing_and_explicit():
    rep = run_batch(GenSpec(m=5, rng_seed=2), "crossing", 4)
    assert len(rep.records) > 4 and not rep.theorem_covered
    rep = run_batch(GenSpec(m=3, n=3, rng_seed=2), "explicit", 3, explicit_budgets=[100, 103, 106])
    assert all(r.budgets == (F(100, 309), F(103, 309), F(106, 309)) for r in rep.records)
    with pytest.raises(ValueError):
        run_batch(GenSpec(m=3), "explicit", 1)


@settings(max_examples=30)
@given(small_markets(max_m=4, max_value=15))
def test_crossing_budgets_postconditions(market):
    for bp in crossing_budgets(market):
        assert not in_any_R(market, bp)
        assert not classify_proportionality(market, bp).has_budget_proportional


@given(st.integers(0, 2**32), st.integers(1, 50))
def test_perturbed_budgets_are_valid(seed, k):
    bp = perturb_budgets((F(1, 3),) * 3, F(k, 1000), seed)
    assert sum(bp) == 1 and len(set(bp)) == 3 and all(b > 0 for b in bp)


def test_batch_ce_counts_carry_certificates():
    rep = run_batch(GenSpec(m=4, identical_preferences=True, rng_seed=5), "perturbed_equal", 10)
    assert all(r.status == CE_FOUND and all(r.truncated_share_met) for r in rep.records)
