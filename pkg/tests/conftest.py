import os
import sys

from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from fisherce.market import make_market  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_acceptance: dict[str, str] = {}


def small_markets(n=2, max_m=4, max_value=20):
    """Markets with small positive integer values; ties are likely when max_value is small."""
    return st.integers(1, max_m).flatmap(
        lambda m: st.lists(st.lists(st.integers(1, max_value), min_size=m, max_size=m), min_size=n, max_size=n)
    ).map(make_market)


def budget_pairs():
    return st.integers(1, 999).map(lambda k: (k, 1000 - k))


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[name]}  {name}")
