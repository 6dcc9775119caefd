import numpy as np
import pytest

from prodnet.economy import EconomySpec, ProductivityModel
from prodnet.replicate import replicate_game

CRITERIA = {
    1: "equilibrium correctness on 200 random instances",
    2: "walk-calculus profit routes and D/P identities",
    3: "ordinal potential over 500 unilateral deviations",
    4: "best responses integrate own-category production",
    5: "clustered networks are Nash (Bell scan + grid oracle)",
    6: "Hicks-neutral welfare equal across partitions",
    7: "returns to diversification order full vs islands",
    8: "islands-minus-full gap equals K log n",
    9: "cluster inverse table closed form and invariance",
    10: "risk: exact vs closed form, orderings, identities",
    11: "policy filtering and design round trip",
    12: "verify reports are byte-identical",
}

_outcomes: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    num = getattr(report, "criterion", None)
    if num is None:
        return
    if report.when == "call" or report.outcome != "passed":
        if hasattr(report, "wasxfail"):
            state = "xfail"
        else:
            state = report.outcome
        _outcomes.setdefault(num, []).append(state)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        states = _outcomes.get(num)
        if not states:
            continue
        ok = all(s == "passed" for s in states)
        note = "" if ok else f" ({', '.join(sorted(set(s for s in states if s != 'passed')))})"
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {CRITERIA[num]}{note}")


@pytest.fixture
def inst_a():
    return EconomySpec([1.0], [[0.6, 0.0]], [1])


@pytest.fixture
def inst_b():
    return EconomySpec([0.5, 0.5], [[0.5, 0.2, 0.3], [0.5, 0.3, 0.2]], [1, 2])


@pytest.fixture
def inst_c():
    """Three categories with asymmetric requirements."""
    return EconomySpec(
        [0.4, 0.3, 0.3],
        [[0.4, 0.2, 0.2, 0.2], [0.5, 0.1, 0.25, 0.15], [0.45, 0.15, 0.1, 0.3]],
        [1, 2, 3],
    )


@pytest.fixture
def rep2(inst_b):
    return replicate_game(inst_b, 2)


@pytest.fixture
def hicks_b(inst_b):
    return inst_b.with_productivity(ProductivityModel.hicks_neutral())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
