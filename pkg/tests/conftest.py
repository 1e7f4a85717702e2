from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from spreadpnl import PerformanceConfig, Trade, WealthConfig

DATA = Path(__file__).parent / "data"

# SOL/USDT worked example. Row 2 trades 10 units (the balance goes 5 -> 15)
# and its bid is 174.75.
PAPER_ROWS = [
    (5, "170.00", "169.75"),
    (10, "175.00", "174.75"),
    (-20, "180.00", "180.25"),
    (5, "160.00", "159.75"),
    (12, "165.00", "164.75"),
    (-12, "170.00", "170.25"),
]


def make_paper_trades():
    return [Trade.create(i, u, x, xp) for i, (u, x, xp) in enumerate(PAPER_ROWS, start=1)]


@pytest.fixture
def paper_trades():
    return make_paper_trades()


@pytest.fixture
def paper_perf():
    return PerformanceConfig(500)


@pytest.fixture
def paper_wealth():
    return WealthConfig(500, 75000, 150)


def close_to_printed(value: Fraction, printed: str) -> bool:
    """``value`` agrees with a printed (truncated or rounded) decimal to its last digit."""
    places = len(printed.split(".")[1]) if "." in printed else 0
    return abs(value - Fraction(printed)) < Fraction(1, 10 ** places)


@st.composite
def trade_sequences(draw, min_size=1, max_size=30, mid=None):
    """Strict-mode trade sequences with cent prices and quarter units."""
    n = draw(st.integers(min_size, max_size))
    use_mid = draw(st.booleans()) if mid is None else mid
    trades = []
    b = Fraction(0)
    for i in range(1, n + 1):
        if b != 0 and draw(st.integers(0, 3)) == 0:
            u = -b
        else:
            u = Fraction(draw(st.integers(1, 160)), 4) * draw(st.sampled_from([1, -1]))
        bid = Fraction(draw(st.integers(1000, 30000)), 100)
        s = Fraction(0) if use_mid else Fraction(draw(st.integers(0, 100)), 100)
        ask = bid + s
        x, xp = (ask, bid) if u > 0 else (bid, ask)
        trades.append(Trade.create(i, u, x, xp))
        b += u
    return trades


# acceptance criteria: one pass/fail line each in the terminal summary
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    ok = call.excinfo is None
    prev = _CRITERIA.get(number, (title, True))
    _CRITERIA[number] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}")
