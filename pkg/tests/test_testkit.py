from fractions import Fraction

import pytest

from spreadpnl import Trade, pnl_series, replay
from spreadpnl.testkit import (
    CELLS, ScenarioSpec, closure_cells, flipped_mu, generate_scenario, generate_scenarios,
    liquidation_oracle, unified_stream, verify,
)

F = Fraction


def test_oracle_on_paper_example(paper_trades):
    result = liquidation_oracle(paper_trades)
    assert result.quote == 260
    assert result.base == F(260) / F("170.25")
    assert result.stream[-1] == result.base
    assert result.base * F("170.25") == result.quote


def test_oracle_round_trip_is_zero():
    trades = [Trade.create(1, 1, 100, "99.5"), Trade.create(2, -1, 100, "100.5")]
    r = liquidation_oracle(trades)
    assert (r.base, r.quote) == (0, 0)


def test_oracle_profit_converts_at_ask():
    trades = [Trade.create(1, 2, 10, "9.9"), Trade.create(2, -2, 12, "12.1")]
    r = liquidation_oracle(trades)
    assert r.quote == 4
    assert r.base == F(4) / F("12.1")


def test_oracle_requires_flat_end():
    with pytest.raises(ValueError, match="flat"):
        liquidation_oracle([Trade.create(1, 1, 10)])


def test_unified_stream_matches_engine(paper_trades):
    assert unified_stream(paper_trades) == [r.p_base for r in pnl_series(paper_trades)]


def test_generation_is_deterministic():
    spec = ScenarioSpec(seed=42)
    a = [s.trades for s in generate_scenarios(spec, 20)]
    b = [s.trades for s in generate_scenarios(spec, 20)]
    assert a == b
    assert generate_scenario(spec, 7).trades == a[7]
    assert [s.trades for s in generate_scenarios(ScenarioSpec(seed=43), 20)] != a


def test_always_closing_ends_flat():
    spec = ScenarioSpec(seed=3, p_close=1.0)
    for sc in generate_scenarios(spec, 200):
        assert sum(t.units for t in sc.trades) == 0


def test_generated_trades_are_well_formed():
    spec = ScenarioSpec(seed=5, max_length=60)
    for sc in generate_scenarios(spec, 100):
        assert 1 <= len(sc.trades) <= 60
        assert [t.index for t in sc.trades] == list(range(1, len(sc.trades) + 1))
        list(replay(sc.trades, strict=True))
        if sc.mid:
            assert all(t.prices.spread == 0 for t in sc.trades)


def test_shorts_appear_at_fixed_seed():
    # recorded once: 97 of the first 100 default scenarios at seed 0 go short
    spec = ScenarioSpec(seed=0)
    shorts = sum(1 for sc in generate_scenarios(spec, 100)
                 if min(s.b for s in replay(sc.trades)) < 0)
    assert shorts == 97


@pytest.mark.parametrize("kwargs", [
    {"min_length": 5, "max_length": 4},
    {"min_length": 0},
    {"price_min": 10, "price_max": 5},
    {"price_min": 0},
    {"spread_min": 2, "spread_max": 1},
    {"p_close": 1.5},
])
def test_degenerate_specs_rejected(kwargs):
    with pytest.raises(ValueError):
        ScenarioSpec(**kwargs)


def test_closure_cells(paper_trades):
    assert closure_cells(paper_trades) == {(-1, 1), (1, 1)}


def test_verify_seed_1():
    report = verify(1, 100)
    assert report.ok
    assert report.cells_covered
    assert report.counterexample is None
    assert all(report.passes[p] == report.checked[p] for p in report.passes)


def test_verify_catches_flipped_mu():
    report = verify(1, 100, closure_rule=flipped_mu())
    assert not report.ok
    ce = report.counterexample
    assert ce is not None and ce.seed == 1
    # the counterexample replays from its seed and scenario number
    replayed = generate_scenario(ScenarioSpec(seed=1), ce.scenario)
    assert len(replayed.trades) == len(ce.trades)


def test_verify_rejects_zero_count():
    with pytest.raises(ValueError):
        verify(1, 0)


def test_all_four_cells_reachable():
    cells = set()
    for sc in generate_scenarios(ScenarioSpec(seed=11), 300):
        cells |= closure_cells(sc.trades)
    assert cells == set(CELLS)
