from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings

from spreadpnl import (
    Fee, LedgerError, LedgerState, PricePair, Trade, apply_fee, apply_trade, closure_params,
    delta_series, mark_to_market, pnl_base, pnl_quote, pnl_series, replay,
)
from spreadpnl.pnl import ClosureParams, closure_for, closure_params_table, unified_pnl_base

from conftest import close_to_printed, trade_sequences

F = Fraction

PRINTED_P_BASE = ["-0.007363", "0.121602", "0.547850", "1.25", "1.195751", "1.527165"]
PRINTED_D_BASE = ["-0.007363", "0.128966", "0.426247", "0.702149", "-0.054248", "0.331414"]
# exact totals from b + q / price with the table's balances typed in by hand
EXACT_P_BASE = [
    5 + F(-850) / F("169.75"),
    15 + F(-2600) / F("174.75"),
    -5 + F(1000) / F("180.25"),
    F(200) / 160,
    12 + F(-1780) / F("164.75"),
    F(260) / F("170.25"),
]


def test_paper_base_pnl(paper_trades):
    records = pnl_series(paper_trades)
    assert [r.p_base for r in records] == EXACT_P_BASE
    for r, printed in zip(records, PRINTED_P_BASE):
        assert close_to_printed(r.p_base, printed)
    for r, printed in zip(records, PRINTED_D_BASE):
        assert close_to_printed(r.delta_base, printed)


def test_paper_quote_pnl(paper_trades):
    records = pnl_series(paper_trades)
    assert [r.p_quote for r in records] == [F("-1.25"), F("21.25"), F("98.75"), 200, 197, 260]
    assert [r.delta_quote for r in records] == [F("-1.25"), F("22.5"), F("77.5"),
                                                F("101.25"), -3, 63]
    assert sum(r.delta_base for r in records) == records[-1].p_base
    assert sum(r.delta_quote for r in records) == 260


def test_delta_base_times_price_is_not_delta_quote(paper_trades):
    last = pnl_series(paper_trades)[-1]
    cross = last.delta_base * F("170.25")
    assert close_to_printed(cross, "56.423368")
    assert cross != last.delta_quote == 63


def test_row2_bid_is_174_75():
    # with the printed 174.25 the quote PnL would be 13.75, not the tabulated 21.25
    state = LedgerState(F(15), F(-2600))
    assert state.b * (F("174.75") - state.average_price) == F("21.25")
    assert state.b * (F("174.25") - state.average_price) != F("21.25")


@pytest.mark.parametrize("prev_sign, q_sign, prices, expected", [
    (1, 1, PricePair("170.00", "170.25"), ClosureParams(F("0.25"), F("170.25"))),
    (-1, 1, PricePair("160.00", "159.75"), ClosureParams(F(0), F(160))),
    (1, -1, PricePair(90, 91), ClosureParams(F(0), F(90))),
    (-1, -1, PricePair(91, 90), ClosureParams(F(-1), F(90))),
])
def test_closure_params_cells(prev_sign, q_sign, prices, expected):
    assert closure_params(prev_sign, q_sign, prices) == expected
    assert closure_params_table(prev_sign, q_sign, prices) == expected


def test_closure_requires_open_position():
    with pytest.raises(LedgerError):
        closure_params(0, 1, PricePair(1, 1))


def test_closure_with_zero_quote_is_degenerate():
    c = closure_params(1, 0, PricePair(10, 11))
    assert c == ClosureParams(F(0), F(10))


@pytest.mark.parametrize("prev_sign, q_sign, spread_cents", list(product(
    (1, -1), (1, -1, 0), (0, 1, 25, 100))))
def test_canonical_rule_matches_table(prev_sign, q_sign, spread_cents):
    # a flattening trade sells out of a long and buys back a short
    bid = F(150)
    ask = bid + F(spread_cents, 100)
    prices = PricePair(bid, ask) if prev_sign > 0 else PricePair(ask, bid)
    canon = closure_params(prev_sign, q_sign, prices)
    table = closure_params_table(prev_sign, q_sign, prices)
    assert canon == table
    assert canon.mu in (prices.spread, 0, -prices.spread)
    assert canon.x_hat in (prices.x, prices.x_prime)
    if prices.spread:
        assert (canon.mu != 0) == (canon.x_hat == prices.x_prime)


def test_pnl_base_branches(paper_trades):
    states = list(replay(paper_trades))
    assert close_to_printed(pnl_base(states[0], paper_trades[0]), "-0.0073637")
    assert close_to_printed(pnl_base(states[2], paper_trades[2]), "0.5478502")
    # closing branch: -u (1 - (avg_prev + mu) / x_hat)
    assert states[5].prev_avg == F(445, 3)
    assert pnl_base(states[5], paper_trades[5]) == 12 * (1 - (F(445, 3) + F("0.25")) / F("170.25"))


def test_mid_price_first_trade_is_flat():
    t = Trade.create(1, 3, 100)
    assert pnl_base(apply_trade(LedgerState(), t), t) == 0


def test_pnl_quote():
    assert pnl_quote(EXACT_P_BASE[2], "180.25") == F("98.75")
    assert pnl_quote(EXACT_P_BASE[5], "170.25") == 260
    assert pnl_quote(F(0), 12345) == 0


def test_delta_series():
    assert delta_series([]) == []
    assert delta_series(EXACT_P_BASE[:2])[1] == EXACT_P_BASE[1] - EXACT_P_BASE[0]
    assert close_to_printed(delta_series(EXACT_P_BASE[:2])[1], "0.1289660")
    assert delta_series([F(197), F(260)])[1] == 63
    assert delta_series([F(3)] * 4) == [3, 0, 0, 0]


def test_apply_fee():
    assert apply_fee(F("0.10"), F(17), Fee("0.01", "base"), 100) == (F("0.09"), F(16))
    assert apply_fee(F(1), F(63), Fee(1, "quote"), 100) == (F("0.99"), F(62))
    assert apply_fee(F(1), F(63), Fee(0, "quote"), 100) == (F(1), F(63))
    assert apply_fee(F(1), F(63), None, 100) == (F(1), F(63))


def test_mark_to_market():
    assert mark_to_market(LedgerState(F(5), F(-850)), 170, 171) == 0
    assert mark_to_market(LedgerState(F(15), F(-2600)), "174.75", 175) == EXACT_P_BASE[1]
    assert mark_to_market(LedgerState(F(-5), F(1000)), 180, "180.25") == EXACT_P_BASE[2]
    with pytest.raises(LedgerError):
        mark_to_market(LedgerState(F(0), F(200)), 1, 2)


def test_fee_series_quote_fee(paper_trades):
    fee = Fee(1, "quote")
    with_fee = list(paper_trades)
    with_fee[2] = Trade(3, with_fee[2].side, with_fee[2].units, with_fee[2].prices, fee)
    raw = pnl_series(paper_trades)
    net = pnl_series(with_fee)
    # raw series is unaffected by fees
    assert [r.p_quote for r in net] == [r.p_quote for r in raw]
    assert net[2].delta_quote_net == raw[2].delta_quote - 1
    assert net[-1].p_quote_net == raw[-1].p_quote - 1
    assert net[0].p_quote_net == raw[0].p_quote


def test_fee_series_base_fee(paper_trades):
    with_fee = list(paper_trades)
    t = with_fee[4]
    with_fee[4] = Trade(t.index, t.side, t.units, t.prices, Fee("0.01", "base"))
    raw, net = pnl_series(paper_trades), pnl_series(with_fee)
    assert net[4].delta_base_net == raw[4].delta_base - F("0.01")
    assert net[-1].p_base_net == raw[-1].p_base - F("0.01")


@settings(max_examples=200)
@given(trade_sequences(max_size=40))
def test_unified_formula_and_telescoping(trades):
    states = list(replay(trades))
    records = pnl_series(trades, states=states)
    for s, t, r in zip(states, trades, records):
        assert r.p_base == unified_pnl_base(s, r.price)
        c = closure_for(s, t)
        assert (c is None) == (s.b != 0)
        assert r.p_quote == r.p_base * r.price
    assert sum(r.delta_base for r in records) == records[-1].p_base
    assert sum(r.delta_quote for r in records) == records[-1].p_quote


@given(trade_sequences(max_size=40))
def test_table_rule_gives_same_series(trades):
    a = pnl_series(trades)
    b = pnl_series(trades, closure_rule=closure_params_table)
    assert [r.p_base for r in a] == [r.p_base for r in b]


@given(trade_sequences(max_size=40, mid=True))
def test_mid_price_closure_collapses(trades):
    for s, t, r in zip(replay(trades), trades, pnl_series(trades)):
        if r.closure is not None:
            assert r.closure.mu == 0 and r.closure.x_hat == t.x
            assert r.p_base == s.q / t.x
