"""Portfolio wealth against a buy-and-hold-nothing benchmark.

The benchmark keeps the initial balances untouched and revalues them at the
current conversion price. The portfolio adds the trading balance sheet on
top. Their difference is the trading PnL.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .ledger import LedgerError, LedgerState, Trade, replay
from .rational import Number, to_fraction


@dataclass(frozen=True)
class WealthConfig:
    initial_base: Fraction
    initial_quote: Fraction
    initial_price: Fraction

    def __post_init__(self) -> None:
        for name in ("initial_base", "initial_quote", "initial_price"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if self.initial_price <= 0:
            raise LedgerError(f"initial price must be positive, got {self.initial_price}")


@dataclass(frozen=True)
class WealthSnapshot:
    index: int
    benchmark_base: Fraction
    benchmark_quote: Fraction
    portfolio_base: Fraction
    portfolio_quote: Fraction
    conversion_price: Fraction

    @property
    def pnl_base(self) -> Fraction:
        return self.portfolio_base - self.benchmark_base

    @property
    def pnl_quote(self) -> Fraction:
        return self.portfolio_quote - self.benchmark_quote


def conversion_price(state_after: LedgerState, trade: Trade) -> Fraction:
    """Price used to express one currency in the other after ``trade``.

    Open positions use the trade's opposite price. A flat book converts its
    quote balance at the ask if positive and at the bid if negative.
    """
    if state_after.b != 0 or state_after.q == 0:
        return trade.x_prime
    return trade.ask if state_after.q > 0 else trade.bid


def _check_price(price: Number) -> Fraction:
    price = to_fraction(price)
    if price <= 0:
        raise LedgerError(f"conversion price must be positive, got {price}")
    return price


def benchmark_wealth(config: WealthConfig, price: Number) -> tuple[Fraction, Fraction]:
    price = _check_price(price)
    B, Q = config.initial_base, config.initial_quote
    return B + Q / price, Q + price * B


def portfolio_wealth(config: WealthConfig, state: LedgerState,
                     price: Number) -> tuple[Fraction, Fraction]:
    price = _check_price(price)
    base = config.initial_base + state.b
    quote = config.initial_quote + state.q
    return base + quote / price, price * base + quote


def wealth_pnl(benchmark: tuple[Fraction, Fraction],
               portfolio: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
    return portfolio[0] - benchmark[0], portfolio[1] - benchmark[1]


def wealth_change_duality(nu_base: Number, price: Number) -> Fraction:
    """Quote-perspective counterpart ``-price * nu_base`` of a base wealth change."""
    return -to_fraction(price) * to_fraction(nu_base)


def snapshot(index: int, config: WealthConfig, state: LedgerState,
             price: Number) -> WealthSnapshot:
    price = _check_price(price)
    wb_bar, wq_bar = benchmark_wealth(config, price)
    wb, wq = portfolio_wealth(config, state, price)
    return WealthSnapshot(index, wb_bar, wq_bar, wb, wq, price)


def initial_snapshot(config: WealthConfig) -> WealthSnapshot:
    return snapshot(0, config, LedgerState(), config.initial_price)


def value_at_quote(config: WealthConfig, state: LedgerState, bid: Number,
                   ask: Number) -> WealthSnapshot:
    """Snapshot between trades from an external bid/ask quote.

    Longs convert at the bid and shorts at the ask; a flat book follows the
    sign of its quote balance.
    """
    bid, ask = _check_price(bid), _check_price(ask)
    if state.b > 0:
        price = bid
    elif state.b < 0:
        price = ask
    else:
        price = ask if state.q > 0 else bid
    return snapshot(state.count, config, state, price)


def wealth_series(trades: Sequence[Trade], config: WealthConfig, *,
                  strict: bool = True,
                  states: Optional[Sequence[LedgerState]] = None) -> list[WealthSnapshot]:
    if states is None:
        states = list(replay(trades, strict=strict))
    out = []
    for trade, state in zip(trades, states):
        out.append(snapshot(trade.index, config, state, conversion_price(state, trade)))
    return out
