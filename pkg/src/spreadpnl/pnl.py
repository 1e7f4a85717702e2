"""Total and per-trade PnL in base and quote units.

While a position is open the PnL is the base balance marked at the opposite
price, ``b * (1 - avg / x')``. When a trade flattens the position the quote
balance is the whole realized result, and it is converted back to base at the
price one would actually get for it: the ask if it is a profit to be spent,
the bid if it is a loss to be covered.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .ledger import Fee, FeeCurrency, LedgerError, LedgerState, PricePair, Side, Trade
from .ledger import average_price, replay
from .rational import Number, to_fraction


@dataclass(frozen=True)
class ClosureParams:
    mu: Fraction
    x_hat: Fraction


ClosureRule = Callable[[int, int, PricePair], ClosureParams]


def _sign(value: Fraction) -> int:
    return (value > 0) - (value < 0)


def closure_params(prev_b_sign: int, q_sign: int, prices: PricePair) -> ClosureParams:
    """Conversion price and average-price adjustment for a flattening trade.

    The closing trade sells when a long is closed and buys when a short is
    covered, which fixes which of ``prices`` is the ask. The realized quote
    balance converts at the ask when positive and at the bid when negative,
    and ``mu = x_hat - x``.
    """
    if prev_b_sign == 0:
        raise LedgerError("closure requires an open position before the trade")
    side = Side.SELL if prev_b_sign > 0 else Side.BUY
    ask, bid = prices.ask_bid(side)
    if q_sign > 0:
        x_hat = ask
    elif q_sign < 0:
        x_hat = bid
    else:
        x_hat = prices.x
    return ClosureParams(mu=x_hat - prices.x, x_hat=x_hat)


def closure_params_table(prev_b_sign: int, q_sign: int, prices: PricePair) -> ClosureParams:
    """The four-cell sign table, read literally (``mu`` in units of the spread)."""
    if prev_b_sign == 0:
        raise LedgerError("closure requires an open position before the trade")
    s = prices.spread
    if q_sign == 0:
        return ClosureParams(Fraction(0), prices.x)
    if prev_b_sign > 0 and q_sign > 0:
        return ClosureParams(s, prices.x_prime)
    if prev_b_sign < 0 and q_sign < 0:
        return ClosureParams(-s, prices.x_prime)
    return ClosureParams(Fraction(0), prices.x)


def closure_for(state_after: LedgerState, trade: Trade,
                rule: ClosureRule = closure_params) -> Optional[ClosureParams]:
    if state_after.b != 0:
        return None
    return rule(_sign(state_after.prev_b), _sign(state_after.q), trade.prices)


def pnl_base(state_after: LedgerState, trade: Trade,
             closure_rule: ClosureRule = closure_params) -> Fraction:
    """Total PnL in base units right after ``trade``."""
    b = state_after.b
    if b != 0:
        return b * (1 - average_price(state_after) / trade.x_prime)
    closure = closure_for(state_after, trade, closure_rule)
    return -trade.units * (1 - (state_after.prev_avg + closure.mu) / closure.x_hat)


def unified_pnl_base(state_after: LedgerState, price: Fraction) -> Fraction:
    """``b + q / price``: the same total PnL written without the case split."""
    return state_after.b + state_after.q / price


def pnl_quote(p_base: Fraction, price: Number) -> Fraction:
    """Quote-unit PnL: ``p_base`` converted at ``price``.

    ``price`` is the trade's opposite price while a position is open and the
    closure conversion price after a flattening trade.
    """
    return p_base * to_fraction(price)


def delta_series(totals: Iterable[Fraction]) -> list[Fraction]:
    out: list[Fraction] = []
    prev = Fraction(0)
    for total in totals:
        out.append(total - prev)
        prev = total
    return out


def apply_fee(delta_base: Fraction, delta_quote: Fraction, fee: Optional[Fee],
              price: Number) -> tuple[Fraction, Fraction]:
    """Deduct ``fee`` from the delta in its own currency and from the other
    delta at ``price``. Returns ``(delta_base, delta_quote)``."""
    if fee is None:
        return delta_base, delta_quote
    if fee.amount < 0:
        raise LedgerError("fee amount must be >= 0")
    price = to_fraction(price)
    if fee.currency is FeeCurrency.BASE:
        return delta_base - fee.amount, delta_quote - fee.amount * price
    return delta_base - fee.amount / price, delta_quote - fee.amount


def mark_to_market(state: LedgerState, bid: Number, ask: Number) -> Fraction:
    """Base-unit PnL of the open position if it were flattened now.

    Longs unwind at the bid, shorts at the ask.
    """
    if state.b == 0:
        raise LedgerError("nothing to mark: position is flat")
    bid, ask = to_fraction(bid), to_fraction(ask)
    if bid <= 0 or ask <= 0:
        raise LedgerError("quotes must be positive")
    unwind = bid if state.b > 0 else ask
    return state.b * (1 - average_price(state) / unwind)


@dataclass(frozen=True)
class PnlRecord:
    index: int
    p_base: Fraction
    delta_base: Fraction
    p_quote: Fraction
    delta_quote: Fraction
    price: Fraction
    closure: Optional[ClosureParams] = None
    # fee-adjusted series; equal to the raw series when no fees were charged
    p_base_net: Optional[Fraction] = None
    delta_base_net: Optional[Fraction] = None
    p_quote_net: Optional[Fraction] = None
    delta_quote_net: Optional[Fraction] = None


def pnl_series(
    trades: Sequence[Trade],
    *,
    strict: bool = True,
    closure_rule: ClosureRule = closure_params,
    states: Optional[Sequence[LedgerState]] = None,
) -> list[PnlRecord]:
    """PnL records for every trade, raw and fee-adjusted.

    Fees accumulate: a base fee stays deducted from every later base total
    and its quote image is revalued at each later conversion price, and
    symmetrically for quote fees.
    """
    if states is None:
        states = list(replay(trades, strict=strict))
    records: list[PnlRecord] = []
    prev_b = prev_q = Fraction(0)
    prev_b_net = prev_q_net = Fraction(0)
    fees_base = fees_quote = Fraction(0)
    for trade, state in zip(trades, states):
        try:
            closure = closure_for(state, trade, closure_rule)
            p_b = pnl_base(state, trade, closure_rule)
        except LedgerError as exc:
            raise LedgerError(f"trade {trade.index}: {exc}") from exc
        price = trade.x_prime if closure is None else closure.x_hat
        p_q = pnl_quote(p_b, price)
        if trade.fee is not None:
            if trade.fee.currency is FeeCurrency.BASE:
                fees_base += trade.fee.amount
            else:
                fees_quote += trade.fee.amount
        if fees_base or fees_quote:
            p_b_net = p_b - fees_base - fees_quote / price
            p_q_net = p_q - fees_quote - fees_base * price
        else:
            p_b_net, p_q_net = p_b, p_q
        records.append(PnlRecord(
            index=trade.index,
            p_base=p_b,
            delta_base=p_b - prev_b,
            p_quote=p_q,
            delta_quote=p_q - prev_q,
            price=price,
            closure=closure,
            p_base_net=p_b_net,
            delta_base_net=p_b_net - prev_b_net,
            p_quote_net=p_q_net,
            delta_quote_net=p_q_net - prev_q_net,
        ))
        prev_b, prev_q, prev_b_net, prev_q_net = p_b, p_q, p_b_net, p_q_net
    return records
