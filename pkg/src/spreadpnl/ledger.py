"""Signed base/quote balance sheet for a single currency pair.

Buying ``u`` units at price ``x`` adds ``u`` to the base balance and removes
``x * u`` from the quote balance; selling is the same with ``u < 0``. The
quote balance therefore carries realized PnL even after the base balance
returns to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .rational import Number, to_fraction


class LedgerError(ValueError):
    """Raised for ill-formed trades or inconsistent ledger operations."""


class Side(str, Enum):
    BUY = "buy"
    SELL = "sell"

    @property
    def sign(self) -> int:
        return 1 if self is Side.BUY else -1

    @classmethod
    def parse(cls, text: str) -> "Side":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise LedgerError(f"unknown side {text!r}; expected 'buy' or 'sell'") from None


class FeeCurrency(str, Enum):
    BASE = "base"
    QUOTE = "quote"


@dataclass(frozen=True)
class PricePair:
    """Executed price ``x`` and the opposite side ``x_prime`` of the bid/ask pair."""

    x: Fraction
    x_prime: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", to_fraction(self.x))
        object.__setattr__(self, "x_prime", to_fraction(self.x_prime))
        if self.x <= 0 or self.x_prime <= 0:
            raise LedgerError(f"prices must be positive, got x={self.x}, x'={self.x_prime}")

    @classmethod
    def mid(cls, price: Number) -> "PricePair":
        return cls(price, price)

    @property
    def spread(self) -> Fraction:
        return abs(self.x - self.x_prime)

    def ask_bid(self, side: Side) -> tuple[Fraction, Fraction]:
        """(ask, bid) implied by the trade direction: buys execute at the ask."""
        if side is Side.BUY:
            return self.x, self.x_prime
        return self.x_prime, self.x

    def is_consistent_with(self, side: Side) -> bool:
        if side is Side.BUY:
            return self.x >= self.x_prime
        return self.x <= self.x_prime


@dataclass(frozen=True)
class Fee:
    amount: Fraction
    currency: FeeCurrency

    def __post_init__(self) -> None:
        object.__setattr__(self, "amount", to_fraction(self.amount))
        object.__setattr__(self, "currency", FeeCurrency(self.currency))
        if self.amount < 0:
            raise LedgerError(f"fee amount must be >= 0, got {self.amount}")


@dataclass(frozen=True)
class Trade:
    """One fill. ``units`` is signed: positive for buys, negative for sells."""

    index: int
    side: Side
    units: Fraction
    prices: PricePair
    fee: Optional[Fee] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "units", to_fraction(self.units))
        if self.index < 1:
            raise LedgerError(f"trade index must be >= 1, got {self.index}")
        if self.units == 0:
            raise LedgerError(f"trade {self.index}: units must be nonzero")
        if (self.units > 0) != (self.side is Side.BUY):
            raise LedgerError(
                f"trade {self.index}: units {self.units} do not match side {self.side.value}"
            )

    @classmethod
    def create(
        cls,
        index: int,
        units: Number,
        price: Number,
        opposite_price: Optional[Number] = None,
        fee: Optional[Fee] = None,
    ) -> "Trade":
        """Build a trade from signed units; the side follows the sign."""
        u = to_fraction(units)
        side = Side.BUY if u > 0 else Side.SELL
        xp = price if opposite_price is None else opposite_price
        return cls(index, side, u, PricePair(price, xp), fee)

    @property
    def x(self) -> Fraction:
        return self.prices.x

    @property
    def x_prime(self) -> Fraction:
        return self.prices.x_prime

    @property
    def ask(self) -> Fraction:
        return self.prices.ask_bid(self.side)[0]

    @property
    def bid(self) -> Fraction:
        return self.prices.ask_bid(self.side)[1]

    def scaled(self, factor: Fraction) -> "Trade":
        """Same trade with units multiplied by a positive ``factor``."""
        if factor <= 0:
            raise LedgerError("scale factor must be positive")
        return Trade(self.index, self.side, self.units * factor, self.prices, self.fee)


@dataclass(frozen=True)
class LedgerState:
    b: Fraction = Fraction(0)
    q: Fraction = Fraction(0)
    prev_b: Fraction = Fraction(0)
    prev_avg: Optional[Fraction] = field(default=None)
    count: int = 0

    @property
    def average_price(self) -> Optional[Fraction]:
        return average_price(self)


def spread(prices: PricePair) -> Fraction:
    return prices.spread


def average_price(state: LedgerState) -> Optional[Fraction]:
    """Average entry price ``-q/b``; ``None`` while the position is flat."""
    if state.b == 0:
        return None
    return -state.q / state.b


def apply_trade(state: LedgerState, trade: Trade, *, strict: bool = True) -> LedgerState:
    """Return the ledger after ``trade``. The input state is not modified."""
    if trade.units == 0:
        raise LedgerError(f"trade {trade.index}: units must be nonzero")
    if strict and not trade.prices.is_consistent_with(trade.side):
        raise LedgerError(
            f"trade {trade.index}: {trade.side.value} at {trade.x} with opposite "
            f"{trade.x_prime} is crossed (use strict=False for synthetic data)"
        )
    return LedgerState(
        b=state.b + trade.units,
        q=state.q - trade.x * trade.units,
        prev_b=state.b,
        prev_avg=average_price(state),
        count=state.count + 1,
    )


def replay(
    trades: Iterable[Trade],
    *,
    strict: bool = True,
    initial: Optional[LedgerState] = None,
) -> Iterator[LedgerState]:
    """Yield the ledger state after each trade, in order."""
    state = initial if initial is not None else LedgerState()
    for trade in trades:
        state = apply_trade(state, trade, strict=strict)
        yield state
