"""Percentage-of-balance performance against a fixed base-currency anchor."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .ledger import LedgerError, Trade, replay
from .pnl import ClosureRule, closure_params, pnl_series
from .rational import Number, to_fraction


@dataclass(frozen=True)
class PerformanceConfig:
    """Anchor balance ``B`` in base units; returns use 1.0 == 100%."""

    anchor_balance: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "anchor_balance", to_fraction(self.anchor_balance))
        if self.anchor_balance <= 0:
            raise LedgerError(f"anchor balance must be positive, got {self.anchor_balance}")


@dataclass(frozen=True)
class PerformanceRecord:
    index: int
    u_tilde: Fraction
    b_tilde: Fraction
    q_tilde: Fraction
    p_tilde: Fraction
    delta_p_tilde: Fraction
    # None once a compounding factor (1 + delta) has dropped to <= 0
    compounded: Optional[Fraction]


def normalize(trades: Iterable[Trade], config: PerformanceConfig) -> list[Trade]:
    """Trades with units expressed as fractions of the anchor balance."""
    factor = 1 / config.anchor_balance
    return [t.scaled(factor) for t in trades]


def compounded_return(deltas: Iterable[Number]) -> Fraction:
    """``prod(1 + d) - 1`` over per-trade deltas.

    Raises ``ValueError`` if any factor ``1 + d`` is not positive, since the
    product is then meaningless as a growth rate.
    """
    product = Fraction(1)
    for i, d in enumerate(deltas, start=1):
        factor = 1 + to_fraction(d)
        if factor <= 0:
            raise ValueError(f"compounding factor {factor} at step {i} is not positive")
        product *= factor
    return product - 1


def performance_series(
    trades: Sequence[Trade],
    config: PerformanceConfig,
    *,
    strict: bool = True,
    closure_rule: ClosureRule = closure_params,
) -> list[PerformanceRecord]:
    scaled = normalize(trades, config)
    states = list(replay(scaled, strict=strict))
    records = pnl_series(scaled, strict=strict, closure_rule=closure_rule, states=states)
    out: list[PerformanceRecord] = []
    growth: Optional[Fraction] = Fraction(1)
    for trade, state, rec in zip(scaled, states, records):
        if growth is not None:
            factor = 1 + rec.delta_base
            growth = growth * factor if factor > 0 else None
        out.append(PerformanceRecord(
            index=trade.index,
            u_tilde=trade.units,
            b_tilde=state.b,
            q_tilde=state.q,
            p_tilde=rec.p_base,
            delta_p_tilde=rec.delta_base,
            compounded=None if growth is None else growth - 1,
        ))
    return out


def denormalize(p_tilde: Number, config: PerformanceConfig,
                price: Number) -> tuple[Fraction, Fraction]:
    """Back to absolute ``(p_base, p_quote)``; ``price`` converts base to quote."""
    p_b = to_fraction(p_tilde) * config.anchor_balance
    return p_b, p_b * to_fraction(price)
