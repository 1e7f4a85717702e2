"""Spread-aware realized + unrealized PnL accounting for spot trading."""

from .ledger import (
    Fee,
    FeeCurrency,
    LedgerError,
    LedgerState,
    PricePair,
    Side,
    Trade,
    apply_trade,
    average_price,
    replay,
    spread,
)
from .performance import (
    PerformanceConfig,
    PerformanceRecord,
    compounded_return,
    denormalize,
    normalize,
    performance_series,
)
from .pnl import (
    ClosureParams,
    PnlRecord,
    apply_fee,
    closure_params,
    delta_series,
    mark_to_market,
    pnl_base,
    pnl_quote,
    pnl_series,
)
from .report import RunConfig, TradeLogError, parse_trade_log, render, run_report
from .wealth import (
    WealthConfig,
    WealthSnapshot,
    benchmark_wealth,
    conversion_price,
    portfolio_wealth,
    wealth_change_duality,
    wealth_pnl,
    wealth_series,
)

__all__ = [
    "ClosureParams", "Fee", "FeeCurrency", "LedgerError", "LedgerState",
    "PerformanceConfig", "PerformanceRecord", "PnlRecord", "PricePair", "RunConfig",
    "Side", "Trade", "TradeLogError", "WealthConfig", "WealthSnapshot",
    "apply_fee", "apply_trade", "average_price", "benchmark_wealth", "closure_params",
    "compounded_return", "conversion_price", "delta_series", "denormalize",
    "mark_to_market", "normalize", "parse_trade_log", "performance_series",
    "pnl_base", "pnl_quote", "pnl_series", "portfolio_wealth", "render", "replay",
    "run_report", "spread", "wealth_change_duality", "wealth_pnl", "wealth_series",
]

__version__ = "0.1.0"
