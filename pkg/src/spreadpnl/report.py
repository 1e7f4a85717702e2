"""Trade-log parsing, the full accounting pipeline, and report rendering."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from typing import IO, Any, Optional, Sequence, Union

from .ledger import Fee, FeeCurrency, LedgerError, PricePair, Side, Trade, replay
from .performance import PerformanceConfig, performance_series
from .pnl import pnl_series
from .rational import exact_str, format_decimal, to_fraction
from .wealth import WealthConfig, initial_snapshot, wealth_change_duality, wealth_series

FORMATS = ("csv", "json")
MODES = ("bidask", "mid")
OUTPUTS = ("table", "csv", "json")


class TradeLogError(ValueError):
    """A malformed trade log; ``row`` is 1-based over data rows."""

    def __init__(self, message: str, row: Optional[int] = None, field: Optional[str] = None):
        where = ""
        if row is not None:
            where = f"row {row}"
            if field:
                where += f", field {field!r}"
            where += ": "
        super().__init__(where + message)
        self.row = row
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    base_balance: Fraction
    quote_balance: Fraction
    initial_price: Fraction
    mode: str = "bidask"
    strict: bool = True
    output: str = "table"
    precision: int = 10

    def __post_init__(self) -> None:
        for name in ("base_balance", "quote_balance", "initial_price"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.output not in OUTPUTS:
            raise ValueError(f"output must be one of {OUTPUTS}")
        if self.precision < 0:
            raise ValueError("precision must be >= 0")

    @property
    def performance(self) -> PerformanceConfig:
        return PerformanceConfig(self.base_balance)

    @property
    def wealth(self) -> WealthConfig:
        return WealthConfig(self.base_balance, self.quote_balance, self.initial_price)


# --------------------------------------------------------------------------
# parsing


def _number(raw: Any, row: int, name: str) -> Fraction:
    try:
        return to_fraction(raw if not isinstance(raw, str) else raw.strip())
    except (TypeError, ValueError) as exc:
        raise TradeLogError(f"not a number: {raw!r}", row, name) from exc


def _present(record: dict, name: str) -> bool:
    value = record.get(name)
    return value is not None and str(value).strip() != ""


def _order_key(record: dict, row: int):
    if _present(record, "index"):
        return ("index", int(_number(record["index"], row, "index")))
    if _present(record, "timestamp"):
        raw = str(record["timestamp"]).strip()
        try:
            return ("timestamp", float(raw))
        except ValueError:
            pass
        try:
            return ("timestamp", datetime.fromisoformat(raw.replace("Z", "+00:00")).timestamp())
        except ValueError as exc:
            raise TradeLogError(f"unparseable timestamp {raw!r}", row, "timestamp") from exc
    return None


def _trade_from_record(record: dict, row: int, index: int, mode: str,
                       group: str, strict: bool) -> Trade:
    try:
        side = Side.parse(str(record.get("side", "")))
    except LedgerError as exc:
        raise TradeLogError(str(exc), row, "side") from None
    if not _present(record, "units"):
        raise TradeLogError("missing units", row, "units")
    units = _number(record["units"], row, "units")
    if units < 0:
        raise TradeLogError("units must be a positive magnitude; use side for direction",
                            row, "units")
    if units == 0:
        raise TradeLogError("units must be nonzero", row, "units")
    price = _number(record["price"], row, "price") if _present(record, "price") else None

    if group == "bidask":
        bid, ask = _number(record["bid"], row, "bid"), _number(record["ask"], row, "ask")
        x, xp = (ask, bid) if side is Side.BUY else (bid, ask)
        if price is not None and price != x:
            raise TradeLogError(f"price {price} does not match the {side.value} side {x}",
                                row, "price")
    else:
        if price is None:
            raise TradeLogError("missing price", row, "price")
        x = price
        xp = _number(record["opposite_price"], row, "opposite_price") if group == "opposite" \
            else price
    if mode == "mid":
        x = xp = (x + xp) / 2

    fee = None
    if _present(record, "fee_amount"):
        amount = _number(record["fee_amount"], row, "fee_amount")
        cur = str(record.get("fee_currency") or "").strip().lower()
        if cur not in (c.value for c in FeeCurrency):
            raise TradeLogError(f"unknown fee currency {record.get('fee_currency')!r}",
                                row, "fee_currency")
        try:
            fee = Fee(amount, FeeCurrency(cur))
        except LedgerError as exc:
            raise TradeLogError(str(exc), row, "fee_amount") from None
    elif _present(record, "fee_currency"):
        raise TradeLogError("fee_currency given without fee_amount", row, "fee_amount")

    signed = units if side is Side.BUY else -units
    try:
        prices = PricePair(x, xp)
        trade = Trade(index, side, signed, prices, fee)
    except LedgerError as exc:
        raise TradeLogError(str(exc), row) from None
    if strict and not prices.is_consistent_with(side):
        raise TradeLogError(
            f"{side.value} at {x} with opposite {xp} is crossed (pass --no-strict to allow)",
            row, "opposite_price" if group == "opposite" else "bid")
    return trade


def _records_from_csv(text: str) -> tuple[list[str], list[dict]]:
    if not text.strip():
        return [], []
    reader = csv.DictReader(io.StringIO(text))
    fields = [f.strip().lower() for f in (reader.fieldnames or [])]
    records = []
    for raw in reader:
        records.append({k.strip().lower(): v for k, v in raw.items() if k is not None})
    return fields, records


def _records_from_json(text: str) -> tuple[list[str], list[dict]]:
    if not text.strip():
        return [], []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TradeLogError(f"invalid JSON: {exc}") from None
    if isinstance(doc, dict):
        doc = doc.get("trades")
    if not isinstance(doc, list) or not all(isinstance(r, dict) for r in doc):
        raise TradeLogError("expected a list of trade objects or {\"trades\": [...]}")
    records = [{str(k).lower(): v for k, v in r.items()} for r in doc]
    fields = sorted({k for r in records for k in r if r[k] is not None})
    return fields, records


def parse_trade_log(source: Union[str, bytes, IO], fmt: str = "csv", *,
                    mode: str = "bidask", strict: bool = True) -> list[Trade]:
    """Parse a delimited or JSON trade log into validated trades.

    Each row carries ``side``, a positive ``units`` magnitude and either
    ``price`` + ``opposite_price`` or ``bid`` + ``ask``. In mid mode both
    prices collapse to their midpoint, and a bare ``price`` column is allowed.
    """
    if fmt not in FORMATS:
        raise TradeLogError(f"unknown format {fmt!r}")
    if mode not in MODES:
        raise TradeLogError(f"unknown mode {mode!r}")
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8-sig")
    fields, records = (_records_from_csv if fmt == "csv" else _records_from_json)(source)
    if not records:
        return []

    has_opp = "opposite_price" in fields
    has_bidask = "bid" in fields or "ask" in fields
    if has_bidask and not ("bid" in fields and "ask" in fields):
        raise TradeLogError("bid and ask columns must be given together")
    if has_opp and has_bidask:
        raise TradeLogError("give either opposite_price or bid/ask columns, not both")
    if not (has_opp or has_bidask) and mode != "mid":
        raise TradeLogError("need an opposite_price column or bid/ask columns")
    group = "opposite" if has_opp else "bidask" if has_bidask else "price"

    trades = []
    last_key = None
    for row, record in enumerate(records, start=1):
        key = _order_key(record, row)
        if key is not None:
            if last_key is not None and (key[0] != last_key[0] or key[1] <= last_key[1]):
                raise TradeLogError("rows must be strictly ordered by index/timestamp",
                                    row, key[0])
            last_key = key
        index = key[1] if key is not None and key[0] == "index" else row
        if index < 1:
            raise TradeLogError("index must be >= 1", row, "index")
        trades.append(_trade_from_record(record, row, index, mode, group, strict))
    return trades


TRADE_COLUMNS = ("index", "side", "units", "price", "opposite_price")
FEE_COLUMNS = ("fee_amount", "fee_currency")


def trade_log_records(trades: Sequence[Trade]) -> list[dict]:
    with_fees = any(t.fee is not None for t in trades)
    out = []
    for t in trades:
        rec = {
            "index": str(t.index),
            "side": t.side.value,
            "units": exact_str(abs(t.units)),
            "price": exact_str(t.x),
            "opposite_price": exact_str(t.x_prime),
        }
        if with_fees:
            rec["fee_amount"] = exact_str(t.fee.amount) if t.fee else ""
            rec["fee_currency"] = t.fee.currency.value if t.fee else ""
        out.append(rec)
    return out


def write_trade_log(trades: Sequence[Trade], fmt: str = "csv") -> str:
    """Lossless serialization; ``parse_trade_log`` reads it back unchanged."""
    records = trade_log_records(trades)
    if fmt == "json":
        return json.dumps({"trades": [{k: v for k, v in r.items() if v != ""}
                                      for r in records]}, indent=2) + "\n"
    columns = list(TRADE_COLUMNS)
    if any(t.fee is not None for t in trades):
        columns += FEE_COLUMNS
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(records)
    return buf.getvalue()


# --------------------------------------------------------------------------
# pipeline


ROW_COLUMNS = (
    "index", "side", "units", "price", "opposite_price",
    "b", "q", "avg_price",
    "p_base", "delta_base", "p_quote", "delta_quote",
    "p_base_net", "delta_base_net", "p_quote_net", "delta_quote_net",
    "u_tilde", "b_tilde", "q_tilde", "p_tilde", "delta_p_tilde", "compounded",
    "conversion_price",
    "benchmark_base", "portfolio_base", "benchmark_quote", "portfolio_quote",
    "wealth_pnl_base", "wealth_pnl_quote",
)


def run_report(trades: Sequence[Trade], config: RunConfig) -> dict:
    """Every per-trade column of the accounting pipeline plus summary totals.

    Numbers stay exact ``Fraction`` values (``None`` where undefined);
    rendering happens in :func:`render`.
    """
    trades = list(trades)
    try:
        states = list(replay(trades, strict=config.strict))
        pnl = pnl_series(trades, strict=config.strict, states=states)
        perf = performance_series(trades, config.performance, strict=config.strict)
        wealth = wealth_series(trades, config.wealth, strict=config.strict, states=states)
    except LedgerError as exc:
        raise LedgerError(f"pipeline failed: {exc}") from exc

    rows = []
    for t, s, r, p, w in zip(trades, states, pnl, perf, wealth):
        rows.append({
            "index": t.index, "side": t.side.value, "units": t.units,
            "price": t.x, "opposite_price": t.x_prime,
            "b": s.b, "q": s.q, "avg_price": s.average_price,
            "p_base": r.p_base, "delta_base": r.delta_base,
            "p_quote": r.p_quote, "delta_quote": r.delta_quote,
            "p_base_net": r.p_base_net, "delta_base_net": r.delta_base_net,
            "p_quote_net": r.p_quote_net, "delta_quote_net": r.delta_quote_net,
            "u_tilde": p.u_tilde, "b_tilde": p.b_tilde, "q_tilde": p.q_tilde,
            "p_tilde": p.p_tilde, "delta_p_tilde": p.delta_p_tilde,
            "compounded": p.compounded,
            "conversion_price": w.conversion_price,
            "benchmark_base": w.benchmark_base, "portfolio_base": w.portfolio_base,
            "benchmark_quote": w.benchmark_quote, "portfolio_quote": w.portfolio_quote,
            "wealth_pnl_base": w.pnl_base, "wealth_pnl_quote": w.pnl_quote,
        })

    start = initial_snapshot(config.wealth)
    end = wealth[-1] if wealth else start
    zero = Fraction(0)
    nu_base = end.portfolio_base - start.benchmark_base
    fees_base = sum((t.fee.amount for t in trades
                     if t.fee and t.fee.currency is FeeCurrency.BASE), zero)
    fees_quote = sum((t.fee.amount for t in trades
                      if t.fee and t.fee.currency is FeeCurrency.QUOTE), zero)
    summary = {
        "trades": len(trades),
        "b": states[-1].b if states else zero,
        "q": states[-1].q if states else zero,
        "p_base": pnl[-1].p_base if pnl else zero,
        "p_quote": pnl[-1].p_quote if pnl else zero,
        "p_base_net": pnl[-1].p_base_net if pnl else zero,
        "p_quote_net": pnl[-1].p_quote_net if pnl else zero,
        "fees_base": fees_base,
        "fees_quote": fees_quote,
        "p_tilde": perf[-1].p_tilde if perf else zero,
        "compounded": perf[-1].compounded if perf else zero,
        "conversion_price": end.conversion_price,
        "benchmark_base": end.benchmark_base,
        "portfolio_base": end.portfolio_base,
        "benchmark_quote": end.benchmark_quote,
        "portfolio_quote": end.portfolio_quote,
        "wealth_pnl_base": end.pnl_base,
        "wealth_pnl_quote": end.pnl_quote,
        "wealth_change_base": nu_base,
        "wealth_change_quote": wealth_change_duality(nu_base, end.conversion_price),
    }
    initial = {
        "price": start.conversion_price,
        "benchmark_base": start.benchmark_base,
        "benchmark_quote": start.benchmark_quote,
    }
    return {
        "config": {
            "base_balance": config.base_balance,
            "quote_balance": config.quote_balance,
            "initial_price": config.initial_price,
            "mode": config.mode,
            "strict": config.strict,
        },
        "initial": initial,
        "rows": rows,
        "summary": summary,
    }


# --------------------------------------------------------------------------
# rendering


def _json_value(value: Any, places: int) -> Any:
    if isinstance(value, Fraction):
        return {"decimal": format_decimal(value, places), "exact": exact_str(value)}
    if isinstance(value, dict):
        return {k: _json_value(v, places) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_value(v, places) for v in value]
    return value


def render_json(report: dict, precision: int = 10) -> str:
    return json.dumps(_json_value(report, precision), indent=2) + "\n"


def render_csv(report: dict, precision: int = 10) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ROW_COLUMNS)
    for row in report["rows"]:
        writer.writerow([
            format_decimal(row[c], precision) if isinstance(row[c], Fraction) or row[c] is None
            else row[c]
            for c in ROW_COLUMNS
        ])
    return buf.getvalue()


def _grid(title: str, headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    line = " | ".join(h.rjust(w) for h, w in zip(headers, widths))
    rule = "-+-".join("-" * w for w in widths)
    body = [" | ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join([title, line, rule, *body])


def render_table(report: dict, precision: int = 10) -> str:
    def f(v: Optional[Fraction]) -> str:
        return format_decimal(v, precision, thousands="'")

    def action(r: dict) -> str:
        return f"{r['side'].capitalize()} {exact_str(abs(r['units']))} @{exact_str(r['price'])}"

    rows = report["rows"]
    parts = [
        _grid("Balance sheet", ["action", "u", "x", "x'", "b", "q", "avg", "p_b"],
              [[action(r), exact_str(r["units"]), f(r["price"]), f(r["opposite_price"]),
                f(r["b"]), f(r["q"]), f(r["avg_price"]), f(r["p_base"])] for r in rows]),
        _grid("PnL", ["action", "price", "p_b", "dp_b", "p_q", "dp_q", "p_b net", "p_q net"],
              [[action(r), f(r["conversion_price"]), f(r["p_base"]), f(r["delta_base"]),
                f(r["p_quote"]), f(r["delta_quote"]), f(r["p_base_net"]), f(r["p_quote_net"])]
               for r in rows]),
        _grid("Performance", ["u~", "b~", "q~", "p~", "dp~", "compounded"],
              [[f(r["u_tilde"]), f(r["b_tilde"]), f(r["q_tilde"]), f(r["p_tilde"]),
                f(r["delta_p_tilde"]), f(r["compounded"])] for r in rows]),
        _grid("Wealth", ["W_b bench", "W_b", "p_b", "W_q bench", "W_q", "p_q"],
              [[f(r["benchmark_base"]), f(r["portfolio_base"]), f(r["wealth_pnl_base"]),
                f(r["benchmark_quote"]), f(r["portfolio_quote"]), f(r["wealth_pnl_quote"])]
               for r in rows]),
    ]
    s = report["summary"]
    summary = [f"{k:<20} {f(v) if isinstance(v, Fraction) or v is None else v}"
               for k, v in s.items()]
    parts.append("Summary\n" + "\n".join(summary))
    return "\n\n".join(parts) + "\n"


def render(report: dict, output: str = "table", precision: int = 10) -> str:
    if output == "json":
        return render_json(report, precision)
    if output == "csv":
        return render_csv(report, precision)
    return render_table(report, precision)
