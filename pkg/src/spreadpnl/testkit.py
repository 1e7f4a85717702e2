"""Random trade sequences, an independent liquidation oracle, and the
cross-route verification harness behind ``spreadpnl verify``.

The oracle deliberately does not import the ledger or PnL code paths: it
re-sums balances from the raw trades so that agreement is meaningful.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .ledger import LedgerError, PricePair, Trade, replay
from .performance import PerformanceConfig, denormalize, performance_series
from .pnl import ClosureParams, ClosureRule, closure_params, pnl_series
from .rational import exact_str
from .wealth import WealthConfig, wealth_series

CELLS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class ScenarioSpec:
    min_length: int = 1
    max_length: int = 50
    price_min: Fraction = Fraction(50)
    price_max: Fraction = Fraction(250)
    spread_min: Fraction = Fraction(0)
    spread_max: Fraction = Fraction(1)
    p_close: float = 0.3
    p_short: float = 0.25
    p_mid: float = 0.15
    seed: int = 0
    denominator: int = 100
    max_units: int = 40

    def __post_init__(self) -> None:
        for name in ("price_min", "price_max", "spread_min", "spread_max"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.min_length < 1 or self.max_length < self.min_length:
            raise ValueError("need 1 <= min_length <= max_length")
        if self.price_min <= 0 or self.price_max < self.price_min:
            raise ValueError("need 0 < price_min <= price_max")
        if self.spread_min < 0 or self.spread_max < self.spread_min:
            raise ValueError("need 0 <= spread_min <= spread_max")
        for name in ("p_close", "p_short", "p_mid"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be a probability")
        if self.denominator < 1 or self.max_units < 1:
            raise ValueError("denominator and max_units must be >= 1")


@dataclass(frozen=True)
class Scenario:
    seed: int
    number: int
    trades: tuple[Trade, ...]
    mid: bool = False


def _rand_rational(rng: random.Random, lo: Fraction, hi: Fraction, den: int) -> Fraction:
    return Fraction(rng.randint(int(lo * den), int(hi * den)), den)


def generate_scenario(spec: ScenarioSpec, number: int) -> Scenario:
    """The ``number``-th scenario for ``spec.seed``; each is replayable alone."""
    rng = random.Random(f"{spec.seed}/{number}")
    den = spec.denominator
    end_flat = rng.random() < spec.p_close
    n = rng.randint(spec.min_length, spec.max_length)
    if end_flat:
        n = max(n, 2)
    mid = rng.random() < spec.p_mid
    short_only = rng.random() < spec.p_short
    price = _rand_rational(rng, spec.price_min, spec.price_max, den)
    span = (spec.price_max - spec.price_min) / 20
    b = Fraction(0)
    trades = []
    for i in range(1, n + 1):
        price = _rand_rational(rng, max(spec.price_min, price - span),
                               min(spec.price_max, price + span), den)
        s = Fraction(0) if mid else _rand_rational(rng, spec.spread_min, spec.spread_max, den)
        bid, ask = price, price + s
        last = i == n
        if b != 0 and ((last and end_flat) or rng.random() < spec.p_close) \
                and not (end_flat and i == n - 1):
            u = -b
        else:
            u = Fraction(rng.randint(1, 4 * spec.max_units), 4)
            if b == 0:
                sell = short_only or rng.random() < 0.5
            else:
                sell = rng.random() < 0.5
            if sell:
                u = -u
            if b + u == 0 and end_flat and i == n - 1:
                u += u / abs(u)
        x, xp = (ask, bid) if u > 0 else (bid, ask)
        trades.append(Trade.create(i, u, x, xp))
        b += u
    return Scenario(spec.seed, number, tuple(trades), mid)


def generate_scenarios(spec: ScenarioSpec, count: Optional[int] = None) -> Iterator[Scenario]:
    number = 0
    while count is None or number < count:
        yield generate_scenario(spec, number)
        number += 1


def closure_cells(trades: Sequence[Trade]) -> set[tuple[int, int]]:
    """(sign of base before, sign of quote after) for every flattening trade."""
    cells = set()
    b = q = Fraction(0)
    for t in trades:
        prev_b = b
        b += t.units
        q -= t.x * t.units
        if b == 0 and q != 0:
            cells.add((1 if prev_b > 0 else -1, 1 if q > 0 else -1))
    return cells


@dataclass(frozen=True)
class OracleResult:
    base: Fraction
    quote: Fraction
    stream: tuple[Fraction, ...]


def _conversion(units: Fraction, x: Fraction, xp: Fraction, b: Fraction, q: Fraction) -> Fraction:
    if b != 0 or q == 0:
        return xp
    ask, bid = (x, xp) if units > 0 else (xp, x)
    return ask if q > 0 else bid


def unified_stream(trades: Sequence[Trade]) -> list[Fraction]:
    """Total base PnL after each trade, as ``b + q / price`` from raw sums."""
    out = []
    b = q = Fraction(0)
    for t in trades:
        u, x, xp = Fraction(t.units), Fraction(t.prices.x), Fraction(t.prices.x_prime)
        b += u
        q -= x * u
        out.append(b + q / _conversion(u, x, xp, b, q))
    return out


def liquidation_oracle(trades: Sequence[Trade]) -> OracleResult:
    """PnL of a sequence that ends flat, by summing the quote balance and
    converting it at the ask (profit) or the bid (loss) of the last trade."""
    b = sum((t.units for t in trades), Fraction(0))
    if b != 0:
        raise ValueError(f"sequence does not end flat (final base balance {b})")
    q = -sum((t.prices.x * t.units for t in trades), Fraction(0))
    if q == 0:
        base = Fraction(0)
    else:
        last = trades[-1]
        ask, bid = ((last.prices.x, last.prices.x_prime) if last.units > 0
                    else (last.prices.x_prime, last.prices.x))
        base = q / (ask if q > 0 else bid)
    return OracleResult(base, q, tuple(unified_stream(trades)))


def flipped_mu(rule: ClosureRule = closure_params) -> ClosureRule:
    """Fault-injected closure rule with ``mu`` negated (harness self-test)."""
    def faulty(prev_b_sign: int, q_sign: int, prices: PricePair) -> ClosureParams:
        c = rule(prev_b_sign, q_sign, prices)
        return ClosureParams(-c.mu, c.x_hat)
    return faulty


def as_mid(trades: Sequence[Trade]) -> list[Trade]:
    return [Trade.create(t.index, t.units, t.prices.x, t.prices.x, t.fee) for t in trades]


def trade_rows(trades: Sequence[Trade]) -> list[dict]:
    return [
        {"index": t.index, "side": t.side.value, "units": exact_str(abs(t.units)),
         "price": exact_str(t.prices.x), "opposite_price": exact_str(t.prices.x_prime)}
        for t in trades
    ]


PROPERTIES = (
    "oracle_agreement",
    "unified_formula",
    "cross_equation",
    "telescoping",
    "mid_price_collapse",
)


@dataclass
class Counterexample:
    property: str
    seed: int
    scenario: int
    trade_index: Optional[int]
    detail: str
    trades: list[dict]

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "seed": self.seed,
            "scenario": self.scenario,
            "trade_index": self.trade_index,
            "detail": self.detail,
            "trades": self.trades,
        }


@dataclass
class VerificationReport:
    seed: int
    count: int
    passes: dict[str, int] = field(default_factory=lambda: {p: 0 for p in PROPERTIES})
    checked: dict[str, int] = field(default_factory=lambda: {p: 0 for p in PROPERTIES})
    cells: set[tuple[int, int]] = field(default_factory=set)
    flat_sequences: int = 0
    short_sequences: int = 0
    crossing_sequences: int = 0
    counterexample: Optional[Counterexample] = None

    @property
    def cells_covered(self) -> bool:
        return all(c in self.cells for c in CELLS)

    @property
    def ok(self) -> bool:
        return (self.counterexample is None and self.cells_covered
                and all(self.passes[p] == self.checked[p] for p in PROPERTIES))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "ok": self.ok,
            "properties": {p: {"passed": self.passes[p], "checked": self.checked[p]}
                           for p in PROPERTIES},
            "closure_cells": {f"prev_b{'+' if b > 0 else '-'}/q{'+' if q > 0 else '-'}":
                              (b, q) in self.cells for b, q in CELLS},
            "flat_sequences": self.flat_sequences,
            "short_sequences": self.short_sequences,
            "zero_crossing_sequences": self.crossing_sequences,
            "counterexample": None if self.counterexample is None
            else self.counterexample.to_dict(),
        }


class _Violation(Exception):
    def __init__(self, prop: str, trade_index: Optional[int], detail: str):
        super().__init__(detail)
        self.prop, self.trade_index, self.detail = prop, trade_index, detail


def _check(cond: bool, prop: str, trade_index: Optional[int], detail: str) -> None:
    if not cond:
        raise _Violation(prop, trade_index, detail)


def check_scenario(scenario: Scenario, closure_rule: ClosureRule = closure_params,
                   report: Optional[VerificationReport] = None) -> None:
    """Run every property on one scenario; raises ``_Violation`` on failure."""
    trades = list(scenario.trades)
    rng = random.Random(f"cfg/{scenario.seed}/{scenario.number}")
    anchor = Fraction(rng.randint(1, 2000), rng.randint(1, 8))
    wcfg = WealthConfig(Fraction(rng.randint(0, 1000)), Fraction(rng.randint(0, 100_000)),
                        Fraction(rng.randint(50, 250)))
    pcfg = PerformanceConfig(anchor)

    states = list(replay(trades))
    records = pnl_series(trades, closure_rule=closure_rule, states=states)
    perf = performance_series(trades, pcfg, closure_rule=closure_rule)
    wealth = wealth_series(trades, wcfg, states=states)

    def tick(prop: str) -> None:
        if report is not None:
            report.checked[prop] += 1
            report.passes[prop] += 1

    if report is not None:
        report.cells |= closure_cells(trades)
        if any(s.b < 0 for s in states):
            report.short_sequences += 1
        if any(s.b * s.prev_b < 0 for s in states):
            report.crossing_sequences += 1

    stream = unified_stream(trades)
    for rec, expected in zip(records, stream):
        _check(rec.p_base == expected, "unified_formula", rec.index,
               f"p_base {rec.p_base} != b + q/price {expected}")
    tick("unified_formula")

    for rec, pr, ws in zip(records, perf, wealth):
        via_perf_b, via_perf_q = denormalize(pr.p_tilde, pcfg, rec.price)
        _check(rec.p_base == via_perf_b == ws.pnl_base, "cross_equation", rec.index,
               f"base: direct {rec.p_base}, normalized {via_perf_b}, wealth {ws.pnl_base}")
        _check(rec.p_quote == via_perf_q == ws.pnl_quote, "cross_equation", rec.index,
               f"quote: direct {rec.p_quote}, normalized {via_perf_q}, wealth {ws.pnl_quote}")
    tick("cross_equation")

    if records:
        _check(sum(r.delta_base for r in records) == records[-1].p_base
               and sum(r.delta_quote for r in records) == records[-1].p_quote
               and sum(p.delta_p_tilde for p in perf) == perf[-1].p_tilde,
               "telescoping", None, "sum of deltas differs from final total")
    tick("telescoping")

    if states and states[-1].b == 0:
        if report is not None:
            report.flat_sequences += 1
        oracle = liquidation_oracle(trades)
        _check(records[-1].p_base == oracle.base and records[-1].p_quote == oracle.quote,
               "oracle_agreement", records[-1].index,
               f"engine ({records[-1].p_base}, {records[-1].p_quote}) != "
               f"oracle ({oracle.base}, {oracle.quote})")
        tick("oracle_agreement")

    mids = trades if scenario.mid else as_mid(trades)
    mid_states = list(replay(mids))
    mid_records = pnl_series(mids, closure_rule=closure_rule, states=mid_states)
    for rec, state, t in zip(mid_records, mid_states, mids):
        if rec.closure is not None:
            _check(rec.closure.mu == 0 and rec.closure.x_hat == t.prices.x,
                   "mid_price_collapse", rec.index, f"closure {rec.closure} at mid {t.prices.x}")
            _check(rec.p_base == state.q / t.prices.x, "mid_price_collapse", rec.index,
                   f"closed PnL {rec.p_base} != q/x {state.q / t.prices.x}")
    tick("mid_price_collapse")


def verify(seed: int, count: int, *, spec: Optional[ScenarioSpec] = None,
           closure_rule: ClosureRule = closure_params) -> VerificationReport:
    """Check all cross-route properties on ``count`` generated scenarios.

    Stops at the first violation and records it as a replayable counterexample.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    spec = spec or ScenarioSpec()
    spec = ScenarioSpec(**{**spec.__dict__, "seed": seed})
    report = VerificationReport(seed=seed, count=count)
    for scenario in generate_scenarios(spec, count):
        try:
            check_scenario(scenario, closure_rule, report)
        except _Violation as v:
            report.checked[v.prop] += 1
            report.counterexample = Counterexample(
                v.prop, seed, scenario.number, v.trade_index, v.detail,
                trade_rows(scenario.trades))
            break
        except LedgerError as exc:
            report.counterexample = Counterexample(
                "well_formed", seed, scenario.number, None, str(exc),
                trade_rows(scenario.trades))
            break
    return report
