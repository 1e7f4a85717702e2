"""Command-line entry point: ``spreadpnl report`` and ``spreadpnl verify``.

Exit codes: 0 success, 1 validation or property failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .ledger import LedgerError
from .pnl import closure_params
from .rational import to_fraction
from .report import FORMATS, MODES, OUTPUTS, RunConfig, TradeLogError, parse_trade_log
from .report import render, run_report
from .testkit import CELLS, PROPERTIES, flipped_mu, verify


def _fraction_arg(text: str):
    try:
        return to_fraction(text)
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _count_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("count must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spreadpnl", description="Spread-aware PnL accounting for spot trades.")
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("report", help="account a trade log and print the report")
    rep.add_argument("--input", required=True, help="trade log path, or - for stdin")
    rep.add_argument("--format", choices=FORMATS, default=None,
                     help="input format (default: from file extension, else csv)")
    rep.add_argument("--base-balance", type=_fraction_arg, required=True)
    rep.add_argument("--quote-balance", type=_fraction_arg, required=True)
    rep.add_argument("--initial-price", type=_fraction_arg, required=True)
    rep.add_argument("--mode", choices=MODES, default="bidask")
    rep.add_argument("--output", choices=OUTPUTS, default="table")
    rep.add_argument("--precision", type=int, default=10)
    rep.add_argument("--no-strict", dest="strict", action="store_false",
                     help="accept crossed bid/ask pairs")

    ver = sub.add_parser("verify", help="check cross-route properties on random scenarios")
    ver.add_argument("--seed", type=int, required=True)
    ver.add_argument("--count", type=_count_arg, required=True)
    ver.add_argument("--output", choices=("text", "json"), default="text")
    ver.add_argument("--inject-fault", choices=("flip-mu",), default=None,
                     help="corrupt the closure rule to self-test the harness")
    return parser


def _cmd_report(args: argparse.Namespace) -> int:
    fmt = args.format
    if args.input == "-":
        data = sys.stdin.buffer.read()
    else:
        path = Path(args.input)
        try:
            data = path.read_bytes()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        if fmt is None:
            fmt = "json" if path.suffix.lower() == ".json" else "csv"
    fmt = fmt or "csv"
    try:
        config = RunConfig(args.base_balance, args.quote_balance, args.initial_price,
                           mode=args.mode, strict=args.strict, output=args.output,
                           precision=args.precision)
        trades = parse_trade_log(data, fmt, mode=args.mode, strict=args.strict)
        report = run_report(trades, config)
    except (TradeLogError, LedgerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(render(report, args.output, args.precision))
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    rule = flipped_mu() if args.inject_fault == "flip-mu" else closure_params
    result = verify(args.seed, args.count, closure_rule=rule)
    if args.output == "json":
        print(json.dumps(result.to_dict(), indent=2))
    else:
        for prop in PROPERTIES:
            print(f"{prop:<20} {result.passes[prop]}/{result.checked[prop]}")
        for b, q in CELLS:
            label = f"prev_b{'+' if b > 0 else '-'} q{'+' if q > 0 else '-'}"
            print(f"closure cell {label:<9} {'covered' if (b, q) in result.cells else 'MISSING'}")
        print(f"sequences: {args.count}, flat-ending {result.flat_sequences}, "
              f"with shorts {result.short_sequences}, "
              f"zero-crossing {result.crossing_sequences}")
        if result.counterexample is not None:
            print("counterexample:")
            print(json.dumps(result.counterexample.to_dict(), indent=2))
        print("OK" if result.ok else "FAILED")
    return 0 if result.ok else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "report":
        if args.precision < 0:
            parser.error("--precision must be >= 0")
        return _cmd_report(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
