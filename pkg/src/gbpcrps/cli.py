"""Command-line front end.

    gbp-crps crps --alpha 1 --beta 2 --p 1.5 --q 1 --y 1
    gbp-crps crps --input obs.csv --format json
    gbp-crps verify table1 --n 1000000 --seed 42
    gbp-crps verify quad --tol 1e-8
    gbp-crps verify reductions --grid 200

Exit codes: 0 on success, 1 on malformed input or usage, 2 when any row
failed or a verification threshold was violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import verify
from .crps import (
    WARN_EXTENDED,
    CrpsBreakdown,
    crps_auto,
    crps_dagum,
    crps_gbp,
    crps_log_logistic,
    crps_singh_maddala,
)
from .distribution import GbpParams
from .errors import DomainError
from .specfun import SeriesControl

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_FAILED = 2

FIELDS = ("alpha", "beta", "p", "q", "y")
FAMILIES = ("auto", "gbp", "sm", "dagum", "ll")


class InputError(Exception):
    """Malformed input; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class ScoreRecord:
    alpha: float
    beta: float
    p: float
    q: float
    y: float
    crps: float | None = None
    formula: str | None = None
    warnings: list[str] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in FIELDS}
        if self.error is None:
            d["crps"] = self.crps
            d["formula"] = self.formula
        d["warnings"] = list(self.warnings)
        if self.error is not None:
            d["error"] = self.error
        return d


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def _score_family(params: GbpParams, y: float, family: str) -> CrpsBreakdown:
    a, b, p, q = params.alpha, params.beta, params.p, params.q
    if family == "auto":
        return crps_auto(params, y)
    if family == "gbp":
        return crps_gbp(params, y)
    if family == "sm":
        if a != 1:
            raise DomainError("family sm requires alpha == 1")
        return crps_singh_maddala(b, p, q, y)
    if family == "dagum":
        if b != 1:
            raise DomainError("family dagum requires beta == 1")
        return crps_dagum(a, p, q, y)
    if a != 1 or b != 1:
        raise DomainError("family ll requires alpha == beta == 1")
    return crps_log_logistic(p, q, y)


def score(alpha: float, beta: float, p: float, q: float, y: float,
          family: str = "auto") -> ScoreRecord:
    """Score one observation; failures are recorded on the record."""
    rec = ScoreRecord(alpha, beta, p, q, y)
    try:
        params = GbpParams(alpha, beta, p, q)
        if not math.isfinite(y):
            raise DomainError(f"observation must be finite, got {y}")
        if y < 0:
            res = _score_family(params, 0.0, family)
            rec.crps = res.crps - y
            rec.warnings = [*res.warnings, WARN_EXTENDED]
        else:
            res = _score_family(params, y, family)
            rec.crps = res.crps
            rec.warnings = list(res.warnings)
        rec.formula = res.formula
    except (ArithmeticError, ValueError) as exc:
        rec.error = _describe(exc)
    return rec


def _describe(exc: Exception) -> str:
    msg = str(exc)
    return msg if msg.startswith("infinite mean") else f"{type(exc).__name__}: {msg}"


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------

def _to_float(value, line: int, name: str) -> float:
    if isinstance(value, bool) or value is None:
        raise InputError(line, f"{name} is not a number: {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise InputError(line, f"{name} is not a number: {value!r}") from None


def parse_csv(text: str) -> list[tuple[float, ...]]:
    """Rows of ``alpha,beta,p,q,y``; header names are case-insensitive, any order."""
    reader = csv.reader(io.StringIO(text))
    header = None
    rows = []
    for lineno, raw in enumerate(reader, start=1):
        if not raw or all(not c.strip() for c in raw):
            continue
        if header is None:
            header = [c.strip().lower() for c in raw]
            missing = [f for f in FIELDS if f not in header]
            if missing:
                raise InputError(lineno, f"header lacks column(s): {', '.join(missing)}")
            idx = [header.index(f) for f in FIELDS]
            continue
        if len(raw) != len(header):
            raise InputError(lineno, f"expected {len(header)} fields, got {len(raw)}")
        rows.append(tuple(_to_float(raw[i].strip(), lineno, f) for i, f in zip(idx, FIELDS)))
    if header is None:
        raise InputError(1, "empty input")
    return rows


def parse_jsonl(text: str) -> list[tuple[float, ...]]:
    """One JSON object per line with (case-insensitive) keys alpha, beta, p, q, y."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InputError(lineno, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise InputError(lineno, "expected a JSON object")
        obj = {str(k).lower(): v for k, v in obj.items()}
        missing = [f for f in FIELDS if f not in obj]
        if missing:
            raise InputError(lineno, f"missing key(s): {', '.join(missing)}")
        rows.append(tuple(_to_float(obj[f], lineno, f) for f in FIELDS))
    return rows


def parse_input(text: str, name: str = "") -> list[tuple[float, ...]]:
    suffix = Path(name).suffix.lower()
    if suffix in (".jsonl", ".json", ".ndjson") or text.lstrip().startswith("{"):
        return parse_jsonl(text)
    return parse_csv(text)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _num17(x: float | None) -> str:
    return "" if x is None else format(x, ".17g")


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_records(records: list[ScoreRecord], fmt: str, out) -> None:
    if fmt == "json":
        for r in records:
            out.write(json.dumps(_jsonable(r.to_dict())) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow([*FIELDS, "crps", "formula", "warnings", "error"])
        for r in records:
            w.writerow([*(_num17(getattr(r, f)) for f in FIELDS), _num17(r.crps),
                        r.formula or "", ";".join(r.warnings), r.error or ""])
    else:
        header = ["alpha", "beta", "p", "q", "y", "crps", "formula", "warnings"]
        body = []
        for r in records:
            crps = f"{r.crps:.6f}" if r.error is None else "error"
            note = r.error if r.error is not None else ",".join(r.warnings)
            body.append([f"{r.alpha:g}", f"{r.beta:g}", f"{r.p:g}", f"{r.q:g}",
                         f"{r.y:g}", crps, r.formula or "-", note])
        widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(header)]
        out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
        for b in body:
            out.write("  ".join(c.ljust(w) for c, w in zip(b, widths)).rstrip() + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_crps(args) -> int:
    # surface a malformed tolerance override once, not per row
    SeriesControl.from_env()
    single = [getattr(args, f) for f in FIELDS]
    if args.input is not None:
        if any(v is not None for v in single):
            raise InputError(0, "use either --input or the single-observation flags")
        if args.input == "-":
            text, name = sys.stdin.read(), ""
        else:
            try:
                text = Path(args.input).read_text()
            except OSError as exc:
                raise InputError(0, f"cannot read {args.input}: {exc.strerror}") from None
            name = args.input
        rows = parse_input(text, name)
    else:
        if any(v is None for v in single):
            missing = [f"--{f}" for f, v in zip(FIELDS, single) if v is None]
            raise InputError(0, f"missing {' '.join(missing)} (or pass --input)")
        rows = [tuple(single)]

    def run(row):
        return score(*row, family=args.family)

    if args.workers > 1 and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            records = list(pool.map(run, rows))
    else:
        records = [run(r) for r in rows]
    write_records(records, args.format, sys.stdout)
    return EXIT_FAILED if any(r.error for r in records) else EXIT_OK


def _emit_rows(rows, fmt: str, text: str) -> None:
    if fmt == "json":
        for r in rows:
            sys.stdout.write(json.dumps(_jsonable(r.to_dict())) + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_verify(args) -> int:
    if args.check == "table1":
        rows = verify.table1_report(args.n, args.seed, workers=args.workers,
                                    estimator=args.estimator)
        _emit_rows(rows, args.format, verify.format_table1(rows))
        ok = all(r.ok for r in rows)
    elif args.check == "quad":
        rows = verify.quadrature_report(args.tol)
        _emit_rows(rows, args.format, verify.format_quadrature(rows))
        ok = all(r.ok for r in rows)
    else:
        report = verify.reduction_check(args.grid, args.seed)
        _emit_rows([report], args.format, verify.format_reductions(report))
        ok = report.ok
    return EXIT_OK if ok else EXIT_FAILED


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gbp-crps",
                     description="Closed-form CRPS for the generalized Beta-prime family.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_crps = sub.add_parser("crps", help="score observations")
    for f in FIELDS:
        p_crps.add_argument(f"--{f}", type=float, default=None)
    p_crps.add_argument("--input", help="CSV or JSON-lines file ('-' for stdin)")
    p_crps.add_argument("--family", choices=FAMILIES, default="auto")
    p_crps.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p_crps.add_argument("--workers", type=int, default=1)
    p_crps.set_defaults(func=cmd_crps)

    p_ver = sub.add_parser("verify", help="run the verification reports")
    checks = p_ver.add_subparsers(dest="check", required=True, parser_class=_Parser)
    t1 = checks.add_parser("table1", help="closed form vs Monte Carlo on the reference rows")
    t1.add_argument("--n", type=int, default=1_000_000)
    t1.add_argument("--seed", type=int, default=42)
    t1.add_argument("--workers", type=int, default=1)
    t1.add_argument("--estimator", choices=verify.ESTIMATORS, default="cdf-form")
    quad = checks.add_parser("quad", help="closed form vs quadrature on the reference rows")
    quad.add_argument("--tol", type=float, default=1e-8)
    red = checks.add_parser("reductions", help="general formula vs special cases")
    red.add_argument("--grid", type=int, default=200)
    red.add_argument("--seed", type=int, default=0)
    for p in (t1, quad, red):
        p.add_argument("--format", choices=("text", "json"), default="text")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"gbp-crps: {exc}\n")
        return EXIT_PARSE
    except DomainError as exc:
        sys.stderr.write(f"gbp-crps: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
