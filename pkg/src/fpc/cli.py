"""Command-line interface: ``fpc certify|count|bounds|verify|check``.

Data goes to stdout, progress and diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from decimal import Decimal, InvalidOperation

import numpy as np

from . import analytic
from .casework import Certificate, certify, verify_certificate
from .errors import (
    CheckpointCorrupt,
    DomainError,
    NoApplicableLemma,
    NoCertificate,
    NotCoprime,
    OutOfDomain,
    RangeTooLarge,
    WrongRegion,
)
from .regions import CaseLabel
from .semigroup import make_pair
from .serialize import csv_text, dumps, format_real
from .sieve import pi_ab, prime_count
from .verifier import RangeJob, verify_range, verify_residual_i, verify_residual_iii

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_CERT = 3
EXIT_TOO_LARGE = 4
EXIT_FAILURES = 5
EXIT_CHECKPOINT = 6


class UsageError(Exception):
    pass


def parse_int(text: str) -> int:
    """Integer that may be written in scientific notation (5e8)."""
    try:
        d = Decimal(text)
    except InvalidOperation:
        raise UsageError(f"not a number: {text!r}") from None
    if not d.is_finite() or d != d.to_integral_value():
        raise UsageError(f"not an integer: {text!r}")
    return int(d)


def parse_real(text: str) -> float:
    try:
        return float(Decimal(text))
    except InvalidOperation:
        raise UsageError(f"not a number: {text!r}") from None


def _emit(fmt: str, human: str, payload: dict, header=None, rows=None) -> None:
    if fmt == "json":
        sys.stdout.write(dumps(payload) + "\n")
    elif fmt == "csv":
        if header is None:
            header = list(payload)
            rows = [[payload[k] for k in header]]
        sys.stdout.write(csv_text(header, rows))
    else:
        sys.stdout.write(human.rstrip("\n") + "\n")


# ---------------------------------------------------------------------------
# certify / check


def _cert_human(cert: Certificate) -> str:
    p = cert.pair
    lines = [f"a={p.a} b={p.b} g={p.g} label={cert.label} kind={cert.kind}"]
    if cert.witness is not None:
        w = cert.witness
        lines.append(f"prime {w.n} = {p.a}*{w.x} + {p.b}*{w.y} <= {p.g}")
    if cert.margin_report is not None:
        r = cert.margin_report
        lines.append(f"main term        {format_real(r.main_term)}")
        for name, value in r.deduction_terms:
            lines.append(f"  - {name:<22} {format_real(value)}")
        lines.append(f"margin           {format_real(r.margin)} (slack {format_real(r.safety_slack)})")
    return "\n".join(lines)


def _cert_csv(cert: Certificate):
    d = cert.to_dict()
    w = d.get("witness", {})
    m = d.get("margin_report", {})
    header = ["a", "b", "g", "label", "kind", "p", "x", "y", "main", "margin", "slack",
              "schema_version"]
    row = [d["a"], d["b"], d["g"], d["label"], d["kind"], w.get("p", ""), w.get("x", ""),
           w.get("y", ""), m.get("main", ""), m.get("margin", ""), m.get("slack", ""),
           d["schema_version"]]
    return header, [row]


def cmd_certify(args) -> int:
    pair = make_pair(parse_int(args.a), parse_int(args.b))
    cert = certify(pair)
    header, rows = _cert_csv(cert)
    _emit(args.format, _cert_human(cert), cert.to_dict(), header, rows)
    return EXIT_OK


def cmd_check(args) -> int:
    text = sys.stdin.read() if args.file == "-" else open(args.file, encoding="utf-8").read()
    try:
        cert = Certificate.from_dict(json.loads(text))
    except (ValueError, KeyError, TypeError) as exc:
        print(f"unreadable certificate: {exc}", file=sys.stderr)
        return EXIT_INVALID
    ok = verify_certificate(cert)
    _emit(args.format, "valid" if ok else "INVALID", {"valid": ok})
    return EXIT_OK if ok else EXIT_FAILURES


# ---------------------------------------------------------------------------
# count


def cmd_count(args) -> int:
    pair = make_pair(parse_int(args.a), parse_int(args.b))
    n_ab = pi_ab(pair)
    n_g = prime_count(pair.g) if pair.g >= 0 else 0
    ratio = n_ab / n_g if n_g else None
    shown = "n/a" if ratio is None else format_real(ratio)
    human = f"pi_ab={n_ab} pi(g)={n_g} (g={pair.g}) ratio={shown}"
    payload = {"a": pair.a, "b": pair.b, "g": pair.g, "pi_ab": n_ab, "pi_g": n_g, "ratio": ratio}
    _emit(args.format, human, payload, ["a", "b", "g", "pi_ab", "pi_g", "ratio"],
          [[pair.a, pair.b, pair.g, n_ab, n_g, ratio if ratio is not None else "n/a"]])
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds


def _f_value(g: float, K: float, log_b) -> float:
    lb = 0.5 * math.log(g) if log_b is None else log_b
    return analytic.short_interval_margin(g, lb, K).margin


def _bounds_f(args, tail: bool = False) -> int:
    K = args.K
    fn = (lambda g: analytic.short_interval_margin_tail(g, K, args.log_b)) if tail else \
        (lambda g: _f_value(g, K, args.log_b))
    name = "tail" if tail else "f"
    if args.at is not None:
        g = parse_real(args.at)
        v = fn(g)
        _emit(args.format, f"{name}({format_real(g)}; K={K:g}) = {format_real(v)}",
              {"expr": name, "K": K, "g": g, "value": v})
        return EXIT_OK
    if args.start is None or args.stop is None:
        raise UsageError(f"bounds {name} needs --at or --from/--to")
    grid = np.geomspace(parse_real(args.start), parse_real(args.stop), args.points)
    values = [fn(float(g)) for g in grid]
    k = int(np.argmin(values))
    points = [{"g": float(g), "value": v} for g, v in zip(grid, values)]
    summary = {"g": float(grid[k]), "value": values[k]}
    payload = {"expr": name, "K": K, "points": points, "min": summary,
               "all_positive": all(v > 0 for v in values)}
    rows = [["point", p["g"], p["value"]] for p in points] + [["min", summary["g"], summary["value"]]]
    human = (f"{name} over {args.points} log-spaced points in "
             f"[{format_real(grid[0])}, {format_real(grid[-1])}], K={K:g}\n"
             f"min {format_real(summary['value'])} at g={format_real(summary['g'])}\n"
             f"all positive: {payload['all_positive']}")
    _emit(args.format, human, payload, ["kind", "g", "value"], rows)
    return EXIT_OK


def cmd_bounds(args) -> int:
    expr, vals = args.expr, args.values
    if expr in ("f", "tail"):
        return _bounds_f(args, tail=(expr == "tail"))
    if expr == "li":
        header, rows = ["x", "li"], []
        for v in vals:
            x = parse_real(v)
            rows.append([x, analytic.log_integral(x)])
    elif expr == "panaitopol":
        header, rows = ["x", "lower", "upper"], []
        for v in vals:
            x = parse_real(v)
            rows.append([x, *analytic.panaitopol_bounds(x)])
    elif expr == "bennett":
        header, rows = ["q", "c0", "log_x0", "x0"], []
        for v in vals:
            q = parse_int(v)
            k = analytic.bennett_constants(q)
            rows.append([q, str(k.c0), k.log_x0, k.x0 if math.isfinite(k.x0) else "inf"])
    elif expr == "aperror":
        if len(vals) != 2:
            raise UsageError("bounds aperror X Q")
        x, q = parse_real(vals[0]), parse_int(vals[1])
        bound, src = analytic.ap_error_bound(x, q)
        header, rows = ["x", "q", "bound", "source"], [[x, q, bound, src]]
    elif expr == "margin":
        if len(vals) != 3:
            raise UsageError("bounds margin LABEL A B")
        label = CaseLabel(vals[0] if vals[0].startswith("Case") else "Case" + vals[0])
        rep = analytic.case_margin(make_pair(parse_int(vals[1]), parse_int(vals[2])), label)
        payload = {"label": label.value, "a": rep.inputs[0], "b": rep.inputs[1],
                   "g": rep.inputs[2], **rep.to_dict()}
        human = "\n".join(
            [f"{label} a={rep.inputs[0]} b={rep.inputs[1]} g={rep.inputs[2]}",
             f"main {format_real(rep.main_term)}"]
            + [f"  - {n}: {format_real(v)}" for n, v in rep.deduction_terms]
            + [f"margin {format_real(rep.margin)} (slack {format_real(rep.safety_slack)})"])
        _emit(args.format, human, payload, ["label", "a", "b", "g", "main", "margin", "slack"],
              [[label.value, *rep.inputs, rep.main_term, rep.margin, rep.safety_slack]])
        return EXIT_OK
    else:
        raise UsageError(f"unknown expression {expr!r}")
    if not rows:
        raise UsageError(f"bounds {expr} needs at least one argument")
    payload = {"expr": expr, "rows": [dict(zip(header, r)) for r in rows]}
    human = "\n".join(" ".join(format_real(c) if isinstance(c, float) else str(c) for c in r)
                      for r in rows)
    _emit(args.format, human, payload, header, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    region = args.region or ("rect" if args.rect else None)
    common = dict(checkpoint_path=args.checkpoint, resume=args.resume, workers=args.workers)
    if region == "i":
        rep = verify_residual_i(shard_count=args.shards or 16, **common)
    elif region == "iii":
        rep = verify_residual_iii(parse_int(args.a_cap), parse_int(args.b_cap),
                                  shard_count=args.shards or 1, **common)
    elif region == "rect":
        if not args.rect:
            raise UsageError("--region rect needs --rect A_LO A_HI B_LO B_HI")
        a_lo, a_hi, b_lo, b_hi = (parse_int(v) for v in args.rect)
        flt = CaseLabel(args.filter) if args.filter else None
        job = RangeJob(a_lo, a_hi, b_lo, b_hi, flt, args.shards or 1, args.checkpoint)
        rep = verify_range(job, resume=args.resume, workers=args.workers)
    else:
        raise UsageError("choose --region i|iii|rect")
    print(f"done in {rep.wall_time:.1f}s, {len(rep.failures)} failures", file=sys.stderr)
    if not rep.witness_y_all_one:
        print("warning: some witnesses needed y != 1", file=sys.stderr)
    d = rep.to_dict(timing=args.timing)
    human = "\n".join(f"{k}: {v}" for k, v in d.items() if k != "failures")
    human += "".join(f"\nFAIL a={f['a']} b={f['b']}: {f['reason']}" for f in d["failures"])
    keys = [k for k in d if k != "failures"]
    _emit(args.format, human, d, keys + ["failures"],
          [[d[k] for k in keys] + [len(d["failures"])]])
    return EXIT_OK if rep.ok else EXIT_FAILURES


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpc",
        description="Certify that some prime <= ab - a - b is a nonnegative combination of a and b.")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=("human", "json", "csv"), default="human")

    p = sub.add_parser("certify", help="certificate for one pair")
    p.add_argument("a")
    p.add_argument("b")
    fmt(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("check", help="re-verify a certificate JSON file ('-' for stdin)")
    p.add_argument("file")
    fmt(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("count", help="exact pi_ab, pi(g) and their ratio")
    p.add_argument("a")
    p.add_argument("b")
    fmt(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bounds", help="evaluate li, panaitopol, bennett, aperror, f, tail, margin")
    p.add_argument("expr")
    p.add_argument("values", nargs="*")
    p.add_argument("--K", type=float, default=155.0)
    p.add_argument("--log-b", type=float, default=None,
                   help="log b for f/tail (default: log sqrt(g))")
    p.add_argument("--at")
    p.add_argument("--from", dest="start")
    p.add_argument("--to", dest="stop")
    p.add_argument("--points", type=int, default=1000)
    fmt(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="certify every pair of a region")
    p.add_argument("--region", choices=("i", "iii", "rect"))
    p.add_argument("--rect", nargs=4, metavar=("A_LO", "A_HI", "B_LO", "B_HI"))
    p.add_argument("--filter", help="only pairs with this label (rect only)")
    p.add_argument("--a-cap", default="10000")
    p.add_argument("--b-cap", default="1000000")
    p.add_argument("--shards", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--checkpoint")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--timing", action="store_true", help="include wall_time in the report")
    fmt(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(message)s")
    try:
        return args.func(args)
    except NoCertificate as exc:
        print(f"no certificate: {exc}", file=sys.stderr)
        return EXIT_NO_CERT
    except RangeTooLarge as exc:
        print(f"range too large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except CheckpointCorrupt as exc:
        print(f"checkpoint corrupt: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except (UsageError, NotCoprime, OutOfDomain, DomainError, NoApplicableLemma,
            WrongRegion, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
