"""Classify pairs into proof regions, issue certificates and re-check them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

from . import analytic
from .analytic import MarginReport, case_margin
from .errors import DomainError, FPCError, NoCertificate, WrongRegion
from .regions import (
    A_SPLIT,
    A_VI_MAX,
    B_BIG,
    B_MID,
    B_VIII_MAX,
    G_SHORT_MIN,
    K_LOW,
    K_MID,
    K_SMALL_A,
    CaseLabel,
    in_region,
)
from .semigroup import GeneratorPair, Representation, make_pair
from .serialize import dumps
from .sieve import first_prime_in_ap

SCHEMA_VERSION = 1

__all__ = [
    "CaseLabel",
    "Certificate",
    "certify",
    "classify",
    "verify_certificate",
    "witness_search",
]


def classify(pair: GeneratorPair) -> CaseLabel:
    """Route a pair to exactly one region, in a fixed priority order."""
    a, b, g = pair.a, pair.b, pair.g
    if a == 2:
        return CaseLabel.EdgeA2
    if pair.a_is_prime or pair.b_is_prime:
        return CaseLabel.PrimeGenerator
    log_b = math.log(b)
    if a > A_SPLIT:
        if a <= K_LOW * log_b:
            return CaseLabel.CaseI
        if a < K_MID * log_b:
            return CaseLabel.CaseIII
        return CaseLabel.CaseII if g > G_SHORT_MIN else CaseLabel.ResidualI
    if b > B_BIG:
        return CaseLabel.CaseIV if a <= K_SMALL_A * log_b else CaseLabel.CaseV
    if b >= B_MID:
        if a <= A_VI_MAX:
            return CaseLabel.CaseVI
        return CaseLabel.CaseVIII if b <= B_VIII_MAX else CaseLabel.CaseVII
    return CaseLabel.ResidualIII


def _witness_order(pair: GeneratorPair):
    yield 1
    yield 0
    yield from range(2, pair.g // pair.b + 1)


def witness_search(pair: GeneratorPair) -> Optional[Representation]:
    """First prime a*x + b*y <= g, trying y = 1, then y = 0, 2, 3, ...

    Within each y the smallest x wins.
    """
    a, b, g = pair.a, pair.b, pair.g
    for y in _witness_order(pair):
        if b * y > g:
            continue
        p = first_prime_in_ap(b * y, a, g)
        if p is not None:
            return Representation((p - b * y) // a, y, p)
    return None


@dataclass
class Certificate:
    pair: GeneratorPair
    label: CaseLabel
    kind: str  # "witness" | "analytic"
    witness: Optional[Representation] = None
    margin_report: Optional[MarginReport] = None
    issued_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def to_dict(self) -> dict:
        out = {"a": self.pair.a, "b": self.pair.b, "g": self.pair.g,
               "label": self.label.value, "kind": self.kind}
        if self.witness is not None:
            out["witness"] = {"p": self.witness.n, "x": self.witness.x, "y": self.witness.y}
        if self.margin_report is not None:
            out["margin_report"] = self.margin_report.to_dict()
        out["schema_version"] = SCHEMA_VERSION
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        """Rebuild a certificate; the pair is re-validated, nothing else is trusted."""
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
        pair = make_pair(int(d["a"]), int(d["b"]))
        if int(d["g"]) != pair.g:
            raise ValueError("stored g does not match a*b - a - b")
        label = CaseLabel(d["label"])
        witness = report = None
        if "witness" in d:
            w = d["witness"]
            witness = Representation(int(w["x"]), int(w["y"]), int(w["p"]))
        if "margin_report" in d:
            m = d["margin_report"]
            report = MarginReport(
                case_label=label,
                main_term=float(m["main"]),
                deduction_terms=[(t["name"], float(t["value"])) for t in m["deductions"]],
                margin=float(m["margin"]),
                safety_slack=float(m["slack"]),
                inputs=(pair.a, pair.b, pair.g),
            )
        return cls(pair, label, d["kind"], witness, report)


def _prime_generator_witness(pair: GeneratorPair) -> Representation:
    if pair.a_is_prime:
        return Representation(1, 0, pair.a)
    return Representation(0, 1, pair.b)


def certify(pair: GeneratorPair) -> Certificate:
    """Certificate that some prime p <= g is representable by the pair.

    Analytic labels try their margin first and fall back to a witness search
    when the margin cannot be evaluated or does not clear the safety slack.
    """
    label = classify(pair)
    if label is CaseLabel.EdgeA2:
        if pair.g < 2:
            raise NoCertificate(f"g = {pair.g}: the interval [0, g] contains no prime")
        return Certificate(pair, label, "witness", Representation(1, 0, 2))
    if label is CaseLabel.PrimeGenerator:
        return Certificate(pair, label, "witness", _prime_generator_witness(pair))
    if label.is_analytic:
        try:
            report = case_margin(pair, label)
        except (DomainError, WrongRegion):
            report = None
        if report is not None and report.certifies:
            return Certificate(pair, label, "analytic", margin_report=report)
    rep = witness_search(pair)
    if rep is None:
        raise NoCertificate(f"no representable prime found for ({pair.a}, {pair.b})")
    return Certificate(pair, label, "witness", rep)


# deterministic for n < 3.3e24
_INDEPENDENT_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def independent_is_prime(n: int) -> bool:
    """Primality by a route disjoint from :func:`fpc.sieve.is_prime`.

    Trial division below 10^7, Miller-Rabin over the first thirteen prime
    bases above that.
    """
    if n < 2:
        return False
    if n < 10**7:
        if n % 2 == 0:
            return n == 2
        return all(n % d for d in range(3, math.isqrt(n) + 1, 2))
    if n % 2 == 0:
        return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for base in _INDEPENDENT_BASES:
        x = pow(base, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _margins_agree(stored: MarginReport, fresh: MarginReport) -> bool:
    tol = max(1e-9 * abs(fresh.main_term), 1e-6)
    if [n for n, _ in stored.deduction_terms] != [n for n, _ in fresh.deduction_terms]:
        return False
    if abs(stored.main_term - fresh.main_term) > tol:
        return False
    return abs(stored.margin - fresh.margin) <= tol


def verify_certificate(cert: Certificate) -> bool:
    """Re-derive everything from (a, b); False on any mismatch."""
    try:
        pair = make_pair(cert.pair.a, cert.pair.b)
        if pair.g != cert.pair.g or classify(pair) is not cert.label:
            return False
        if cert.kind == "witness":
            w = cert.witness
            if w is None or w.x < 0 or w.y < 0:
                return False
            return (pair.a * w.x + pair.b * w.y == w.n and w.n <= pair.g
                    and independent_is_prime(w.n))
        if cert.kind == "analytic":
            if cert.margin_report is None or not cert.label.is_analytic:
                return False
            if not in_region(pair, cert.label):
                return False
            fresh = case_margin(pair, cert.label, rel_tol=analytic.LI_REL_TOL / 10)
            return fresh.certifies and cert.margin_report.certifies and _margins_agree(
                cert.margin_report, fresh)
        return False
    except (FPCError, ValueError, ArithmeticError):
        return False
