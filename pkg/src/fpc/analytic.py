"""Real-valued bound machinery.

The logarithmic integral, two-sided elementary bounds for pi(x), explicit
error terms for primes in arithmetic progressions, and the margin functions
whose positivity certifies a representable prime for a whole region of pairs.
Everything is double precision; certificates demand ``margin > slack``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import DomainError, NoApplicableLemma, WrongRegion
from .regions import (
    A_SPLIT,
    B_BIG,
    B_MID,
    CaseLabel,
    K_LOW,
    SHORT_INTERVAL_K,
    in_region,
)
from .semigroup import GeneratorPair

LI_REL_TOL = 1e-12
PANAITOPOL_MIN = 59.0
TAIL_MIN_G = 1e18
SLACK_FLOOR = 1.0
SLACK_REL = 1e-9

# explicit error coefficients for |pi(x; q, m) - Li(x)/phi(q)|
UNIFORM_ERR = 0.027       # q <= 10^5, x >= 10^6
SQRT_ERR = 2.734          # 100 <= q <= 10^4, x <= 10^11, as max over y <= x
SQRT_ERR_X_MAX = 1e11
UNIFORM_Q_MAX = 10**5
VIII_COEF = 5.5           # >= 2 * SQRT_ERR, as used for the two endpoint errors

SRC_SIEGEL_WALFISZ = "explicit_siegel_walfisz"
SRC_UNIFORM = "uniform_q_le_1e5"
SRC_SQRT = "sqrt_x_le_1e11"


# ---------------------------------------------------------------------------
# logarithmic integral


def _adaptive_simpson(f: Callable[[float], float], lo: float, hi: float, tol: float,
                      max_depth: int = 60) -> float:
    fa, fm, fb = f(lo), f(0.5 * (lo + hi)), f(hi)
    whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(lo, hi, fa, fm, fb, whole, tol, 0)]
    parts = []
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            parts.append(left + right + delta / 15.0)
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
    return math.fsum(parts)


def _li_integrand(u: float) -> float:
    # dt/log t with t = e^u
    return math.exp(u) / u


def log_integral(x: float, rel_tol: float = LI_REL_TOL) -> float:
    """Li(x) = integral from 2 to x of dt / log t."""
    if x < 2:
        raise DomainError(f"Li(x) needs x >= 2, got {x}")
    if x == 2:
        return 0.0
    lo, hi = math.log(2.0), math.log(x)
    scale = max(1.0, x / hi)
    return _adaptive_simpson(_li_integrand, lo, hi, rel_tol * scale)


def log_integral_between(lo: float, hi: float, rel_tol: float = LI_REL_TOL) -> float:
    """Integral from lo to hi of dt / log t (lo, hi >= 2)."""
    if lo < 2 or hi < 2:
        raise DomainError("integration limits must be >= 2")
    if hi <= lo:
        return -log_integral_between(hi, lo, rel_tol) if hi < lo else 0.0
    scale = max(1e-300, (hi - lo) / math.log(hi))
    if hi <= 2.0 * lo:
        # log lo and log hi nearly cancel on narrow windows; stay in t
        return _adaptive_simpson(lambda t: 1.0 / math.log(t), lo, hi, rel_tol * scale)
    u0, u1 = math.log(lo), math.log(hi)
    return _adaptive_simpson(_li_integrand, u0, u1, rel_tol * max(1.0, scale))


# ---------------------------------------------------------------------------
# pi(x) envelopes and explicit constants


def panaitopol_bounds(x: float) -> tuple[float, float]:
    """Elementary bounds lower < pi(x) < upper, valid for x >= 59."""
    if x < PANAITOPOL_MIN:
        raise DomainError(f"bounds hold for x >= 59, got {x}")
    L = math.log(x)
    r = L ** -0.5
    return x / (L - 1.0 + r), x / (L - 1.0 - r)


@dataclass(frozen=True)
class BennettConstants:
    c0: Fraction
    log_x0: float

    @property
    def x0(self) -> float:
        try:
            return math.exp(self.log_x0)
        except OverflowError:
            return math.inf


def bennett_constants(q: int) -> BennettConstants:
    """Error coefficient c0(q) and validity threshold x0(q) for modulus q >= 3.

    For 10^4 < q <= 10^5 the large-modulus threshold is used; it exceeds
    8*10^9 there, so this is never weaker than the small-modulus value.
    """
    if q < 3:
        raise DomainError(f"modulus must be >= 3, got {q}")
    if q <= A_SPLIT:
        return BennettConstants(Fraction(1, 840), math.log(B_BIG))
    lq = math.log(q)
    return BennettConstants(Fraction(1, 160), 0.03 * math.sqrt(q) * lq**3)


def ap_error_bound(x: float, q: int) -> tuple[float, str]:
    """Sharpest applicable bound on |pi(x; q, m) - Li(x)/phi(q)|.

    Returns ``(bound, source)``; raises :class:`NoApplicableLemma` when no
    known window contains (x, q).
    """
    if x < 2:
        raise NoApplicableLemma(f"x = {x} below every window")
    L = math.log(x)
    options = []
    if q >= 3:
        k = bennett_constants(q)
        if L >= k.log_x0:
            options.append((float(k.c0) * x / L**2, SRC_SIEGEL_WALFISZ))
    if 1 <= q <= UNIFORM_Q_MAX and x >= 1e6:
        options.append((UNIFORM_ERR * x / L**2, SRC_UNIFORM))
    if 100 <= q <= A_SPLIT and x <= SQRT_ERR_X_MAX:
        options.append((SQRT_ERR * math.sqrt(x) / L, SRC_SQRT))
    if not options:
        raise NoApplicableLemma(f"no error bound covers x={x:g}, q={q}")
    return min(options)


# ---------------------------------------------------------------------------
# margins


def safety_slack(main_term: float) -> float:
    return max(SLACK_FLOOR, SLACK_REL * abs(main_term))


@dataclass
class MarginReport:
    """One evaluated inequality: ``margin = main_term - sum(deductions)``."""

    case_label: CaseLabel
    main_term: float
    deduction_terms: list[tuple[str, float]]
    margin: float
    safety_slack: float
    inputs: tuple[Optional[int], Optional[int], int] = field(default=(None, None, 0))

    @property
    def certifies(self) -> bool:
        return self.margin > self.safety_slack

    def consistent(self) -> bool:
        recomputed = self.main_term - math.fsum(v for _, v in self.deduction_terms)
        return abs(recomputed - self.margin) <= 2 * math.ulp(max(abs(self.main_term), 1.0))

    def to_dict(self) -> dict:
        return {
            "main": self.main_term,
            "deductions": [{"name": n, "value": v} for n, v in self.deduction_terms],
            "margin": self.margin,
            "slack": self.safety_slack,
        }


def _report(label, main, deductions, inputs) -> MarginReport:
    margin = main - math.fsum(v for _, v in deductions)
    return MarginReport(label, main, deductions, margin, safety_slack(main), inputs)


def short_interval_margin(g: float, log_b: float, K: float,
                          label: Optional[CaseLabel] = None,
                          inputs: Optional[tuple] = None) -> MarginReport:
    """Lower bound for representable primes in (g - g/log g, g].

    Lower envelope of pi(g), minus the upper envelope of pi(g - g/log g),
    minus the lattice-count bound g/(2 log^2 g) + g/(K log b log g)
    + sqrt(g)/log g + 1 on the non-representable integers in that window.
    """
    gf = float(g)
    L = math.log(gf)
    h = gf - gf / L
    if gf < PANAITOPOL_MIN or h < PANAITOPOL_MIN:
        raise DomainError(f"g = {g} too small for the pi(x) envelopes")
    if label is None:
        label = next((lab for lab, k in SHORT_INTERVAL_K.items() if k == K), CaseLabel.CaseII)
    lower, _ = panaitopol_bounds(gf)
    _, upper = panaitopol_bounds(h)
    deductions = [
        ("pi_upper(g - g/log g)", upper),
        ("g/(2 log^2 g)", gf / (2.0 * L * L)),
        (f"g/({K:g} log b log g)", gf / (K * log_b * L)),
        ("sqrt(g)/log g", math.sqrt(gf) / L),
        ("1", 1.0),
    ]
    return _report(label, lower, deductions, inputs or (None, None, int(g)))


def short_interval_margin_tail(g: float, K: float = 155.0, log_b: Optional[float] = None,
                               printed: bool = False) -> float:
    """Closed-form lower bound for the short-interval margin when g > 10^18.

    Expanding both envelopes to second order gives

        f(g) > g/(4 L^2) - g/(K log_b L) - g/L^2.5 + 5 g/(4 L^3) - sqrt(g)/L - 1

    with L = log g. With log_b = L/2 (the b > sqrt(g) substitution, the
    default) the first two terms combine to (1/4 - 2/K) g/L^2, i.e. 147/620
    for K = 155, 101/420 for K = 210; for K = 4.2 the coefficient is negative
    and a real log b must be supplied. ``printed=True`` drops the factor g
    from the 5/(4 L^3) term; both variants are lower bounds.
    """
    if g <= TAIL_MIN_G:
        raise DomainError(f"tail bound is for g > 1e18, got {g:g}")
    gf = float(g)
    L = math.log(gf)
    lb = 0.5 * L if log_b is None else log_b
    cubic = 5.0 / (4.0 * L**3) if printed else 5.0 * gf / (4.0 * L**3)
    return (gf / (4.0 * L * L) - gf / (K * lb * L) - gf / L**2.5 + cubic
            - math.sqrt(gf) / L - 1.0)


def short_interval_f(g: float, K: float = 155.0) -> float:
    """Margin as a function of g alone, with log b replaced by log sqrt(g)."""
    return short_interval_margin(g, 0.5 * math.log(float(g)), K).margin


def case_i_constant_chain(a: int, b: int) -> float:
    """(1 - b/g)/4.2 - 1/80: the Case-I margin divided by g/log^2 g.

    Positive iff 80 (g - b) - 4.2 g > 0. Works for arbitrarily large integers.
    """
    g = a * b - a - b
    return (1.0 - b / g) / K_LOW - 1.0 / 80.0


def _wrong(pair: GeneratorPair, label: CaseLabel, why: str = "") -> WrongRegion:
    return WrongRegion(f"({pair.a}, {pair.b}) is not in {label}{': ' + why if why else ''}")


def ap_count_margin(pair: GeneratorPair, variant: CaseLabel,
                    rel_tol: float = LI_REL_TOL) -> MarginReport:
    """Margin of the arithmetic-progression count for cases I, IV, VI, VII, VIII.

    Counts primes p = b (mod a) in (b, g]; each such p is b + a*x.
    """
    if not in_region(pair, variant):
        raise _wrong(pair, variant)
    a, b, g, phi = pair.a, pair.b, pair.g, pair.phi_a
    inputs = (a, b, g)
    try:
        gf, bf = float(g), float(b)
    except OverflowError as exc:
        raise DomainError("pair too large for double precision") from exc
    L, Lb = math.log(gf), math.log(bf)

    if variant is CaseLabel.CaseI:
        k = bennett_constants(a)
        if Lb < k.log_x0:
            raise _wrong(pair, variant, "b below x0(a)")
        main = (gf - bf) / (K_LOW * L * L)
        return _report(variant, main, [("g/(80 log^2 g)", gf / (80.0 * L * L))], inputs)

    if variant is CaseLabel.CaseIV:
        k = bennett_constants(a)
        if Lb < k.log_x0:
            raise _wrong(pair, variant, "b below x0(a)")
        main = (gf - bf) / (phi * L)
        return _report(variant, main, [("g/(420 log^2 g)", gf / (420.0 * L * L))], inputs)

    if variant is CaseLabel.CaseVI:
        if a > UNIFORM_Q_MAX or b < B_MID:
            raise _wrong(pair, variant, "outside the uniform error window")
        main = log_integral_between(bf, gf, rel_tol) / phi
        deductions = [
            ("0.027 g/log^2 g", UNIFORM_ERR * gf / (L * L)),
            ("0.027 b/log^2 b", UNIFORM_ERR * bf / (Lb * Lb)),
        ]
        return _report(variant, main, deductions, inputs)

    if variant is CaseLabel.CaseVII:
        k = bennett_constants(a)
        if L < k.log_x0:
            raise _wrong(pair, variant, "g below x0(a)")
        main = log_integral(gf, rel_tol) / phi
        deductions = [
            ("b/a + 1", bf / a + 1.0),
            ("g/(840 log^2 g)", float(k.c0) * gf / (L * L)),
        ]
        return _report(variant, main, deductions, inputs)

    if variant is CaseLabel.CaseVIII:
        if not (100 <= a <= A_SPLIT) or gf > SQRT_ERR_X_MAX:
            raise _wrong(pair, variant, "outside the sqrt error window")
        main = log_integral_between(bf, gf, rel_tol) / phi
        return _report(variant, main, [("5.5 sqrt(g)/log g", VIII_COEF * math.sqrt(gf) / L)], inputs)

    raise _wrong(pair, variant, "not an arithmetic-progression case")


def case_margin(pair: GeneratorPair, label: CaseLabel, rel_tol: float = LI_REL_TOL) -> MarginReport:
    """Evaluate whichever margin certifies ``label`` for this pair."""
    if label in SHORT_INTERVAL_K:
        if not in_region(pair, label):
            raise _wrong(pair, label)
        return short_interval_margin(pair.g, math.log(pair.b), SHORT_INTERVAL_K[label],
                                     label=label, inputs=(pair.a, pair.b, pair.g))
    return ap_count_margin(pair, label, rel_tol)
