"""Case labels and the region predicates of parameter space they name."""

from __future__ import annotations

import math
from enum import Enum

from .semigroup import GeneratorPair

A_SPLIT = 10**4          # small-modulus / large-modulus boundary for a
A_VI_MAX = 808           # largest a handled by the uniform 0.027 bound
B_BIG = 8 * 10**9        # validity threshold x0 for moduli <= 10^4
B_MID = 10**6
B_VIII_MAX = 10**7
G_SHORT_MIN = 5 * 10**8  # short-interval margin is verified from here up
K_LOW = 4.2
K_MID = 155.0
K_SMALL_A = 210.0


class CaseLabel(str, Enum):
    PrimeGenerator = "PrimeGenerator"
    CaseI = "CaseI"
    CaseII = "CaseII"
    CaseIII = "CaseIII"
    CaseIV = "CaseIV"
    CaseV = "CaseV"
    CaseVI = "CaseVI"
    CaseVII = "CaseVII"
    CaseVIII = "CaseVIII"
    ResidualI = "ResidualI"
    ResidualIII = "ResidualIII"
    EdgeA2 = "EdgeA2"

    def __str__(self) -> str:
        return self.value

    @property
    def is_analytic(self) -> bool:
        return self in ANALYTIC_LABELS

    @property
    def is_residual(self) -> bool:
        return self in (CaseLabel.ResidualI, CaseLabel.ResidualIII)


ANALYTIC_LABELS = frozenset(
    {
        CaseLabel.CaseI,
        CaseLabel.CaseII,
        CaseLabel.CaseIII,
        CaseLabel.CaseIV,
        CaseLabel.CaseV,
        CaseLabel.CaseVI,
        CaseLabel.CaseVII,
        CaseLabel.CaseVIII,
    }
)

SHORT_INTERVAL_K = {
    CaseLabel.CaseII: K_MID,
    CaseLabel.CaseIII: K_LOW,
    CaseLabel.CaseV: K_SMALL_A,
}


def _composite_pair(p: GeneratorPair) -> bool:
    return not (p.a_is_prime or p.b_is_prime)


def in_region(p: GeneratorPair, label: CaseLabel) -> bool:
    """Whether the pair satisfies the header inequalities of ``label``.

    Analytic regions do not demand composite generators; the dispatcher
    routes prime generators away before they are consulted.
    """
    a, b, g = p.a, p.b, p.g
    log_b = math.log(b)
    below_sqrt = a < math.sqrt(g) + 1 if g > 0 else False
    if label is CaseLabel.EdgeA2:
        return a == 2
    if label is CaseLabel.PrimeGenerator:
        return a > 2 and (p.a_is_prime or p.b_is_prime)
    if label is CaseLabel.CaseI:
        return A_SPLIT < a <= K_LOW * log_b
    if label is CaseLabel.CaseII:
        return a > A_SPLIT and K_MID * log_b <= a and below_sqrt and g > G_SHORT_MIN
    if label is CaseLabel.CaseIII:
        return a > A_SPLIT and K_LOW * log_b < a < K_MID * log_b
    if label is CaseLabel.CaseIV:
        return 4 <= a <= A_SPLIT and a <= K_SMALL_A * log_b and b > B_BIG
    if label is CaseLabel.CaseV:
        return 4 <= a <= A_SPLIT and K_SMALL_A * log_b < a and below_sqrt and b > B_BIG
    if label is CaseLabel.CaseVI:
        return 4 <= a <= A_VI_MAX and B_MID <= b <= B_BIG
    if label is CaseLabel.CaseVII:
        # a = 10^4 admitted: the 1/840 constant still applies at q = 10^4
        return A_VI_MAX < a <= A_SPLIT and B_BIG / (a - 1) + 1 < b <= B_BIG
    if label is CaseLabel.CaseVIII:
        return A_VI_MAX < a <= A_SPLIT and B_MID <= b <= B_VIII_MAX
    if label is CaseLabel.ResidualI:
        return a > A_SPLIT and g <= G_SHORT_MIN and a >= K_MID * log_b and _composite_pair(p)
    if label is CaseLabel.ResidualIII:
        return 2 < a <= A_SPLIT and b < B_MID and _composite_pair(p)
    raise ValueError(f"unknown label {label!r}")
