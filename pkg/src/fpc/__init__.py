"""Certify that coprime a < b represent a prime p <= ab - a - b as a*x + b*y."""

from .analytic import (
    MarginReport,
    ap_count_margin,
    ap_error_bound,
    bennett_constants,
    log_integral,
    panaitopol_bounds,
    short_interval_margin,
    short_interval_margin_tail,
)
from .casework import Certificate, certify, classify, verify_certificate
from .errors import FPCError
from .regions import CaseLabel
from .semigroup import (
    GeneratorPair,
    Representation,
    count_representable_up_to,
    euler_phi,
    is_representable,
    make_pair,
    non_representable_count,
)
from .sieve import first_prime_in_ap, is_prime, pi_ab, prime_count, prime_count_ap, primes_in_range

__version__ = "0.1.0"
