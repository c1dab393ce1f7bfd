"""Arithmetic of the two-generator numerical semigroup <a, b>."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .errors import NotCoprime, OutOfDomain, OutOfRange
from .sieve import is_prime, small_primes

# a*b must stay below this so every product in the package fits a signed int64
PRODUCT_LIMIT = 1 << 62


@lru_cache(maxsize=1)
def _trial_primes() -> tuple:
    return tuple(small_primes(1 << 16).tolist())


def euler_phi(n: int) -> int:
    """Euler's totient by trial division, stopping once the cofactor is prime."""
    if n < 1:
        raise ValueError("euler_phi needs n >= 1")
    result = n
    m = n
    done = is_prime(m)
    for d in _trial_primes():
        if done or d * d > m:
            break
        if m % d == 0:
            result -= result // d
            while m % d == 0:
                m //= d
            done = is_prime(m)
    else:
        d = (1 << 16) + 1
        while not done and d * d <= m:
            if m % d == 0:
                result -= result // d
                while m % d == 0:
                    m //= d
                done = is_prime(m)
            d += 2
    if m > 1:
        result -= result // m
    return result


@dataclass(frozen=True)
class Representation:
    x: int
    y: int
    n: int


@dataclass(frozen=True)
class GeneratorPair:
    """A validated coprime pair 2 <= a < b with cached derived quantities.

    Build with :func:`make_pair`; the constructor does no validation.
    """

    a: int
    b: int
    g: int
    phi_a: int
    a_is_prime: bool
    b_is_prime: bool
    b_inv: int = field(repr=False)  # b^-1 mod a

    @property
    def sqrt_g(self) -> float:
        return math.sqrt(self.g) if self.g > 0 else 0.0


def make_pair(a: int, b: int) -> GeneratorPair:
    a, b = int(a), int(b)
    if a < 2 or a >= b:
        raise OutOfDomain(f"need 2 <= a < b, got a={a}, b={b}")
    if math.gcd(a, b) != 1:
        raise NotCoprime(f"gcd({a}, {b}) = {math.gcd(a, b)}")
    if a * b >= PRODUCT_LIMIT:
        raise OutOfDomain(f"a*b = {a * b} is not below 2**62")
    return GeneratorPair(
        a=a,
        b=b,
        g=a * b - a - b,
        phi_a=euler_phi(a),
        a_is_prime=is_prime(a),
        b_is_prime=is_prime(b),
        b_inv=pow(b, -1, a),
    )


def is_representable(pair: GeneratorPair, n: int) -> Optional[Representation]:
    """The representation n = a*x + b*y with the smallest y, or None."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    y = (n % pair.a) * pair.b_inv % pair.a
    rest = n - pair.b * y
    if rest < 0:
        return None
    return Representation(rest // pair.a, y, n)


def count_representable_up_to(pair: GeneratorPair, c: int) -> int:
    """Number of representable integers in [0, c], for c <= g.

    Below g every representable integer has exactly one (x, y) with x < b,
    y < a, so the lattice-point count sum_y (floor((c - b*y)/a) + 1) is exact.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    if c > pair.g:
        raise OutOfRange(f"c = {c} exceeds g = {pair.g}")
    a, b = pair.a, pair.b
    return sum((c - b * y) // a + 1 for y in range(c // b + 1))


def non_representable_count(pair: GeneratorPair) -> int:
    """Number of gaps of <a, b>: (a-1)(b-1)/2."""
    return (pair.a - 1) * (pair.b - 1) // 2
