"""Prime generation and counting.

Odd-only segmented sieve of Eratosthenes on numpy boolean arrays, a
deterministic Miller-Rabin test for 64-bit inputs, and the counters built on
them: pi(x), pi(x; q, m), the first prime in an arithmetic progression and the
exact count of representable primes below the Frobenius number.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from .errors import NotCoprime, RangeTooLarge

SIEVE_CEILING = 10**12
DEFAULT_SEGMENT_ODDS = 1 << 22
AP_CANDIDATE_SWITCH = 10**5

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)

# (bound, bases): Miller-Rabin with these bases is exact for every n < bound.
_MR_TIERS = (
    (2_047, (2,)),
    (1_373_653, (2, 3)),
    (25_326_001, (2, 3, 5)),
    (3_215_031_751, (2, 3, 5, 7)),
    (2_152_302_898_747, (2, 3, 5, 7, 11)),
    (3_474_749_660_383, (2, 3, 5, 7, 11, 13)),
    (341_550_071_728_321, (2, 3, 5, 7, 11, 13, 17)),
    (1 << 64, (2, 325, 9375, 28178, 450775, 9780504, 1795265022)),
)


def segment_length() -> int:
    """Odd slots per sieve segment; FPC_SIEVE_SEGMENT overrides the default."""
    raw = os.environ.get("FPC_SIEVE_SEGMENT")
    if raw:
        n = int(float(raw))
        if n < 1024:
            raise ValueError("FPC_SIEVE_SEGMENT must be at least 1024")
        return n
    return DEFAULT_SEGMENT_ODDS


def _strong_probable_prime(n: int, d: int, s: int, base: int) -> bool:
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Deterministic primality for 0 <= n < 2**64."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < 53 * 53:
        return True
    if n >= 1 << 64:
        raise ValueError("is_prime is only deterministic below 2**64")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for bound, bases in _MR_TIERS:
        if n < bound:
            break
    for base in bases:
        base %= n
        if base == 0:
            continue
        if not _strong_probable_prime(n, d, s, base):
            return False
    return True


def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit with a plain (unsegmented) sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


@dataclass
class SieveSegment:
    """Odd numbers lo' <= n <= hi' where lo' is the first odd >= lo.

    ``bits[i]`` flags ``first + 2*i`` as composite (or 1). The prime 2 is not
    represented and is handled by :meth:`primes`.
    """

    lo: int
    hi: int
    bits: np.ndarray

    @property
    def first(self) -> int:
        return self.lo | 1

    def primes(self) -> np.ndarray:
        odd = self.first + 2 * np.flatnonzero(~self.bits).astype(np.int64)
        if self.lo <= 2 <= self.hi:
            return np.concatenate((np.array([2], dtype=np.int64), odd))
        return odd

    def count(self) -> int:
        return int(np.count_nonzero(~self.bits)) + (1 if self.lo <= 2 <= self.hi else 0)


def sieve_segment(lo: int, hi: int, base: np.ndarray) -> SieveSegment:
    """Sieve [lo, hi] using the odd base primes in ``base`` (must cover sqrt(hi))."""
    first = lo | 1
    n_odd = (hi - first) // 2 + 1 if hi >= first else 0
    bits = np.zeros(max(n_odd, 0), dtype=bool)
    if n_odd == 0:
        return SieveSegment(lo, hi, bits)
    if first == 1:
        bits[0] = True
    for p in base:
        p = int(p)
        if p == 2:
            continue
        pp = p * p
        if pp > hi:
            break
        start = max(pp, -(-first // p) * p)
        if start % 2 == 0:
            start += p
        if start > hi:
            continue
        bits[(start - first) // 2 :: p] = True
    return SieveSegment(lo, hi, bits)


def _check_range(lo: int, hi: int) -> None:
    if lo < 0 or hi < lo - 1:
        raise ValueError(f"invalid range [{lo}, {hi}]")
    if hi > SIEVE_CEILING:
        raise RangeTooLarge(f"{hi} exceeds the sieve ceiling {SIEVE_CEILING:.0e}")


def iter_segments(lo: int, hi: int, seg_odds: Optional[int] = None) -> Iterator[SieveSegment]:
    """Sieved segments covering [lo, hi] in increasing order."""
    _check_range(lo, hi)
    if hi < 2 or hi < lo:
        return
    seg_odds = seg_odds or segment_length()
    base = small_primes(math.isqrt(hi))
    span = 2 * seg_odds
    cur = lo
    while cur <= hi:
        top = min(hi, cur + span - 1)
        yield sieve_segment(cur, top, base)
        cur = top + 1


def prime_segments(lo: int, hi: int, seg_odds: Optional[int] = None) -> Iterator[np.ndarray]:
    """Numpy arrays of the primes in [lo, hi], one per segment."""
    for seg in iter_segments(lo, hi, seg_odds):
        yield seg.primes()


def primes_in_range(lo: int, hi: int) -> Iterator[int]:
    """Every prime p with lo <= p <= hi, ascending."""
    for arr in prime_segments(lo, hi):
        yield from arr.tolist()


def prime_count(x: int) -> int:
    """pi(x)."""
    x = int(math.floor(x))
    if x < 2:
        _check_range(0, max(x, 0))
        return 0
    return sum(seg.count() for seg in iter_segments(0, x))


def prime_count_many(xs: Iterable[float]) -> list[int]:
    """pi(x) for many x with a single sieve pass up to max(xs)."""
    xs = [int(math.floor(x)) for x in xs]
    if not xs:
        return []
    top = max(xs)
    if top < 2:
        return [0] * len(xs)
    primes = np.concatenate(list(prime_segments(0, top)))
    return np.searchsorted(primes, np.asarray(xs, dtype=np.int64), side="right").tolist()


def residue_counts(x: int, q: int) -> np.ndarray:
    """``out[m]`` = number of primes p <= x with p % q == m, for 0 <= m < q."""
    out = np.zeros(q, dtype=np.int64)
    for arr in prime_segments(0, int(x)):
        out += np.bincount(arr % q, minlength=q)
    return out


def prime_count_ap(x: int, q: int, m: int) -> int:
    """pi(x; q, m): primes p <= x with p = m (mod q)."""
    if q < 1:
        raise ValueError("modulus must be positive")
    if math.gcd(m, q) != 1:
        raise NotCoprime(f"gcd({m}, {q}) != 1")
    return int(residue_counts(x, q)[m % q])


def first_prime_in_ap(start: int, step: int, limit: int) -> Optional[int]:
    """Smallest prime p = start + k*step (k >= 0) with p <= limit, or None.

    Candidates are tested one by one with :func:`is_prime`; after
    ``AP_CANDIDATE_SWITCH`` misses the rest of the progression is scanned with
    the segmented sieve.
    """
    if step < 1 or start < 0:
        raise ValueError("need step >= 1 and start >= 0")
    if start > limit:
        return None
    d = math.gcd(start, step)
    if d > 1:
        # every term is a multiple of d, so only d itself can be prime
        if start <= d <= limit and (d - start) % step == 0 and is_prime(d):
            return d
        return None
    n = start
    for _ in range(AP_CANDIDATE_SWITCH):
        if n > limit:
            return None
        if is_prime(n):
            return n
        n += step
    if n > limit:
        return None
    residue = start % step
    for arr in prime_segments(n, limit):
        hits = arr[arr % step == residue]
        if hits.size:
            return int(hits[0])
    return None


def pi_ab(pair, ceiling: int = SIEVE_CEILING) -> int:
    """Number of primes p <= g representable as a*x + b*y with x, y >= 0."""
    g = pair.g
    if g < 2:
        return 0
    if g > ceiling:
        raise RangeTooLarge(f"g = {g} exceeds {ceiling:.0e}")
    a, b, binv = pair.a, pair.b, pair.b_inv
    total = 0
    for arr in prime_segments(0, g):
        total += int(np.count_nonzero(representable_mask(arr, a, b, binv)))
    return total


def representable_mask(n: np.ndarray, a: int, b: int, b_inv: int) -> np.ndarray:
    """Vectorised representability test: y0 = n * b^-1 mod a, need b*y0 <= n."""
    y0 = ((n % a) * b_inv) % a
    return b * y0 <= n


def odd_prime_table(limit: int) -> np.ndarray:
    """Boolean table T with T[i] true iff 2*i + 1 is prime, for 2*i + 1 <= limit."""
    n_odd = (limit + 1) // 2
    table = np.empty(n_odd, dtype=bool)
    pos = 0
    for seg in iter_segments(0, limit):
        table[pos : pos + seg.bits.size] = ~seg.bits
        pos += seg.bits.size
    return table


def _count_task(args) -> int:
    lo, hi, func = args
    if func is None:
        return sum(seg.count() for seg in iter_segments(lo, hi))
    return sum(int(func(arr)) for arr in prime_segments(lo, hi))


def segment_fold(
    lo: int,
    hi: int,
    func: Optional[Callable[[np.ndarray], int]] = None,
    workers: int = 1,
    chunks: Optional[int] = None,
) -> int:
    """Sum of ``func(primes)`` over the primes of [lo, hi] (count if func is None).

    Sub-ranges are independent; the result is the same for any ``workers``.
    ``func`` must be picklable when ``workers > 1``.
    """
    _check_range(lo, hi)
    chunks = chunks or max(1, workers * 4)
    width = max(1, (hi - lo + 1 + chunks - 1) // chunks)
    tasks = []
    cur = lo
    while cur <= hi:
        top = min(hi, cur + width - 1)
        tasks.append((cur, top, func))
        cur = top + 1
    if workers <= 1:
        return sum(map(_count_task, tasks))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(_count_task, tasks))
