"""Range-scale drivers with sharding and checkpoint/resume.

A job is a rectangle of (a, b) pairs cut into contiguous a-strips (shards).
Each shard is certified independently and its summary appended to an
optional checkpoint file, so an interrupted run resumes at shard
granularity and the merged report does not depend on the shard count.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .casework import certify, classify
from .errors import CheckpointCorrupt, DegenerateG, NoCertificate
from .regions import A_SPLIT, G_SHORT_MIN, K_MID, CaseLabel
from .semigroup import make_pair
from .serialize import dumps
from .sieve import is_prime, odd_prime_table, pi_ab, prime_count

log = logging.getLogger(__name__)

OUTCOMES = ("prime_generator", "witness", "analytic", "failure")
_COUNTERS = (
    "pairs_total",
    "pairs_skipped_noncoprime",
    "pairs_outside_filter",
    "pairs_prime_generator",
    "pairs_witnessed",
    "pairs_analytic",
)


@dataclass
class RangeJob:
    a_lo: int
    a_hi: int
    b_lo: int
    b_hi: int
    region_filter: Optional[CaseLabel] = None
    shard_count: int = 1
    checkpoint_path: Optional[str] = None

    def __post_init__(self):
        # the theorem is about a > 2; (2, 3) has no prime at all
        self.a_lo = max(int(self.a_lo), 3)
        self.a_hi, self.b_lo, self.b_hi = int(self.a_hi), int(self.b_lo), int(self.b_hi)
        if self.shard_count < 1:
            raise ValueError("shard_count must be positive")
        if self.a_hi * self.b_hi >= 1 << 62:
            raise ValueError("rectangle exceeds the 64-bit product guard")

    def shards(self) -> list[tuple[int, int]]:
        """Contiguous a-strips [lo, hi]; empty strips are kept so indices are stable."""
        width = max(self.a_hi - self.a_lo + 1, 0)
        out = []
        for k in range(self.shard_count):
            lo = self.a_lo + width * k // self.shard_count
            hi = self.a_lo + width * (k + 1) // self.shard_count - 1
            out.append((lo, hi))
        return out

    def descriptor(self) -> dict:
        return {
            "a_lo": self.a_lo, "a_hi": self.a_hi, "b_lo": self.b_lo, "b_hi": self.b_hi,
            "region_filter": self.region_filter.value if self.region_filter else None,
            "shard_count": self.shard_count,
        }


@dataclass
class RangeReport:
    pairs_total: int = 0
    pairs_skipped_noncoprime: int = 0
    pairs_outside_filter: int = 0
    pairs_prime_generator: int = 0
    pairs_witnessed: int = 0
    pairs_analytic: int = 0
    failures: list = field(default_factory=list)
    max_search_depth: int = 0
    witness_y_all_one: bool = True
    wall_time: float = 0.0
    complete: bool = True

    def merge(self, other: "RangeReport") -> "RangeReport":
        for name in _COUNTERS:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.failures = sorted(self.failures + other.failures)
        self.max_search_depth = max(self.max_search_depth, other.max_search_depth)
        self.witness_y_all_one = self.witness_y_all_one and other.witness_y_all_one
        self.wall_time += other.wall_time
        self.complete = self.complete and other.complete
        return self

    def counters_consistent(self) -> bool:
        parts = sum(getattr(self, n) for n in _COUNTERS[1:]) + len(self.failures)
        return parts == self.pairs_total

    @property
    def ok(self) -> bool:
        return not self.failures

    def key(self) -> tuple:
        """Everything except timing, for determinism comparisons."""
        return (tuple(getattr(self, n) for n in _COUNTERS), tuple(map(tuple, self.failures)),
                self.max_search_depth, self.witness_y_all_one, self.complete)

    def to_dict(self, timing: bool = False) -> dict:
        d = {n: getattr(self, n) for n in _COUNTERS}
        d["failures"] = [{"a": a, "b": b, "reason": r} for a, b, r in self.failures]
        d["max_search_depth"] = self.max_search_depth
        d["witness_y_all_one"] = self.witness_y_all_one
        d["complete"] = self.complete
        if timing:
            d["wall_time"] = float(self.wall_time)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RangeReport":
        rep = cls(**{n: int(d[n]) for n in _COUNTERS})
        rep.failures = [[int(f["a"]), int(f["b"]), str(f["reason"])] for f in d["failures"]]
        rep.max_search_depth = int(d["max_search_depth"])
        rep.witness_y_all_one = bool(d["witness_y_all_one"])
        rep.complete = bool(d.get("complete", True))
        rep.wall_time = float(d.get("wall_time", 0.0))
        return rep


# ---------------------------------------------------------------------------
# scalar shard worker


def _run_shard(args) -> tuple[RangeReport, list[str]]:
    a_lo, a_hi, b_lo, b_hi, region_filter = args
    t0 = time.perf_counter()
    rep = RangeReport()
    lines: list[str] = []
    for a in range(a_lo, a_hi + 1):
        for b in range(max(b_lo, a + 1), b_hi + 1):
            rep.pairs_total += 1
            if math.gcd(a, b) != 1:
                rep.pairs_skipped_noncoprime += 1
                continue
            pair = make_pair(a, b)
            label = classify(pair)
            if region_filter is not None and label is not region_filter:
                rep.pairs_outside_filter += 1
                continue
            try:
                cert = certify(pair)
            except NoCertificate as exc:
                rep.failures.append([a, b, str(exc)])
                lines.append(f"{a},{b},{label.value},failure,,,")
                continue
            if label is CaseLabel.PrimeGenerator:
                rep.pairs_prime_generator += 1
                outcome = "prime_generator"
            elif cert.kind == "analytic":
                rep.pairs_analytic += 1
                outcome = "analytic"
            else:
                rep.pairs_witnessed += 1
                outcome = "witness"
                w = cert.witness
                if label is not CaseLabel.EdgeA2:
                    if w.y == 1:
                        rep.max_search_depth = max(rep.max_search_depth, w.x)
                    else:
                        rep.witness_y_all_one = False
            if cert.witness is not None:
                w = cert.witness
                lines.append(f"{a},{b},{label.value},{outcome},{w.n},{w.x},{w.y}")
            else:
                lines.append(f"{a},{b},{label.value},{outcome},,,")
    rep.wall_time = time.perf_counter() - t0
    return rep, lines


# ---------------------------------------------------------------------------
# checkpoint file


def _job_line(desc: dict) -> str:
    return "#job," + json.dumps(desc, sort_keys=True) + "\n"


def _shard_line(index: int, rep: RangeReport, recorded: bool) -> str:
    body = rep.to_dict(timing=True)
    body["pairs_recorded"] = recorded
    return f"#shard,{index}," + json.dumps(body, sort_keys=True) + "\n"


def read_checkpoint(path: str, desc: dict) -> tuple[dict[int, RangeReport], int]:
    """Completed shard reports and the byte length of the valid prefix.

    Lines after the last shard marker belong to a shard that never finished
    and are not part of the valid prefix.
    """
    done: dict[int, RangeReport] = {}
    pending = 0
    valid_len = 0
    pos = 0
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw:
        return done, 0
    for lineno, chunk in enumerate(raw.splitlines(keepends=True), 1):
        pos += len(chunk)
        if not chunk.endswith(b"\n"):
            break  # torn final write
        line = chunk.decode("utf-8", errors="strict").rstrip("\n")
        if lineno == 1:
            if not line.startswith("#job,"):
                raise CheckpointCorrupt(f"{path}: missing job header")
            try:
                stored = json.loads(line[5:])
            except json.JSONDecodeError as exc:
                raise CheckpointCorrupt(f"{path}: unreadable job header") from exc
            if stored != desc:
                raise CheckpointCorrupt(f"{path}: checkpoint belongs to a different job")
            valid_len = pos
            continue
        if line.startswith("#shard,"):
            try:
                _, idx, body = line.split(",", 2)
                payload = json.loads(body)
                rep = RangeReport.from_dict(payload)
                idx = int(idx)
            except (ValueError, KeyError, TypeError) as exc:
                raise CheckpointCorrupt(f"{path}:{lineno}: bad shard marker") from exc
            recorded = (rep.pairs_prime_generator + rep.pairs_witnessed + rep.pairs_analytic
                        + len(rep.failures))
            if payload.get("pairs_recorded", True) and pending != recorded:
                raise CheckpointCorrupt(
                    f"{path}:{lineno}: shard {idx} lists {pending} pairs, summary says {recorded}")
            if idx in done:
                raise CheckpointCorrupt(f"{path}:{lineno}: shard {idx} recorded twice")
            done[idx] = rep
            pending = 0
            valid_len = pos
            continue
        fields = line.split(",")
        if len(fields) != 7 or fields[3] not in OUTCOMES:
            raise CheckpointCorrupt(f"{path}:{lineno}: malformed record {line!r}")
        try:
            int(fields[0]), int(fields[1]), CaseLabel(fields[2])
        except ValueError as exc:
            raise CheckpointCorrupt(f"{path}:{lineno}: malformed record {line!r}") from exc
        pending += 1
    if valid_len == 0:
        raise CheckpointCorrupt(f"{path}: missing job header")
    return done, valid_len


class _CheckpointWriter:
    """Single writer; each shard is appended and fsynced in one piece."""

    def __init__(self, path: Optional[str], desc: dict, resume: bool):
        self.path = path
        self.done: dict[int, RangeReport] = {}
        self.fh = None
        if path is None:
            return
        if resume and os.path.exists(path) and os.path.getsize(path) > 0:
            self.done, valid_len = read_checkpoint(path, desc)
            with open(path, "r+b") as fh:
                fh.truncate(valid_len)
            self.fh = open(path, "a", encoding="utf-8")
        else:
            self.fh = open(path, "w", encoding="utf-8")
            self.fh.write(_job_line(desc))
            self._sync()

    def _sync(self):
        self.fh.flush()
        os.fsync(self.fh.fileno())

    def write(self, index: int, rep: RangeReport, lines: list[str], recorded: bool = True):
        if self.fh is None:
            return
        self.fh.write("".join(line + "\n" for line in lines))
        self.fh.write(_shard_line(index, rep, recorded))
        self._sync()

    def close(self):
        if self.fh is not None:
            self.fh.close()


# ---------------------------------------------------------------------------
# drivers


def _drive(desc: dict, tasks: list, worker, checkpoint_path, resume, workers, stop_after,
           recorded=True) -> RangeReport:
    t0 = time.perf_counter()
    writer = _CheckpointWriter(checkpoint_path, desc, resume)
    results: dict[int, RangeReport] = dict(writer.done)
    todo = [i for i in range(len(tasks)) if i not in results]
    if stop_after is not None:
        todo = todo[:stop_after]
    try:
        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for i, (rep, lines) in zip(todo, pool.map(worker, [tasks[i] for i in todo])):
                    writer.write(i, rep, lines, recorded)
                    results[i] = rep
                    log.info("shard %d/%d done", i + 1, len(tasks))
        else:
            for i in todo:
                rep, lines = worker(tasks[i])
                writer.write(i, rep, lines, recorded)
                results[i] = rep
                log.info("shard %d/%d done", i + 1, len(tasks))
    finally:
        writer.close()
    total = RangeReport()
    for i in sorted(results):
        total.merge(results[i])
    total.complete = len(results) == len(tasks)
    total.wall_time = time.perf_counter() - t0
    return total


def verify_range(job: RangeJob, resume: bool = False, workers: int = 1,
                 stop_after: Optional[int] = None) -> RangeReport:
    """Certify every coprime pair a_lo <= a <= a_hi, max(b_lo, a+1) <= b <= b_hi.

    ``stop_after`` processes at most that many outstanding shards and returns
    an incomplete report (used to simulate interruption).
    """
    tasks = [(lo, hi, job.b_lo, job.b_hi, job.region_filter) for lo, hi in job.shards()]
    return _drive(job.descriptor(), tasks, _run_shard, job.checkpoint_path, resume,
                  workers, stop_after)


def verify_residual_iii(a_cap: int, b_cap: int, shard_count: int = 1,
                        checkpoint_path: Optional[str] = None, resume: bool = False,
                        workers: int = 1) -> RangeReport:
    """Composite pairs a <= a_cap, b < b_cap, certified by witness search."""
    if a_cap > A_SPLIT or b_cap > 10**6:
        raise ValueError("region (iii) is a <= 10^4, b < 10^6")
    job = RangeJob(3, a_cap, 4, b_cap - 1, CaseLabel.ResidualIII, shard_count, checkpoint_path)
    return verify_range(job, resume=resume, workers=workers)


# ---------------------------------------------------------------------------
# region (i): a > 10^4, g <= 5*10^8, composite a and b

_TABLE: Optional[np.ndarray] = None
_TABLE_LIMIT = 0
_BLOCK = 64


def residual_i_a_range(g_max: int = G_SHORT_MIN) -> tuple[int, int]:
    """a-range of region (i): the smallest b = a + 1 must still give g <= g_max."""
    a_hi = A_SPLIT + 1
    while a_hi * (a_hi - 1) - 1 <= g_max:  # g(a, a+1) = a(a-1) - 1
        a_hi += 1
    return A_SPLIT + 1, a_hi - 1


def residual_i_b_max(a: int, g_max: int = G_SHORT_MIN) -> int:
    # (a-1)(b-1) - 1 <= g_max
    return (g_max + 1) // (a - 1) + 1


def _prime_table(limit: int) -> np.ndarray:
    global _TABLE, _TABLE_LIMIT
    if _TABLE is None or _TABLE_LIMIT < limit:
        _TABLE, _TABLE_LIMIT = odd_prime_table(limit), limit
    return _TABLE


def _is_prime_vec(n: np.ndarray, table: np.ndarray) -> np.ndarray:
    odd = (n & 1) == 1
    out = np.zeros(n.shape, dtype=bool)
    out[odd] = table[(n[odd] - 1) >> 1]
    out |= n == 2
    return out


def first_y1_witness(a: int, bs: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Smallest x >= 0 with b + a*x prime and <= g, per b; -1 if none.

    Requires every candidate <= g to be covered by ``table``.
    """
    gs = a * bs - a - bs
    xs = np.full(bs.size, -1, dtype=np.int64)
    active = np.arange(bs.size)
    offsets = np.arange(_BLOCK, dtype=np.int64)
    x0 = 0
    while active.size:
        cand = bs[active, None] + a * (x0 + offsets)[None, :]
        ok = cand <= gs[active, None]
        hit = _is_prime_vec(np.where(ok, cand, 0), table) & ok
        found = hit.any(axis=1)
        xs[active[found]] = x0 + hit[found].argmax(axis=1)
        exhausted = ~ok[:, -1]
        active = active[~found & ~exhausted]
        x0 += _BLOCK
    return xs


def _residual_i_shard(args) -> tuple[RangeReport, list[str]]:
    a_lo, a_hi, g_max = args
    t0 = time.perf_counter()
    table = _prime_table(g_max)
    rep = RangeReport()
    lines: list[str] = []
    for a in range(a_lo, a_hi + 1):
        bs = np.arange(a + 1, residual_i_b_max(a, g_max) + 1, dtype=np.int64)
        if bs.size == 0:
            continue
        rep.pairs_total += bs.size
        coprime = np.gcd(bs, a) == 1
        rep.pairs_skipped_noncoprime += int(bs.size - coprime.sum())
        bs = bs[coprime]
        if is_prime(a):
            rep.pairs_outside_filter += bs.size
            continue
        keep = ~_is_prime_vec(bs, table) & (a >= K_MID * np.log(bs))
        rep.pairs_outside_filter += int(bs.size - keep.sum())
        bs = bs[keep]
        xs = first_y1_witness(a, bs, table)
        good = xs >= 0
        rep.pairs_witnessed += int(good.sum())
        if good.any():
            rep.max_search_depth = max(rep.max_search_depth, int(xs[good].max()))
        for b in bs[~good].tolist():
            # no witness with y = 1; fall back to the full search
            rep.witness_y_all_one = False
            pair = make_pair(a, b)
            try:
                cert = certify(pair)
            except NoCertificate as exc:
                rep.failures.append([a, b, str(exc)])
                lines.append(f"{a},{b},{CaseLabel.ResidualI.value},failure,,,")
                continue
            rep.pairs_witnessed += 1
            w = cert.witness
            lines.append(f"{a},{b},{CaseLabel.ResidualI.value},witness,{w.n},{w.x},{w.y}")
    rep.wall_time = time.perf_counter() - t0
    return rep, lines


def verify_residual_i(shard_count: int = 16, checkpoint_path: Optional[str] = None,
                      resume: bool = False, workers: int = 1,
                      a_range: Optional[tuple[int, int]] = None,
                      g_max: int = G_SHORT_MIN, stop_after: Optional[int] = None) -> RangeReport:
    """Every composite coprime pair with a > 10^4, g <= 5*10^8, a >= 155 log b.

    Witnesses come from the first prime b + a*x (y = 1), found with a
    vectorised lookup in a prime table up to g_max. Pair lines are written to
    the checkpoint only for fallbacks and failures; the region holds ~10^8
    pairs.
    """
    lo, hi = a_range or residual_i_a_range(g_max)
    width = hi - lo + 1
    bounds = [(lo + width * k // shard_count, lo + width * (k + 1) // shard_count - 1)
              for k in range(shard_count)]
    tasks = [(s, e, g_max) for s, e in bounds]
    desc = {"region": "i", "a_lo": lo, "a_hi": hi, "g_max": g_max, "shard_count": shard_count}
    _prime_table(g_max)  # built once, inherited by forked workers
    return _drive(desc, tasks, _residual_i_shard, checkpoint_path, resume, workers,
                  stop_after, recorded=False)


# ---------------------------------------------------------------------------
# conjecture-2 statistic


def conjecture2_ratio(pair) -> float:
    """pi_{a,b} / pi(g); tends to 1/2 as a grows."""
    if pair.g < 2:
        raise DegenerateG(f"g = {pair.g} < 2 has no primes")
    return pi_ab(pair) / prime_count(pair.g)


def random_coprime_pairs(n: int, lo: int, hi: int, seed: int = 0) -> Iterator:
    """n random valid pairs with lo <= a < b <= hi (a > 2)."""
    rng = np.random.default_rng(seed)
    made = 0
    while made < n:
        a, b = sorted(int(v) for v in rng.integers(max(lo, 3), hi + 1, size=2))
        if a < b and math.gcd(a, b) == 1:
            made += 1
            yield make_pair(a, b)


def report_json(rep: RangeReport, timing: bool = False) -> str:
    return dumps(rep.to_dict(timing))


__all__ = [
    "RangeJob",
    "RangeReport",
    "conjecture2_ratio",
    "first_y1_witness",
    "read_checkpoint",
    "verify_range",
    "verify_residual_i",
    "verify_residual_iii",
]

