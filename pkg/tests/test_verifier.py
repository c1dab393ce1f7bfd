import json
import math

import numpy as np
import pytest

from fpc import verifier as V
from fpc.casework import certify, classify
from fpc.errors import CheckpointCorrupt, DegenerateG
from fpc.regions import CaseLabel
from fpc.semigroup import make_pair
from fpc.verifier import RangeJob, RangeReport, read_checkpoint, verify_range
from oracles import brute_pi_ab, plain_sieve

FLAGS = plain_sieve(20_000)
FLAGS_BIG = plain_sieve(10**7)


def coprime_count(a_lo, a_hi, b_hi):
    return sum(1 for a in range(a_lo, a_hi + 1) for b in range(a + 1, b_hi + 1)
               if math.gcd(a, b) == 1)


class TestRangeJob:
    def test_shards_partition(self):
        for n in (1, 3, 7, 16, 200):
            job = RangeJob(3, 150, 4, 300, shard_count=n)
            strips = job.shards()
            assert len(strips) == n
            covered = [a for lo, hi in strips for a in range(lo, hi + 1)]
            assert covered == list(range(3, 151))

    def test_a_lo_clamped(self):
        assert RangeJob(1, 10, 2, 20).a_lo == 3

    def test_product_guard(self):
        with pytest.raises(ValueError):
            RangeJob(3, 2**31, 4, 2**31 + 5)


class TestVerifyRange:
    def test_rectangle_100(self):
        rep = verify_range(RangeJob(3, 99, 4, 100))
        assert rep.ok and rep.complete and rep.counters_consistent()
        certified = rep.pairs_witnessed + rep.pairs_prime_generator + rep.pairs_analytic
        assert certified == coprime_count(3, 99, 100)
        for b in range(4, 101):
            for a in range(3, b):
                if math.gcd(a, b) == 1:
                    assert brute_pi_ab(a, b, FLAGS) > 0

    def test_filter(self):
        rep = verify_range(RangeJob(3, 60, 4, 120, region_filter=CaseLabel.ResidualIII))
        assert rep.pairs_prime_generator == 0 and rep.pairs_outside_filter > 0
        assert rep.counters_consistent() and rep.ok

    @pytest.mark.parametrize("n", [4, 16])
    def test_shard_independence(self, n):
        base = verify_range(RangeJob(3, 80, 4, 160, shard_count=1))
        other = verify_range(RangeJob(3, 80, 4, 160, shard_count=n))
        assert other.key() == base.key()

    def test_worker_pool(self):
        base = verify_range(RangeJob(3, 40, 4, 90, shard_count=4))
        pooled = verify_range(RangeJob(3, 40, 4, 90, shard_count=4), workers=2)
        assert pooled.key() == base.key()

    def test_failure_is_recorded_not_raised(self):
        # the only pair without a prime lives at a = 2, below the job floor
        rep = V._run_shard((2, 2, 3, 3, None))[0]
        assert len(rep.failures) == 1 and rep.failures[0][:2] == [2, 3]
        assert rep.counters_consistent() and not rep.ok

    def test_report_json(self):
        rep = verify_range(RangeJob(3, 20, 4, 40))
        d = json.loads(V.report_json(rep))
        assert "wall_time" not in d
        assert RangeReport.from_dict(d).key() == rep.key()
        assert "wall_time" in json.loads(V.report_json(rep, timing=True))


class TestCheckpoint:
    JOB = dict(a_lo=3, a_hi=60, b_lo=4, b_hi=140, shard_count=8)

    def job(self, path):
        return RangeJob(**self.JOB, checkpoint_path=str(path))

    def test_file_layout(self, tmp_path):
        path = tmp_path / "ck.txt"
        rep = verify_range(self.job(path))
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#job,")
        assert sum(line.startswith("#shard,") for line in lines) == 8
        records = [line for line in lines if not line.startswith("#")]
        assert len(records) == rep.pairs_total - rep.pairs_skipped_noncoprime
        a, b, label, outcome, p, x, y = records[0].split(",")
        assert outcome in V.OUTCOMES and CaseLabel(label)
        if p:
            assert int(a) * int(x) + int(b) * int(y) == int(p)

    def test_resume_round_trip(self, tmp_path):
        full = verify_range(RangeJob(**self.JOB))
        for stop in (0, 1, 3, 7):
            path = tmp_path / f"ck{stop}.txt"
            partial = verify_range(self.job(path), stop_after=stop)
            assert not partial.complete
            resumed = verify_range(self.job(path), resume=True)
            assert resumed.key() == full.key()
            done, _ = read_checkpoint(str(path), self.job(path).descriptor())
            assert sorted(done) == list(range(8))

    def test_resume_skips_completed(self, tmp_path, monkeypatch):
        path = tmp_path / "ck.txt"
        verify_range(self.job(path), stop_after=5)
        seen = []
        real = V._run_shard

        def spy(args):
            seen.append(args[0])
            return real(args)

        monkeypatch.setattr(V, "_run_shard", spy)
        verify_range(self.job(path), resume=True)
        strips = self.job(path).shards()
        assert seen == [strips[i][0] for i in (5, 6, 7)]

    def test_torn_tail(self, tmp_path):
        path = tmp_path / "ck.txt"
        full = verify_range(RangeJob(**self.JOB))
        verify_range(self.job(path), stop_after=2)
        with open(path, "a") as fh:
            fh.write("41,43,PrimeGenerator,prime_generator,41,1,0\n")  # shard never finished
            fh.write("41,44,Resid")  # torn write
        resumed = verify_range(self.job(path), resume=True)
        assert resumed.key() == full.key()
        assert "Resid" not in path.read_text().split("\n")[-1]

    def test_corrupt(self, tmp_path):
        path = tmp_path / "ck.txt"
        verify_range(self.job(path), stop_after=2)
        text = path.read_text().splitlines(keepends=True)
        text.insert(2, "not,a,record\n")
        path.write_text("".join(text))
        with pytest.raises(CheckpointCorrupt):
            verify_range(self.job(path), resume=True)

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "ck.txt"
        verify_range(self.job(path), stop_after=1)
        lines = path.read_text().splitlines(keepends=True)
        del lines[1]  # drop one pair record ahead of its shard marker
        path.write_text("".join(lines))
        with pytest.raises(CheckpointCorrupt):
            verify_range(self.job(path), resume=True)

    def test_other_job(self, tmp_path):
        path = tmp_path / "ck.txt"
        verify_range(self.job(path), stop_after=1)
        other = RangeJob(3, 61, 4, 140, shard_count=8, checkpoint_path=str(path))
        with pytest.raises(CheckpointCorrupt):
            verify_range(other, resume=True)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "ck.txt"
        path.write_text("3,4,PrimeGenerator,prime_generator,3,1,0\n")
        with pytest.raises(CheckpointCorrupt):
            verify_range(self.job(path), resume=True)

    def test_fresh_run_overwrites(self, tmp_path):
        path = tmp_path / "ck.txt"
        path.write_text("garbage\n")
        rep = verify_range(self.job(path))
        assert rep.complete and path.read_text().startswith("#job,")


class TestResidualI:
    def test_a_range(self):
        lo, hi = V.residual_i_a_range()
        assert lo == 10001
        assert hi * (hi - 1) - 1 <= 5 * 10**8 < (hi + 1) * hi - 1
        a = 12000
        bm = V.residual_i_b_max(a)
        assert (a - 1) * (bm - 1) - 1 <= 5 * 10**8 < (a - 1) * bm - 1

    def test_first_y1_witness(self):
        table = V._prime_table(10**7)
        a = 1004
        bs = np.arange(1005, 9000, dtype=np.int64)
        xs = V.first_y1_witness(a, bs, table)
        for b, x in zip(bs.tolist(), xs.tolist()):
            g = a * b - a - b
            want = next((k for k in range(0, g // a + 1) if b + a * k <= g and FLAGS_BIG[b + a * k]), -1)
            assert x == want

    def test_fast_path_matches_scalar(self):
        a_range = (10001, 10004)
        fast = V.verify_residual_i(shard_count=2, a_range=a_range)
        b_hi = V.residual_i_b_max(10001)
        slow = verify_range(RangeJob(10001, 10004, 10002, b_hi, CaseLabel.ResidualI))
        assert fast.ok and slow.ok
        assert fast.pairs_witnessed == slow.pairs_witnessed > 0
        assert fast.witness_y_all_one and slow.witness_y_all_one
        assert fast.max_search_depth == slow.max_search_depth

    def test_fast_witnesses_match_certify(self):
        table = V._prime_table(5 * 10**8)
        a = 10010
        bs = np.array([b for b in range(10011, 12000)
                       if math.gcd(a, b) == 1 and classify(make_pair(a, b)) is CaseLabel.ResidualI],
                      dtype=np.int64)
        xs = V.first_y1_witness(a, bs, table)
        for b, x in zip(bs.tolist()[::37], xs.tolist()[::37]):
            w = certify(make_pair(a, b)).witness
            assert (w.y, w.x) == (1, x)

    def test_checkpoint_resume(self, tmp_path):
        path = str(tmp_path / "ri.txt")
        full = V.verify_residual_i(shard_count=3, a_range=(10001, 10006))
        V.verify_residual_i(shard_count=3, a_range=(10001, 10006), checkpoint_path=path,
                            stop_after=1)
        resumed = V.verify_residual_i(shard_count=3, a_range=(10001, 10006),
                                      checkpoint_path=path, resume=True)
        assert resumed.key() == full.key()


class TestResidualIII:
    def test_a_cap_3(self):
        rep = V.verify_residual_iii(3, 1000)
        assert rep.pairs_witnessed == 0 and rep.pairs_analytic == 0 and rep.ok

    def test_small_slice(self):
        rep = V.verify_residual_iii(40, 2000, shard_count=4)
        assert rep.ok and rep.pairs_witnessed > 0 and rep.counters_consistent()

    def test_caps(self):
        with pytest.raises(ValueError):
            V.verify_residual_iii(10**4 + 1, 100)


class TestConjecture2:
    def test_examples(self):
        assert V.conjecture2_ratio(make_pair(3, 5)) == 0.5
        assert V.conjecture2_ratio(make_pair(4, 7)) == pytest.approx(2 / 7)

    def test_degenerate(self):
        with pytest.raises(DegenerateG):
            V.conjecture2_ratio(make_pair(2, 3))

    def test_random_pairs(self):
        pairs = list(V.random_coprime_pairs(30, 10, 50, seed=4))
        assert len(pairs) == 30
        assert all(10 <= p.a < p.b <= 50 and math.gcd(p.a, p.b) == 1 for p in pairs)
        again = list(V.random_coprime_pairs(30, 10, 50, seed=4))
        assert [(p.a, p.b) for p in pairs] == [(p.a, p.b) for p in again]

    def test_trend(self):
        def deviation(lo, hi):
            ratios = [V.conjecture2_ratio(p) for p in V.random_coprime_pairs(20, lo, hi, seed=1)]
            return float(np.mean([abs(r - 0.5) for r in ratios]))

        assert deviation(200, 600) < deviation(10, 50)
