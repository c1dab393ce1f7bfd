import json
import math
import random
from dataclasses import replace

import numpy as np
import pytest

from fpc.analytic import case_margin
from fpc.casework import (
    Certificate,
    certify,
    classify,
    independent_is_prime,
    verify_certificate,
    witness_search,
)
from fpc.errors import NoCertificate
from fpc.regions import CaseLabel, in_region
from fpc.semigroup import Representation, count_representable_up_to, is_representable, make_pair
from fpc.sieve import pi_ab, primes_in_range, prime_count
from oracles import brute_pi_ab, plain_sieve, trial_division

FLAGS = plain_sieve(200_000)


def random_pairs(n, seed, b_max=1 << 40):
    """Coprime pairs with log-uniform b and a, inside the 64-bit product guard."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        b = int(np.exp(rng.uniform(math.log(4), math.log(b_max))))
        a_max = min(b - 1, ((1 << 62) - 1) // b)
        if a_max < 3:
            continue
        a = int(np.exp(rng.uniform(math.log(3), math.log(a_max + 1))))
        a = min(max(a, 3), a_max)
        if math.gcd(a, b) == 1:
            out.append(make_pair(a, b))
    return out


class TestClassify:
    @pytest.mark.parametrize("a,b,label", [
        (10007, 10009, CaseLabel.PrimeGenerator),
        (10001, 10003, CaseLabel.ResidualI),
        (799, 10**6 + 1, CaseLabel.CaseVI),
        (2, 9, CaseLabel.EdgeA2),
        (3, 10**6 + 1, CaseLabel.PrimeGenerator),
        (4, 9, CaseLabel.ResidualIII),
        (1000, 10**10 + 1, CaseLabel.CaseIV),
        (9998, 10**10 + 1, CaseLabel.CaseV),
        (810, 8 * 10**9 - 1, CaseLabel.CaseVII),
        (9998, 10**6 + 1, CaseLabel.CaseVIII),
        (10002, 60001, CaseLabel.CaseII),
    ])
    def test_examples(self, a, b, label):
        pair = make_pair(a, b)
        assert classify(pair) is label
        assert in_region(pair, label)

    def test_composites_in_examples(self):
        assert 799 == 17 * 47 and not trial_division(10**6 + 1)

    def test_totality_fuzz(self):
        # 10^6 pairs over the whole product-guarded domain
        seen = set()
        for pair in random_pairs(10**6, seed=2024):
            label = classify(pair)
            assert isinstance(label, CaseLabel)
            seen.add(label)
        assert {CaseLabel.CaseII, CaseLabel.CaseIV, CaseLabel.CaseV, CaseLabel.ResidualIII,
                CaseLabel.PrimeGenerator} <= seen

    def test_label_satisfies_its_region(self):
        for pair in random_pairs(20_000, seed=7):
            label = classify(pair)
            assert in_region(pair, label), (pair.a, pair.b, label)

    def test_unreachable_large_modulus_cases(self):
        # a > 10^4 and a < 155 log b force b > e^64.5, far past the product guard
        assert math.exp(10**4 / 155) * 10**4 > 2**62


class TestCertify:
    def test_3_5(self):
        cert = certify(make_pair(3, 5))
        assert cert.kind == "witness"
        assert (cert.witness.n, cert.witness.x, cert.witness.y) == (3, 1, 0)
        assert verify_certificate(cert)

    def test_2_3(self):
        with pytest.raises(NoCertificate):
            certify(make_pair(2, 3))

    def test_edge_a2(self):
        cert = certify(make_pair(2, 5))
        assert cert.witness.n == 2 and verify_certificate(cert)

    def test_case_vi_analytic(self):
        cert = certify(make_pair(799, 10**6 + 1))
        assert (cert.label, cert.kind) == (CaseLabel.CaseVI, "analytic")
        assert cert.margin_report.margin == pytest.approx(4245.18, abs=0.01)
        assert verify_certificate(cert)

    def test_witness_order(self):
        # y = 1 is tried first, then y = 0
        w = witness_search(make_pair(4, 9))
        assert (w.x, w.y, w.n) == (1, 1, 13)
        w = witness_search(make_pair(9, 10))
        assert w.y == 1 and w.n == 19

    def test_json_shape(self):
        d = json.loads(certify(make_pair(799, 10**6 + 1)).to_json())
        assert list(d) == ["a", "b", "g", "label", "kind", "margin_report", "schema_version"]
        assert list(d["margin_report"]) == ["main", "deductions", "margin", "slack"]
        d = json.loads(certify(make_pair(4, 9)).to_json())
        assert d["witness"] == {"p": 13, "x": 1, "y": 1} and d["schema_version"] == 1

    def test_json_round_trip(self):
        for a, b in [(4, 9), (799, 10**6 + 1), (9998, 10**10 + 1), (10001, 10003)]:
            cert = certify(make_pair(a, b))
            back = Certificate.from_dict(json.loads(cert.to_json()))
            assert back.to_json() == cert.to_json()
            assert verify_certificate(back)


class TestVerifyCertificate:
    def test_tampered_witness(self):
        cert = certify(make_pair(3, 5))
        cert.witness = Representation(3, 0, 9)
        assert not verify_certificate(cert)

    def test_witness_not_representable(self):
        cert = certify(make_pair(4, 9))
        cert.witness = Representation(1, 1, 11)
        assert not verify_certificate(cert)

    def test_witness_above_g(self):
        pair = make_pair(4, 9)
        cert = Certificate(pair, CaseLabel.ResidualIII, "witness", Representation(5, 1, 29))
        assert 29 > pair.g and not verify_certificate(cert)

    def test_analytic_outside_region(self):
        good = certify(make_pair(799, 10**6 + 1))
        moved = replace(good, pair=make_pair(799, 10**5 + 1))
        assert not verify_certificate(moved)
        relabelled = replace(good, label=CaseLabel.CaseVIII)
        assert not verify_certificate(relabelled)

    def test_analytic_inflated_margin(self):
        cert = certify(make_pair(799, 10**6 + 1))
        cert.margin_report.margin *= 1.01
        assert not verify_certificate(cert)

    def test_unknown_kind(self):
        cert = certify(make_pair(4, 9))
        cert.kind = "oracle"
        assert not verify_certificate(cert)

    def test_independent_primality(self):
        assert [independent_is_prime(n) for n in range(50_000)] == [bool(f) for f in FLAGS[:50_000]]
        assert independent_is_prime(10**9 + 7) and not independent_is_prime(3825123056546413051)


class TestProperties:
    def test_soundness_round_trip(self):
        rng = random.Random(99)
        done = 0
        while done < 10**5:
            b = rng.randrange(4, 10**6 + 1)
            a = rng.randrange(3, b)
            if math.gcd(a, b) != 1:
                continue
            cert = certify(make_pair(a, b))
            assert verify_certificate(cert), (a, b)
            done += 1

    def test_ground_truth_b_le_300(self):
        for b in range(4, 301):
            for a in range(3, b):
                if math.gcd(a, b) != 1:
                    continue
                pair = make_pair(a, b)
                cert = certify(pair)
                assert verify_certificate(cert)
                assert brute_pi_ab(a, b, FLAGS) > 0

    def test_analytic_honesty(self):
        # analytic certificates with b <= 10^7, confirmed by exact counting
        rng = random.Random(5)
        samples = []
        for a in (4, 9, 25, 91):
            b = 10**6 + rng.randrange(0, 1000)
            while math.gcd(a, b) != 1 or trial_division(b):
                b += 1
            samples.append((a, b))
        samples.append((10002, 60001))
        for a, b in samples:
            pair = make_pair(a, b)
            cert = certify(pair)
            assert cert.kind == "analytic", (a, b, cert.label)
            assert pi_ab(pair) > 0

    def test_short_interval_counting(self):
        rng = random.Random(17)
        checked = 0
        while checked < 60:
            b = rng.randrange(200, 3000)
            a = rng.randrange(3, b)
            if math.gcd(a, b) != 1 or (a - 1) * (b - 1) - 1 > 10**6:
                continue
            pair = make_pair(a, b)
            g = pair.g
            c = math.floor(g / math.log(g))
            lattice = count_representable_up_to(pair, c)
            # reflection: gaps in [g - c, g] match representables in [0, c]
            gaps = sum(1 for n in range(g - c, g + 1) if is_representable(pair, n) is None)
            assert gaps == lattice
            exact = sum(1 for p in primes_in_range(g - c + 1, g) if is_representable(pair, p))
            assert prime_count(g) - prime_count(g - c) - lattice <= exact
            closed = c * c / (2 * a * b) + c / a + c / b + 1
            assert closed >= lattice
            checked += 1

    def test_closed_form_dominates_real_c(self):
        for pair in random_pairs(2000, seed=3, b_max=10**7):
            if pair.g < 3:
                continue
            c = pair.g / math.log(pair.g)
            closed = c * c / (2 * pair.a * pair.b) + c / pair.a + c / pair.b + 1
            assert closed >= count_representable_up_to(pair, math.floor(c))


def test_margin_report_matches_dispatch():
    pair = make_pair(9998, 10**6 + 1)
    cert = certify(pair)
    assert cert.margin_report.margin == case_margin(pair, CaseLabel.CaseVIII).margin
