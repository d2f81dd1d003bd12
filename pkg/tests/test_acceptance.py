"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary ends with
one PASS/FAIL line per criterion.
"""

import json
import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from sympy import primerange

from ivpkit.collapsing import CollapseSpec, collapse, energy_delta, supported_directions
from ivpkit.factorials import (
    ek_lseries_oracle,
    estimate_euler_kronecker,
    legendre_exponent,
    log_norm_factorial_table,
    v_E,
)
from ivpkit.ffield import digit_ordering, verify_sequence, verify_simultaneous
from ivpkit.optimality import (
    CriterionDisagreement,
    construct_universal_plus2,
    energy,
    energy_is_minimal,
    is_aue_all,
    is_n_optimal,
    is_n_universal,
    lagrange_witness,
    optimal_energy,
)
from ivpkit.oracle import brute_force_universal
from ivpkit.quadring import QuadRing, split_prime
from ivpkit.schinzel import is_schinzel_prefix, norm_growth_check, search_schinzel

Z = QuadRing.rational()
GAUSS = QuadRing(-1)
SQRT_M2 = QuadRing(-2)
EISEN = QuadRing(-3)

pytestmark = pytest.mark.slow


def random_set(rng, ring, size, bound):
    out = set()
    while len(out) < size:
        if ring.is_rational:
            out.add(ring(rng.randint(-bound, bound)))
        else:
            out.add(ring(rng.randint(-bound, bound), rng.randint(-bound, bound)))
    return sorted(out, key=lambda x: x.sort_key())


@pytest.mark.criterion(1, "Legendre agreement, p <= 30, n <= 300")
def test_legendre_agreement():
    start = time.monotonic()
    mismatches = []
    for p in primerange(2, 31):
        P = split_prime(Z, p)[0]
        for n in range(301):
            expected = sum(n // p**i for i in range(1, 10) if p**i <= n)
            got = v_E(list(range(n + 1)), P, n)
            if got != expected or legendre_exponent(n, p) != expected:
                mismatches.append((p, n, got, expected))
    elapsed = time.monotonic() - start
    assert not mismatches
    assert elapsed < 5, f"took {elapsed:.1f} s"


@pytest.mark.criterion(2, "three-criterion equivalence against the brute-force oracle")
def test_three_criterion_equivalence():
    start = time.monotonic()
    rng = random.Random(20240601)
    cases = [(Z, 500, 8, 50)] + [(ring, 200, 6, 8) for ring in (GAUSS, SQRT_M2, EISEN)]
    disagreements, positives = [], 0
    for ring, count, max_size, bound in cases:
        for _ in range(count):
            S = random_set(rng, ring, rng.randint(1, max_size), bound)
            n = len(S) - 1
            try:
                fac = is_n_universal(S, n).verdict
            except CriterionDisagreement as exc:
                disagreements.append(str(exc))
                continue
            verdicts = {fac, energy_is_minimal(S), is_aue_all(S).holds, brute_force_universal(S, n).verdict}
            if len(verdicts) != 1:
                disagreements.append((str(ring), [str(x) for x in S]))
            positives += fac
    elapsed = time.monotonic() - start
    print(f"\n{positives} optimal sets among {sum(c[1] for c in cases)}; {len(disagreements)} disagreements")
    assert not disagreements
    assert elapsed < 120, f"took {elapsed:.1f} s"


@pytest.mark.criterion(3, "consecutive integers and {0,1,i} are optimal")
def test_classical_examples():
    rng = random.Random(7)
    for n in range(21):
        for _ in range(20):
            x = rng.randint(-10**9, 10**9)
            assert is_n_optimal(list(range(x, x + n + 1))).verdict
    S = [GAUSS(0), GAUSS(1), GAUSS(0, 1)]
    assert is_n_optimal(S).verdict
    assert energy(S).factorization.norm == 4 == optimal_energy(GAUSS, 2).norm


@pytest.mark.criterion(4, "no n-element set is n-universal, with Lagrange witnesses")
def test_lower_bound():
    rng = random.Random(11)
    for trial in range(100):
        ring = (Z, GAUSS, EISEN, SQRT_M2)[trial % 4]
        n = rng.randint(1, 8)
        S = random_set(rng, ring, n, 20)
        verdict = is_n_universal(S, n)
        assert not verdict.verdict and verdict.witness.verify(S, n)
        target = next(x for x in random_set(rng, ring, n + 1, 20) if x not in S)
        f = lagrange_witness(S, target, Fraction(1, 2))
        assert f.degree <= n
        assert all(f.is_integral_at(x) for x in S) and not f.is_integral_at(target)
        assert f(target) == (Fraction(1, 2), 0)


@pytest.mark.criterion(5, "verified universal sets of size n+2")
def test_construction():
    for ring, top in ((Z, 10), (GAUSS, 5)):
        for n in range(top + 1):
            start = time.monotonic()
            res = construct_universal_plus2(ring, n, budget=60.0)
            elapsed = time.monotonic() - start
            assert res.verified and len(set(res.elements)) == n + 2, (str(ring), n)
            assert is_n_universal(list(res.elements), n).verdict
            assert brute_force_universal(list(res.elements), n).verdict
            assert elapsed < 60


@pytest.mark.criterion(6, "Stirling bound for log N(n!) over Q, 10 <= n <= 10^5")
def test_stirling():
    start = time.monotonic()
    table = log_norm_factorial_table(Z, 10**5)
    n = np.arange(10, 10**5 + 1, dtype=float)
    gap = np.abs(table[10:] - (n * np.log(n) - n))
    bad = np.nonzero(gap > 2 * np.log(n) + 2)[0]
    elapsed = time.monotonic() - start
    assert bad.size == 0, f"first violation at n = {int(n[bad[0]])}"
    assert math.isclose(table[20], math.lgamma(21), rel_tol=1e-12)
    assert elapsed < 30


@pytest.mark.criterion(7, "Euler-Kronecker estimate for Q(i) within 0.15")
def test_euler_kronecker():
    est = estimate_euler_kronecker(GAUSS, 2 * 10**4)
    oracle = ek_lseries_oracle(-1)
    print(f"\ngamma_diff_hat = {est.gamma_diff_hat:.6f}, oracle = {oracle:.6f}")
    assert abs(est.gamma_diff_hat - oracle) <= 0.15


@pytest.mark.criterion(8, "function-field digit ordering is a simultaneous ordering")
def test_function_field():
    start = time.monotonic()
    assert verify_simultaneous(2, 200, 3)
    assert verify_simultaneous(3, 200, 2)
    seq = [digit_ordering(2, n) for n in range(200)]
    seq[1], seq[2] = seq[2], seq[1]
    res = verify_sequence(2, seq, 3)
    assert not res and res.prime is not None and res.n is not None
    assert res.attained != res.minimum
    assert time.monotonic() - start < 60


@pytest.mark.criterion(9, "collapsing never raises the energy, strictly lowers it off collapsed sets")
def test_collapsing_monotone():
    rng = random.Random(99)
    violations = []
    for _ in range(200):
        S = random_set(rng, GAUSS, 8, 6)
        for name in supported_directions(GAUSS):
            spec = CollapseSpec(GAUSS, name)
            rep = energy_delta(S, spec)
            out = collapse(S, spec)
            if rep.after > rep.before:
                violations.append(("increase", name, S))
            if not rep.collapsed_before and rep.after >= rep.before:
                violations.append(("not strict", name, S))
            if set(collapse(out, spec)) != set(out):
                violations.append(("not idempotent", name, S))
    assert not violations, violations[:3]


@pytest.mark.criterion(10, "Schinzel prefixes in Z and Z[i]")
def test_schinzel():
    assert is_schinzel_prefix(Z, list(range(50)))
    res = search_schinzel(GAUSS, 100, budget=120.0)
    print(f"\nZ[i]: maximal prefix length {res.verified_length}, window {res.to_json()['window']}")
    assert res.exhausted_window
    assert is_schinzel_prefix(GAUSS, res.sequence)
    assert norm_growth_check(GAUSS, res.sequence)


CLI_RUNS = [
    ["factorial", "--ring", "Z", "--n", "12"],
    ["pordering", "--ring", "d=-1", "--set", "0,1,w,1+w,2", "--p", "2"],
    ["energy", "--ring", "d=-3", "--set", "0,1,w,-1"],
    ["check-aue", "--ring", "d=-2", "--set", "0,1,w,2"],
    ["check-universal", "--ring", "d=-5", "--set", "0,1,w,2", "--n", "2"],
    ["check-optimal", "--ring", "d=-1", "--set", "0,1,w"],
    ["check-newton", "--ring", "Z", "--set", "0,1,2,3,4"],
    ["search-optimal", "--ring", "d=-3", "--n", "3", "--radius", "2"],
    ["construct-universal", "--ring", "d=-1", "--n", "4", "--seed", "17"],
    ["collapse", "--ring", "d=-3", "--set", "0,2*w,3,-1+w", "--direction", "k1", "--format", "plot-points"],
    ["ff-order", "--q", "3", "--n", "26", "--table", "--format", "csv"],
    ["ff-verify", "--q", "2", "--length", "64", "--max-deg", "3"],
    ["schinzel-check", "--ring", "d=-1", "--set", "0,1,w,1+w"],
    ["schinzel-search", "--ring", "d=-2", "--max-len", "10"],
    ["ek-estimate", "--ring", "d=-1", "--n-max", "2000", "--terms", "100000"],
    ["residues", "--ring", "d=-7", "--ideal", "hnf(2,0,1)"],
    ["ideals", "--ring", "d=-1", "--norm", "25"],
]


@pytest.mark.criterion(11, "byte-identical CLI output across runs")
def test_cli_determinism():
    from ivpkit.cli import COMMANDS
    assert {argv[0] for argv in CLI_RUNS} == set(COMMANDS)
    for argv in CLI_RUNS:
        outputs = []
        for hashseed in ("1", "2"):
            env = {**os.environ, "PYTHONHASHSEED": hashseed}
            proc = subprocess.run([sys.executable, "-m", "ivpkit", *argv], capture_output=True,
                                  env=env, check=False)
            assert proc.returncode in (0, 3), (argv, proc.stderr)
            outputs.append(proc.stdout)
        assert outputs[0] == outputs[1], argv
        if "--format" not in argv:
            json.loads(outputs[0])
