"""Acceptance gate: one PASS/FAIL line per criterion.

The Monte Carlo criteria run at N = 1000 and take a few minutes in total.
Run ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""
import json
import math
import os
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest

from degen import models
from degen.asymptotics import (
    alternating_binomial_identity,
    bonferroni_bounds,
    expected_isolated_asym,
    expected_isolated_sym,
    factorial_moment,
    factorial_moment_from_indicators,
    indicator_product_sums,
    predict_distinct,
)
from degen.bipartite import BipartiteMask, condition_4_1
from degen.montecarlo import SimulationConfig, oracle_equivalence_scan, run, threshold_scan
from degen.polynomial import Polynomial, discriminant, discriminant_from_roots
from degen.scalars import GaussianRational

RESULTS: list[str] = []

pytestmark = pytest.mark.slow


def record(number: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _cli(*args, threads=None) -> tuple[str, float]:
    env = dict(os.environ)
    if threads is not None:
        env["DEGEN_THREADS"] = str(threads)
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "degen", *args], env=env, capture_output=True, text=True, check=True
    )
    return proc.stdout, time.perf_counter() - t0


# Monte Carlo reproduction of the limits at N = 1000


def test_asym_distinct_limit():
    out, wall = _cli("simulate", "--model", "asym", "--n", "1000", "--c", "0", "--trials", "20000")
    rep = json.loads(out)
    target = 3 * math.exp(-2)
    gap = abs(rep["estimate"] - target)
    record(
        1,
        gap <= 0.02 and wall < 120,
        f"asym N=1000 c=0: estimate {rep['estimate']:.4f} vs {target:.5f} (gap {gap:.4f} <= 0.02), wall {wall:.1f}s < 120s",
    )


@pytest.mark.parametrize("q", [0.5, 0.0])
def test_sym_distinct_limit(q):
    rep = run(SimulationConfig(model="sym", n=1000, c=0.0, q=q, trials=20000, seed=2))
    target = predict_distinct(0.0, "sym", q).p_distinct
    gap = abs(rep.estimate - target)
    record(2, gap <= 0.02, f"sym N=1000 c=0 q={q}: estimate {rep.estimate:.4f} vs {target:.5f} (gap {gap:.4f} <= 0.02)")


def test_perfect_matching_limit():
    rep = run(SimulationConfig(model="asym", n=1000, c=0.0, trials=20000, seed=3, target="pm"))
    target = math.exp(-2)
    gap = abs(rep.estimate - target)
    record(3, gap <= 0.02, f"asym perfect matching: estimate {rep.estimate:.4f} vs {target:.5f} (gap {gap:.4f} <= 0.02)")


@pytest.mark.parametrize("model", ["asym", "sym"])
def test_isolated_poisson(model):
    cfg = SimulationConfig(model=model, n=1000, c=0.0, q=0.0 if model == "sym" else None, trials=20000, seed=4,
                           target="histogram")
    rep = run(cfg)
    record(4, rep.total_variation < 0.03, f"{model} isolated-point histogram: TV {rep.total_variation:.4f} < 0.03")


@pytest.mark.parametrize("model", ["asym", "sym"])
def test_gap_rate(model):
    cfg = SimulationConfig(model=model, n=1000, c=0.0, q=0.0 if model == "sym" else None, trials=10_000, seed=5,
                           target="gap_rate")
    rep = run(cfg)
    record(5, rep.estimate < 0.01, f"{model} gap rate: {rep.estimate:.4f} < 0.01")


# exact small-instance oracles


def test_oracle_equivalence():
    asym = oracle_equivalence_scan(3, 25, "asym", seed=6)
    sym = oracle_equivalence_scan(3, 25, "sym", seed=6)
    masks = [sum(e["masks"] for e in s["per_n"] if e["n"] == 3) for s in (asym, sym)]
    bad = len(asym["disagreements"]) + len(sym["disagreements"])
    record(
        6,
        asym["ok"] and sym["ok"] and bad == 0 and masks[0] == 512,
        f"oracle scan: {masks[0]} asym masks at n=3, sym n<=3, 25 samples each: {bad} disagreements",
    )


def test_thresholds():
    scans = [threshold_scan(n) for n in range(1, 5)]
    violations = sum(len(s["cond41_violations"]) + len(s["pm_violations"]) for s in scans)
    found = scans[2]["counterexample_found"]
    record(
        7,
        violations == 0 and bool(found) and all(s["ok"] for s in scans),
        f"threshold scans n<=4: {violations} violations; n=3 counterexample with n^2-2n+1 edges found: {found}",
    )


def test_discriminant_identity():
    rng = np.random.default_rng(8)
    exact_bad = 0
    for i in range(1000):
        n = int(rng.integers(1, 7))
        if i % 4 == 0:
            roots = [GaussianRational(F(int(a), int(d)), F(int(b), int(d)))
                     for a, b, d in zip(rng.integers(-4, 5, n), rng.integers(-4, 5, n), rng.integers(1, 5, n))]
        else:
            roots = [F(int(a), int(d)) for a, d in zip(rng.integers(-9, 10, n), rng.integers(1, 7, n))]
        exact_bad += discriminant(Polynomial.from_roots(roots)) != discriminant_from_roots(roots)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        p = Polynomial(tuple(rng.uniform(-1, 1, n)))
        ref = discriminant_from_roots(p.roots())
        worst = max(worst, abs(discriminant(p) - ref) / abs(ref))
    record(8, exact_bad == 0 and worst < 1e-8,
           f"discriminant identity: {exact_bad}/1000 exact mismatches; float worst relative error {worst:.2e} < 1e-8")


def _isolated_indicators(n, bits):
    rows = [not any(bits[j * n + l] for l in range(n)) for j in range(n)]
    cols = [not any(bits[j * n + l] for j in range(n)) for l in range(n)]
    return rows + cols


def test_moment_toolkit():
    failures = []
    # alternating binomial identity, exactly
    for n in range(41):
        for m in range(41):
            lhs, rhs = alternating_binomial_identity(n, m)
            if lhs != rhs:
                failures.append(("identity", n, m))
    # Bonferroni sandwich on random small distributions
    rng = np.random.default_rng(9)
    sandwiches = 0
    while sandwiches < 10_000:
        size = int(rng.integers(2, 9))
        w = rng.integers(0, 10, size=size)
        if w.sum() == 0:
            continue
        pmf = {x: F(int(v), int(w.sum())) for x, v in enumerate(w)}
        j = int(rng.integers(0, size))
        ell = int(rng.integers(0, 3))
        betas = [factorial_moment(pmf, k) for k in range(j + 2 * ell + 2)]
        lo, hi = bonferroni_bounds(betas, j, ell)
        if not lo <= pmf.get(j, 0) <= hi:
            failures.append(("bonferroni", pmf, j, ell))
        sandwiches += 1
    # indicator sums vs the count's pmf, up to 10 indicators
    for _ in range(200):
        m = int(rng.integers(1, 11))
        support = [tuple(int(x) for x in rng.integers(0, 2, size=m)) for _ in range(6)]
        w = [F(int(x) + 1) for x in rng.integers(0, 5, size=6)]
        outcomes = [(wi / sum(w), b) for wi, b in zip(w, support)]
        pmf = Counter()
        for pr, b in outcomes:
            pmf[sum(b)] += pr
        sums = indicator_product_sums(outcomes)
        if any(factorial_moment_from_indicators(sums, k) != factorial_moment(pmf, k) for k in range(m + 1)):
            failures.append(("indicators", m))
    # closed forms vs full enumeration of all 2^(n^2) masks
    p, q = F(2, 7), F(1, 4)
    for n in (1, 2, 3):
        pmf, outcomes = Counter(), []
        for bits in product((0, 1), repeat=n * n):
            k = sum(bits)
            pr = p**k * (1 - p) ** (n * n - k)
            ind = _isolated_indicators(n, bits)
            pmf[sum(ind)] += pr
            outcomes.append((pr, ind))
        sums = indicator_product_sums(outcomes)
        for k in range(2 * n + 1):
            f = expected_isolated_asym(n, p, k)
            if f != factorial_moment(pmf, k) or f != factorial_moment_from_indicators(sums, k):
                failures.append(("asym formula", n, k))
        pairs = [(j, l) for j in range(n) for l in range(j, n)]
        spmf = Counter()
        for bits in product((0, 1), repeat=len(pairs)):
            pr, touched = F(1), set()
            for (j, l), b in zip(pairs, bits):
                prob = q if j == l else p
                pr *= prob if b else 1 - prob
                if b:
                    touched |= {j, l}
            spmf[n - len(touched)] += pr
        for k in range(n + 1):
            if expected_isolated_sym(n, p, q, k) != factorial_moment(spmf, k):
                failures.append(("sym formula", n, k))
    record(9, not failures, f"moment toolkit: identity n,m<=40, 10^4 sandwiches, indicators, enumeration: "
                            f"{len(failures)} failures")


def test_zero_accumulation():
    rng = np.random.default_rng(10)
    degenerate = exceptions = bridge = 0
    worst = 0.0
    while degenerate < 1000:
        n = int(rng.integers(2, 7))
        symmetric = bool(rng.integers(0, 2))
        mask = rng.random((n, n)) < rng.uniform(0.1, 0.6)
        if symmetric:
            mask = np.triu(mask) | np.triu(mask).T
        G = BipartiteMask.from_array(mask, symmetric=symmetric)
        s = models.sample_values(G, "uniform01", rng)
        if models.eigenvalues_distinct(s):
            continue
        degenerate += 1
        bridge += condition_4_1(G)
        eigs = models.eigenvalues(s)
        scale = 1.0 + float(np.max(np.abs(eigs)))
        for cluster in models.repeated_eigenvalue_clusters(eigs):
            rel = float(np.max(np.abs(cluster))) / scale
            worst = max(worst, rel)
            exceptions += rel > models._ZERO_BAND
    record(
        10,
        exceptions == 0 and bridge == 0,
        f"zero accumulation: {degenerate} degenerate samples at n<=6, {exceptions} repeated eigenvalues off zero "
        f"(worst |eig|/(1+max|eig|) = {worst:.1e}), {bridge} with the graph criterion satisfied",
    )


def test_determinism_across_threads():
    args = ("simulate", "--model", "asym", "--n", "1000", "--c", "0", "--trials", "3000", "--seed", "11")
    outs = {t: _cli(*args, threads=t)[0] for t in (1, 2, 4)}
    hist = ("simulate", "--model", "sym", "--q", "0", "--n", "500", "--trials", "2000", "--seed", "11",
            "--target", "histogram")
    houts = {t: _cli(*hist, threads=t)[0] for t in (1, 3)}
    same = len(set(outs.values())) == 1 and len(set(houts.values())) == 1
    record(11, same, f"determinism: simulate JSON byte-identical across DEGEN_THREADS in {{1,2,4}} and {{1,3}}: {same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
