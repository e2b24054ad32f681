"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
happen; they are also collected in an "acceptance" section at the end.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from negdep import fixtures
from negdep.core import (Distribution, SetFunction, coverage, expect,
                         is_submodular, marginals, multilinear, product, project)
from negdep.crs import ONE_MINUS_INV_E, verify_crs_theorem
from negdep.dependence import (check_na, check_ncd, check_nr, check_wnr, random_distribution,
                               random_wnr, reverify)
from negdep.dominance import check_dominance, dominance_gap
from negdep.optimize import (Matroid, basis_decomposition, brute_force_max,
                             fractional_from_decomposition, maximize_submodular,
                             swap_round_distribution)
from negdep.probing import GAP_BOUND, adaptive_optimum, nonadaptive_value
from negdep.probing import random_instance as probing_instance
from negdep.spi import random_instance as spi_instance
from negdep.spi import spi_competitive_ratio, verify_pos_decomposition
from oracles import best_tree_value

F = Fraction
pytestmark = pytest.mark.slow


def _certificate_verifies(D, verdict) -> bool:
    cert = verdict.certificate
    return (cert is not None and is_submodular(cert) and all(-1 <= v <= 1 for v in cert.values)
            and dominance_gap(D, cert) == verdict.gap < 0)


# -- 1 -----------------------------------------------------------------------

@pytest.mark.parametrize("name", ["ncd-counterexample-4", "ncd-homogeneous-8"])
def test_criterion_01_fixture_counterexamples(name, report):
    t0 = time.perf_counter()
    D = fixtures.get(name)
    f = fixtures.VIOLATORS[name]()
    E, Fx = expect(f, D), multilinear(f, marginals(D))
    ncd = check_ncd(D)
    dom = check_dominance(D)
    elapsed = time.perf_counter() - t0
    ok = (E == F(12, 8) and Fx == F(13, 8) and ncd.holds and not dom.holds
          and _certificate_verifies(D, dom) and elapsed < 1.0)
    report(1, ok, f"{name}: E={E} F(x)={Fx} ncd={ncd.holds} dominance={dom.holds} "
                  f"gap={dom.gap} via {dom.solver} ({elapsed:.2f}s)")
    assert ok


# -- 2 -----------------------------------------------------------------------

def test_criterion_02_table2(report):
    t0 = time.perf_counter()
    D = fixtures.table2_wnr()
    wnr, na, nr = check_wnr(D), check_na(D), check_nr(D)
    elapsed = time.perf_counter() - t0
    cov = reverify(D, na.witness) if na.witness else None
    ok = (wnr.holds and not na.holds and abs(float(cov) - 1e-4) <= 1e-3
          and not nr.holds and reverify(D, nr.witness) > 0 and elapsed < 5)
    report(2, ok, f"table2-wnr: wnr={wnr.holds} na={na.holds} (cov {cov}) nr={nr.holds} "
                  f"({elapsed:.2f}s)")
    assert ok


# -- 3 -----------------------------------------------------------------------

def test_criterion_03_dominance_not_wnr(report):
    t0 = time.perf_counter()
    D = fixtures.dominance_not_wnr()
    dom, wnr = check_dominance(D), check_wnr(D)
    elapsed = time.perf_counter() - t0
    # element 3 in 1-based labels is bit 2
    ok = dom.holds and not wnr.holds and wnr.witness.data["element"] == 2 and elapsed < 1
    report(3, ok, f"dominance-not-wnr: dominance={dom.holds} wnr={wnr.holds} "
                  f"at element {wnr.witness.data['element'] + 1} ({elapsed:.2f}s)")
    assert ok


# -- 4 -----------------------------------------------------------------------

def test_criterion_04_wnr_implies_dominance(report):
    t0 = time.perf_counter()
    violations = []
    for n in (2, 3, 4):
        for s in range(100):
            D = random_wnr(n, 1000 * n + s)
            if not check_dominance(D, exact=True).holds:
                violations.append((n, s))
    elapsed = time.perf_counter() - t0
    ok = not violations and elapsed < 300
    report(4, ok, f"300 WNR laws (n=2,3,4): {len(violations)} dominance violations ({elapsed:.1f}s)")
    assert ok


# -- 5 and 6 share one sample --------------------------------------------------

def _blend(n: int, seed: int) -> Distribution:
    # a WNR law with a little arbitrary mass mixed in lands on both sides of
    # every property, so the implications below are not vacuous
    rng = np.random.default_rng(seed)
    W = random_wnr(n, int(rng.integers(2**31)))
    R = random_distribution(n, int(rng.integers(2**31)))
    t = F(int(rng.integers(1, 16)), 100)
    return Distribution(n, (1 - t) * W.pmf + t * R.pmf)


@pytest.fixture(scope="module")
def sweep500():
    t0 = time.perf_counter()
    rows = []
    for k in range(500):
        n, kind = 2 + k % 4, ("uniform", "wnr", "blend", "blend")[(k // 4) % 4]
        seed = 50_000 + k
        if kind == "uniform":
            D = random_distribution(n, seed)
        elif kind == "wnr":
            D = random_wnr(n, seed)
        else:
            D = _blend(n, seed)
        rows.append({"n": n, "dom": check_dominance(D).holds, "ncd": check_ncd(D).holds,
                     "wnr": check_wnr(D).holds, "na": check_na(D).holds, "nr": check_nr(D).holds})
    return rows, time.perf_counter() - t0


def test_criterion_05_dominance_implies_ncd(sweep500, report):
    rows, elapsed = sweep500
    bad = [r for r in rows if r["dom"] and not r["ncd"]]
    dominant = sum(r["dom"] for r in rows)
    ok = not bad and elapsed < 600
    report(5, ok, f"500 laws (n<=5, {dominant} dominant): {len(bad)} dominant but not NCD "
                  f"({elapsed:.1f}s)")
    assert ok


def test_criterion_06_hierarchy_and_closure(sweep500, report):
    rows, _ = sweep500
    counts = {
        "NA=>WNR": sum(r["na"] and not r["wnr"] for r in rows),
        "NR=>WNR": sum(r["nr"] and not r["wnr"] for r in rows),
        "WNR=>NCD": sum(r["wnr"] and not r["ncd"] for r in rows),
    }
    closure_bad = 0
    rng = np.random.default_rng(6)
    for s in range(100):
        n = 2 + s % 3
        A = random_wnr(n, 60_000 + s)
        keep = int(rng.integers(1, 1 << n))
        if not check_wnr(project(A, keep)).holds:
            closure_bad += 1
        B = random_wnr(2, 70_000 + s)
        if not check_wnr(product(A, B)).holds:
            closure_bad += 1
    ok = not any(counts.values()) and closure_bad == 0
    wnr_count = sum(r["wnr"] for r in rows)
    report(6, ok, f"{counts} over 500 laws ({wnr_count} WNR); "
                  f"closure failures {closure_bad}/200")
    assert ok


# -- 7 -----------------------------------------------------------------------

def test_criterion_07_mixture_identity(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    exact_bad = float_bad = 0
    for _ in range(200):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        X = []
        for _ in range(n):
            w = rng.integers(1, 8, size=m + 1)
            X.append([F(int(v), int(w.sum())) for v in w[:m]])
        vals = [int(v) for v in rng.integers(-10, 11, size=1 << (n * m))]
        g = SetFunction(n * m, [F(v) for v in vals])
        lhs, rhs = verify_pos_decomposition(X, g)
        exact_bad += lhs != rhs
        lhs_f, rhs_f = verify_pos_decomposition(X, g.as_float())
        float_bad += abs(float(lhs_f) - float(rhs_f)) > 1e-12
    elapsed = time.perf_counter() - t0
    ok = exact_bad == 0 and float_bad == 0 and elapsed < 60
    report(7, ok, f"200 (x, g) with n,m<=3: exact mismatches {exact_bad}, "
                  f"float mismatches {float_bad} ({elapsed:.1f}s)")
    assert ok


# -- 8 -----------------------------------------------------------------------

def test_criterion_08_spi_end_to_end(report):
    t0 = time.perf_counter()
    worst_slack, inner_bad, below = math.inf, 0, 0
    for k in range(20):
        n, m = 2 + k % 3, 1 + k % 2
        inst = spi_instance(n, m, 80_000 + k, rank=1)
        rep = spi_competitive_ratio(inst, math.log(2), 200, "worst", eps=0.05)
        inner_bad += not rep.inner_ok
        below += rep.ratio_worst < rep.floor
        worst_slack = min(worst_slack, rep.ratio_worst - rep.floor)
    elapsed = time.perf_counter() - t0
    ok = inner_bad == 0 and below == 0 and elapsed < 900
    report(8, ok, f"20 instances: {below} below floor, {inner_bad} inner failures, "
                  f"min(ratio - floor) = {worst_slack:.4f} ({elapsed:.1f}s)")
    assert ok


# -- 9 -----------------------------------------------------------------------

def test_criterion_09_crs(report):
    t0 = time.perf_counter()
    stars, skipped = [], 0
    for rank, n, trials, seed in ((1, 3, 25, 91), (1, 4, 25, 92), (2, 3, 25, 93), (2, 4, 25, 94)):
        rep = verify_crs_theorem(Matroid.uniform(n, rank), trials, seed)
        stars += rep.c_stars
        skipped += rep.skipped
    elapsed = time.perf_counter() - t0
    lo = min(stars)
    ok = len(stars) == 100 and lo >= ONE_MINUS_INV_E - 1e-9 and elapsed < 600
    report(9, ok, f"100 WNR laws on rank 1/2: min c* = {float(lo):.4f} >= {ONE_MINUS_INV_E:.4f} "
                  f"({skipped} rescaled draws redrawn, {elapsed:.1f}s)")
    assert ok


# -- 10 ----------------------------------------------------------------------

def test_criterion_10_adaptivity_gap(report):
    t0 = time.perf_counter()
    worst, tree_bad, trees = 0.0, 0, 0
    for k in range(50):
        inst = probing_instance(1 + k % 4, 100_000 + k, ("uniform", "partition")[k % 2])
        adaptive = adaptive_optimum(inst)
        if inst.n <= 3:
            trees += 1
            tree_bad += adaptive != best_tree_value(inst)
        na = nonadaptive_value(inst, steps=100)
        ratio = 1.0 if adaptive == na == 0 else float(F(adaptive) / F(na))
        worst = max(worst, ratio)
    elapsed = time.perf_counter() - t0
    bound = GAP_BOUND + 0.03
    ok = worst <= bound and tree_bad == 0 and elapsed < 600
    report(10, ok, f"50 instances: max gap {worst:.4f} <= {bound:.4f}; decision-tree "
                   f"mismatches {tree_bad}/{trees} ({elapsed:.1f}s)")
    assert ok


# -- 11 ----------------------------------------------------------------------

def test_criterion_11_maximize_pipeline(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst, failures = math.inf, 0
    for _ in range(10):
        n = int(rng.integers(4, 6))
        universe = 2 * n
        f = coverage(n, [int(rng.integers(1, 1 << universe)) for _ in range(n)],
                     [int(v) for v in rng.integers(1, 6, size=universe)])
        M = Matroid.uniform(n, 2)
        _, opt = brute_force_max(f, M)
        vals = np.array([float(f(maximize_submodular(f, M, 100, seed=s))) for s in range(10_000)])
        low = vals.mean() - 1.96 * vals.std(ddof=1) / math.sqrt(len(vals))
        worst = min(worst, low / float(opt))
        failures += low < 0.60 * float(opt)
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 300
    report(11, ok, f"10 coverage instances x 10^4 seeds: worst lower 95% bound / OPT = "
                   f"{worst:.4f} >= 0.60 ({elapsed:.1f}s)")
    assert ok


# -- 12 ----------------------------------------------------------------------

def _base_points(n: int, k: int, rng, count: int):
    points = []
    while len(points) < count:
        w = rng.integers(1, 10, size=n)
        x = [F(k * int(v), int(w.sum())) for v in w]
        if max(x) <= 1:
            points.append(x)
    return points


def test_criterion_12_swap_rounding(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(12)
    cases = [(Matroid.uniform(3, 1), [F(1, 2), F(1, 3), F(1, 6)]),
             (Matroid.uniform(4, 2), [F(1, 2)] * 4),
             (Matroid.uniform(4, 2), [F(3, 4), F(1, 2), F(1, 2), F(1, 4)])]
    cases += [(Matroid.uniform(3, 1), x) for x in _base_points(3, 1, rng, 10)]
    cases += [(Matroid.uniform(4, 2), x) for x in _base_points(4, 2, rng, 10)]
    bad = []
    for M, x in cases:
        sol = fractional_from_decomposition(M.n, basis_decomposition(M, x))
        D = swap_round_distribution(M, sol)
        if list(marginals(D)) != x or not check_wnr(D).holds or not check_dominance(D).holds:
            bad.append(x)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 120
    report(12, ok, f"{len(cases)} rational points on uniform(3,1) and uniform(4,2): "
                   f"{len(bad)} failing WNR or dominance ({elapsed:.1f}s)")
    assert ok

