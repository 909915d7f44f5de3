"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest -v tests/test_acceptance.py``; the terminal summary lists
PASS/FAIL per criterion together with the measured numbers.
"""
import math
import time

import numpy as np
import pytest
from scipy import integrate

from oracles import bfs_closure, colored_partitions, subset_sum_enumeration
from semigrouplab.experiments import (
    TrialConfig,
    density_gamma,
    genus_scale,
    group_coverage_trial,
    halfspace_closure_count,
    pointwise_frequencies,
    restricted_support_trial,
    sweep,
    syndeticity_check,
)
from semigrouplab.geometry import (
    asymptotic_count,
    lattice_count_sandwich,
    region_volume,
    verify_hyperplane_cover,
)
from semigrouplab.lattice import Box
from semigrouplab.partitions import meinardus_exponent_fit, partition_bound_count, partition_budget, ptn_table
from semigrouplab.semigroup import closure_in_box, subset_sums_in_box


def _members(S):
    return set(S.grid.point_list())


def _random_instance(rng, max_cells=10**4, max_gens=15):
    d = int(rng.integers(1, 4))
    side = int(max(2, math.floor(max_cells ** (1 / d))))
    ext = tuple(int(rng.integers(2, side + 1)) for _ in range(d))
    n = int(rng.integers(0, max_gens + 1))
    A = [tuple(int(rng.integers(0, e)) for e in ext) for _ in range(n)]
    return A, ext


def _within_factor(observed, predicted, factor):
    r = observed / predicted
    return 1 / factor <= r <= factor, r


# exact and deterministic --------------------------------------------------


def test_01_closure_matches_bfs(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        A, ext = _random_instance(rng)
        got = _members(closure_in_box(np.array(A, dtype=np.int64).reshape(-1, len(ext)), Box(ext)))
        mismatches += got != bfs_closure(A, ext)
    elapsed = time.perf_counter() - t0
    report(f"{mismatches} mismatches in 200 instances, {elapsed:.1f}s")
    assert mismatches == 0 and elapsed < 60


def test_02_subset_sums_match_enumeration(report):
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    mismatches = not_contained = 0
    for _ in range(200):
        A, ext = _random_instance(rng)
        arr = np.array(A, dtype=np.int64).reshape(-1, len(ext))
        F = subset_sums_in_box(arr, Box(ext))
        S = closure_in_box(arr, Box(ext))
        mismatches += _members(F) != subset_sum_enumeration(A, ext)
        not_contained += bool(np.any(F.grid.bits & ~S.grid.bits))
    elapsed = time.perf_counter() - t0
    report(f"{mismatches} mismatches, {not_contained} containment failures, {elapsed:.1f}s")
    assert mismatches == 0 and not_contained == 0 and elapsed < 60


def test_03_partition_tables(report):
    t0 = time.perf_counter()
    assert ptn_table(1, 6).values == (1, 1, 2, 3, 5, 7, 11)
    assert ptn_table(2, 6).values == (1, 1, 3, 6, 13, 24, 48)
    for d in (1, 2):
        assert list(ptn_table(d, 6).values) == [colored_partitions(n, d) for n in range(7)]
    agree = all(ptn_table(d, 2000, "divisor").values == ptn_table(d, 2000, "euler").values for d in (1, 2, 3))
    elapsed = time.perf_counter() - t0
    report(f"prefixes match oracle, methods agree to n=2000 for d<=3: {agree}, {elapsed:.1f}s")
    assert agree and elapsed < 120


@pytest.mark.parametrize("d,target,tol", [(1, 0.5, 0.03), (2, 2 / 3, 0.05)], ids=["d1", "d2"])
def test_04_meinardus_exponent(report, d, target, tol):
    fit = meinardus_exponent_fit(ptn_table(d, 2000), 200, 2000)
    report(f"alpha={fit.alpha:.4f}, target {target:.4f} +/- {tol}, r2={fit.r2:.5f}")
    assert abs(fit.alpha - target) <= tol


def test_05_volume_formula(report):
    rng = np.random.default_rng(505)
    t0 = time.perf_counter()
    worst = 0.0
    checked = 0
    for d in (2, 3):
        for _ in range(12):
            L = float(rng.uniform(0.3, 3.0))
            Z = L**d * math.exp(float(rng.uniform(0.5, 6.0)))
            top = Z / L ** (d - 1) - L
            if d == 2:
                ref, _ = integrate.quad(lambda x: Z / (x + L) - L, 0, top, epsabs=0, epsrel=1e-11)
            else:
                ref, _ = integrate.dblquad(
                    lambda y, x: max(Z / ((x + L) * (y + L)) - L, 0.0),
                    0, top, 0, lambda x: max(Z / (L * (x + L)) - L, 0.0),
                    epsabs=0, epsrel=1e-10,
                )
            worst = max(worst, abs(region_volume(d, L, Z) - ref) / ref)
            checked += 1
    one_dim = all(region_volume(1, L, Z) == Z - L for L, Z in [(2.0, 10.0), (0.5, 7.25), (3.0, 3.5)])
    elapsed = time.perf_counter() - t0
    report(f"{checked} pairs, worst relative error {worst:.2e}, d=1 exact {one_dim}, {elapsed:.1f}s")
    assert worst <= 1e-6 and checked >= 20 and one_dim and elapsed < 60


def test_06_sandwich_bounds(report):
    rows = []
    ok = True
    for d in (1, 2):
        for p in (0.1, 0.05, 0.02):
            sw = lattice_count_sandwich(d, p, 1.0)
            ok &= sw.lower <= sw.exact <= sw.upper
            rows.append(f"d{d} p{p}: {sw.lower:.1f}<={sw.exact}<={sw.upper:.1f}")
    report("; ".join(rows))
    assert ok


def test_06_sandwich_ratio_monotone(report):
    ratios = [lattice_count_sandwich(2, p, 1.0).exact / asymptotic_count(2, p, 1.0) for p in (0.1, 0.05, 0.02)]
    dist = [abs(r - 1) for r in ratios]
    monotone = all(b < a for a, b in zip(dist, dist[1:]))
    report("exact/asymptotic at p=0.1,0.05,0.02: " + ", ".join(f"{r:.4f}" for r in ratios))
    assert monotone


def test_07_hyperplane_cover(report):
    t0 = time.perf_counter()
    results = [verify_hyperplane_cover(*args) for args in [(2, 0.1, 200.0), (2, 0.05, 1e3), (3, 0.2, 500.0)]]
    elapsed = time.perf_counter() - t0
    report(
        ", ".join(f"holds={r.holds} checked={r.checked} witness={r.witness}" for r in results)
        + f", {elapsed:.1f}s"
    )
    assert all(r.holds and r.witness is None for r in results) and elapsed < 60


def test_08_partition_bound_dominance(report):
    rng = np.random.default_rng(808)
    tables = {d: ptn_table(d, 800) for d in (1, 2, 3)}
    t0 = time.perf_counter()
    instances = violations = 0
    while instances < 60:
        d = int(rng.integers(1, 4))
        side = int(rng.integers(3, 9))
        n = int(rng.integers(1, 12))
        A0 = rng.integers(0, side, size=(n, d))
        A0 = np.unique(A0[np.any(A0 > 0, axis=1)], axis=0)
        if len(A0) == 0:
            continue
        lam = rng.uniform(0.5, 2.0, size=d)
        gamma = density_gamma(A0, lam) * float(rng.uniform(1.0, 1.5))
        Y = float(rng.uniform(1.0, 12.0))
        if partition_budget(gamma, Y, d) > 800:
            continue
        measured = halfspace_closure_count(A0, lam, Y)
        bound = partition_bound_count(gamma, Y, d, table=tables[d])
        violations += measured > bound
        instances += 1
    elapsed = time.perf_counter() - t0
    report(f"{violations} violations in {instances} instances, {elapsed:.1f}s")
    assert violations == 0 and elapsed < 120


# Monte Carlo --------------------------------------------------------------


@pytest.mark.slow
def test_09_genus_scaling_d1(report):
    t0 = time.perf_counter()
    table = sweep([(1, 0.05), (1, 0.02), (1, 0.01)], 50, 909, TrialConfig(1, 0.05, model="semigroup"))
    certified = [c.certified for c in table.cells]
    (fit,) = [f for f in table.fits if f.d == 1]
    elapsed = time.perf_counter() - t0
    report(
        f"certified {certified}, medians {[c.median_genus for c in table.cells]}, "
        f"slope {fit.slope:.3f}, {elapsed:.0f}s"
    )
    assert all(c == 50 for c in certified) and 0.8 <= fit.slope <= 1.2


@pytest.mark.slow
def test_09_genus_scaling_d2(report):
    t0 = time.perf_counter()
    table = sweep([(2, 0.1), (2, 0.05)], 30, 919, TrialConfig(2, 0.1, model="semigroup"))
    a, b = table.cells
    ok, r = _within_factor(b.median_genus / a.median_genus, genus_scale(2, 0.05) / genus_scale(2, 0.1), 2.5)
    elapsed = time.perf_counter() - t0
    report(
        f"certified {[a.certified, b.certified]}, medians {a.median_genus}, {b.median_genus}, "
        f"observed/predicted ratio {r:.3f}, {elapsed:.0f}s"
    )
    assert a.errors == b.errors == 0 and ok


@pytest.fixture(scope="module")
def shape_sweep():
    t0 = time.perf_counter()
    table = sweep([(2, 0.05)], 30, 1010, TrialConfig(2, 0.05, model="both", inner_c=0.05, outer_C=20.0))
    return table, time.perf_counter() - t0


@pytest.mark.slow
def test_10_inner_sparsity(report, shape_sweep):
    table, elapsed = shape_sweep
    cell = table.cells[0]
    report(f"mean inner_fraction {cell.mean_inner_fraction:.4f} (limit 0.05), sweep {elapsed:.0f}s")
    assert cell.errors == 0 and cell.mean_inner_fraction <= 0.05


@pytest.mark.slow
def test_10_outer_containment_semigroup(report, shape_sweep):
    cell = shape_sweep[0].cells[0]
    report(f"outer violations zero in {cell.outer_ok_rate:.2%} of trials (need 90%)")
    assert cell.outer_ok_rate >= 0.9


@pytest.mark.slow
def test_10_outer_containment_subset_sums(report, shape_sweep):
    cell = shape_sweep[0].cells[0]
    report(f"outer violations zero in {cell.outer_ok_rate_fs:.2%} of trials (need 80%)")
    assert cell.outer_ok_rate_fs >= 0.8


def test_11_group_coverage(report):
    t0 = time.perf_counter()
    full = sum(group_coverage_trial((8, 8), 40, seed).full for seed in range(500))
    elapsed = time.perf_counter() - t0
    report(f"full coverage in {full}/500 trials, {elapsed:.1f}s")
    assert full >= 495 and elapsed < 120


def _chain_instance(rng, R):
    A, s = [], 0
    for _ in range(int(rng.integers(1, 14))):
        step = int(rng.integers(1, s + R + 1 + int(rng.integers(0, 3))))
        a = max(step, (A[-1] + 1) if A else 1)
        A.append(a)
        s += a
    return A


def test_12_syndeticity_deterministic(report):
    rng = np.random.default_rng(1212)
    with_hyp = broken = 0
    for _ in range(400):
        R = int(rng.integers(1, 8))
        A = _chain_instance(rng, R)
        horizon = int(rng.integers(R, sum(A) + 2 * R + 1))
        res = syndeticity_check(A, R, horizon)
        if res.hypothesis_holds:
            with_hyp += 1
            broken += not res.conclusion_holds
    report(f"hypothesis held on {with_hyp}/400 instances, conclusion failed on {broken}")
    assert with_hyp > 50 and broken == 0


def test_12_syndeticity_random_support(report):
    t0 = time.perf_counter()
    results = [restricted_support_trial(0.1, seed) for seed in range(50)]
    ok = sum(r.conclusion_holds for r in results)
    implied = all(r.conclusion_holds for r in results if r.hypothesis_holds)
    elapsed = time.perf_counter() - t0
    report(f"conclusion held for {ok}/50 seeds, hypothesis implies conclusion: {implied}, {elapsed:.1f}s")
    assert ok >= 45 and implied and elapsed < 120


def test_13_pointwise_non_monotone(report):
    p = 0.3
    f4, f5 = pointwise_frequencies([(4,), (5,)], p, 200_000, 1313)
    gap = f4.frequency - f5.frequency
    se = math.hypot(f4.stderr, f5.stderr)
    exact4, exact5 = 1 - (1 - p) ** 3, 1 - (1 - p) ** 2 * (1 - p**2)
    close = abs(f4.frequency - exact4) <= 4 * f4.stderr and abs(f5.frequency - exact5) <= 4 * f5.stderr
    report(
        f"P4={f4.frequency:.4f} (exact {exact4:.4f}), P5={f5.frequency:.4f} (exact {exact5:.4f}), "
        f"gap {gap / se:.1f} standard errors"
    )
    assert gap > 3 * se and close


def test_14_embedding_dimension(report):
    t0 = time.perf_counter()
    table = sweep([(1, 0.05), (1, 0.02)], 30, 1414, TrialConfig(1, 0.05, model="semigroup"))
    a, b = table.cells
    pred = (math.log(1 / 0.02) / math.log(1 / 0.05)) ** 2
    ok, r = _within_factor(b.median_embedding / a.median_embedding, pred, 2.5)
    elapsed = time.perf_counter() - t0
    report(
        f"certified {[a.certified, b.certified]}, median embedding {a.median_embedding}, {b.median_embedding}, "
        f"observed/predicted {r:.3f}, inside rates {a.minimal_inside_rate}, {b.minimal_inside_rate}, {elapsed:.0f}s"
    )
    assert a.certified == b.certified == 30 and ok
    assert a.minimal_inside_rate >= 0.9 and b.minimal_inside_rate >= 0.9
