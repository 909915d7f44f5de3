import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bfs_closure, indecomposables, residues_by_enumeration, subset_sum_enumeration
from semigrouplab.lattice import Box, LatticeError
from semigrouplab.semigroup import (
    closure_in_box,
    completeness_certificate,
    dense_spot_check,
    frobenius_1d,
    gap_report,
    minimal_generators,
    residue_coverage,
    subset_sums_in_box,
    suggest_box,
)


def members(S):
    return set(S.grid.point_list())


def random_instance(rng, max_cells=10**4, max_gens=15):
    d = int(rng.integers(1, 4))
    side = int(max(2, math.floor(max_cells ** (1 / d))))
    ext = tuple(int(rng.integers(2, side + 1)) for _ in range(d))
    n = int(rng.integers(0, max_gens + 1))
    A = [tuple(int(rng.integers(0, e)) for e in ext) for _ in range(n)]
    return A, ext


def test_empty_generators():
    S = closure_in_box([], Box((5, 5)))
    assert members(S) == {(0, 0)}
    assert members(subset_sums_in_box([], Box((5, 5)))) == {(0, 0)}


def test_three_five():
    S = closure_in_box([[3], [5]], Box((20,)))
    gaps = sorted(set(range(20)) - {x for (x,) in members(S)})
    assert gaps == [1, 2, 4, 7]
    assert len(gaps) == (3 - 1) * (5 - 1) // 2
    assert members(subset_sums_in_box([[3], [5]], Box((20,)))) == {(0,), (3,), (5,), (8,)}


def test_two_dim_example_against_enumeration():
    A = [(2, 0), (0, 3), (1, 1)]
    S = closure_in_box(A, Box((5, 5)))
    # multisets of generators with total coordinate sum <= 8
    found = {(0, 0)}
    for k in range(1, 9):
        for combo in itertools.combinations_with_replacement(A, k):
            s = tuple(map(sum, zip(*combo)))
            if max(s) < 5:
                found.add(s)
    assert members(S) == found


def test_generators_outside_box_and_zero_are_ignored():
    S = closure_in_box([(0, 0), (9, 9), (1, 2)], Box((4, 4)))
    assert members(S) == {(0, 0), (1, 2)}


def test_rejects_negative_or_ragged():
    with pytest.raises(ValueError):
        closure_in_box([(-1, 2)], Box((4, 4)))
    with pytest.raises(ValueError):
        closure_in_box([(1, 2), (3,)], Box((4, 4)))
    with pytest.raises(ValueError):
        closure_in_box([(1.5, 2)], Box((4, 4)))


def test_oracle_equivalence_random():
    rng = np.random.default_rng(11)
    for _ in range(120):
        A, ext = random_instance(rng)
        box = Box(ext)
        S = closure_in_box(A, box)
        F = subset_sums_in_box(A, box)
        assert members(S) == bfs_closure(A, ext)
        assert members(F) == subset_sum_enumeration(A, ext)
        assert F.grid.issubset(S.grid)


def test_fs_twelve_points_in_40_box():
    rng = np.random.default_rng(3)
    A = [tuple(int(c) for c in rng.integers(0, 40, 2)) for _ in range(12)]
    assert members(subset_sums_in_box(A, Box((40, 40)))) == subset_sum_enumeration(A, (40, 40))


def test_gap_report_three_five():
    rep = gap_report(closure_in_box([[3], [5]], Box((20,))), collect_points=True)
    assert rep.gap_count == 4 and rep.certified
    assert rep.gaps.ravel().tolist() == [1, 2, 4, 7]
    assert all(g < t for g in rep.gaps.ravel() for t in rep.certificate_threshold)


def test_unit_vectors_full_orthant():
    for d in (1, 2, 3):
        A = np.eye(d, dtype=int)
        S = closure_in_box(A, Box((5,) * d))
        rep = gap_report(S)
        assert rep.gap_count == 0 and rep.certified
        assert sorted(map(tuple, minimal_generators(S).tolist())) == sorted(map(tuple, A.tolist()))


def test_empty_generators_not_certified():
    rep = gap_report(closure_in_box([], Box((6, 6))))
    assert not rep.certified and rep.gap_count == 35


def test_certificate_two_three():
    S = closure_in_box([[2], [3]], Box((10,)))
    cert = completeness_certificate(S)
    assert cert.certified and cert.thresholds == (8,) and cert.axis_frobenius == (1,)
    assert gap_report(S).gap_count == 1


def test_certificate_missing_axis():
    S = closure_in_box([(1, 0), (1, 1)], Box((8, 8)))
    cert = completeness_certificate(S)
    assert not cert.certified and cert.reason == "axis semigroup not cofinite in box"


def test_certificate_even_generators_fail():
    cert = completeness_certificate(closure_in_box([[2], [4]], Box((50,))))
    assert not cert.certified


def test_certificate_box_too_small():
    cert = completeness_certificate(closure_in_box([[5], [7]], Box((25,))))
    assert not cert.certified


def test_frobenius_1d():
    line = np.zeros(30, bool)
    for x in range(30):
        line[x] = any(x == 3 * a + 5 * b for a in range(11) for b in range(7))
    assert frobenius_1d(line) == 7
    assert frobenius_1d(np.ones(5, bool)) == -1
    assert frobenius_1d(np.array([True, False, False])) is None


def test_subset_sum_reports_never_certified():
    rep = gap_report(subset_sums_in_box([[1], [2], [3]], Box((7,))))
    assert not rep.certified and rep.shell_contained is True and rep.gap_count == 0


def test_gap_point_cap():
    rep = gap_report(closure_in_box([], Box((10,))), collect_points=True, max_points=3)
    assert rep.gaps_truncated and len(rep.gaps) == 3 and rep.gap_count == 9


def test_minimal_generator_examples():
    assert minimal_generators(closure_in_box([[3], [5]], Box((40,)))).ravel().tolist() == [3, 5]
    assert minimal_generators(closure_in_box([[2], [3], [4]], Box((40,)))).ravel().tolist() == [2, 3]


def test_minimal_generators_generate_and_are_irredundant():
    rng = np.random.default_rng(5)
    for _ in range(25):
        A, ext = random_instance(rng, max_cells=400, max_gens=8)
        box = Box(ext)
        S = closure_in_box(A, box)
        mins = [tuple(m) for m in minimal_generators(S).tolist()]
        assert sorted(mins) == sorted(indecomposables(members(S), ext))
        assert closure_in_box(mins, box).grid == S.grid
        if len(mins) <= 12:
            for i in range(len(mins)):
                rest = mins[:i] + mins[i + 1:]
                assert closure_in_box(rest, box).grid != S.grid


def test_minimal_generators_fallback_path():
    S = closure_in_box([[3], [5]], Box((30,)))
    stripped = type(S)(S.grid, S.generators, S.kind, None)
    assert minimal_generators(stripped).ravel().tolist() == [3, 5]
    with pytest.raises(LatticeError):
        minimal_generators(subset_sums_in_box([[3]], Box((5,))))


def test_in_box_closure_property():
    rng = np.random.default_rng(8)
    for _ in range(20):
        A, ext = random_instance(rng, max_cells=300, max_gens=6)
        S = closure_in_box(A, Box(ext))
        mem = members(S)
        for x in mem:
            for y in mem:
                z = tuple(a + b for a, b in zip(x, y))
                if all(c < e for c, e in zip(z, ext)):
                    assert z in mem


def test_certified_genus_stable_under_doubling():
    rng = np.random.default_rng(2)
    checked = 0
    for _ in range(60):
        d = int(rng.integers(1, 3))
        A = [tuple(int(c) for c in rng.integers(0, 6, d)) for _ in range(6)]
        small = Box((24,) * d)
        rep = gap_report(closure_in_box(A, small))
        if rep.certified:
            big = gap_report(closure_in_box(A, Box((48,) * d)))
            assert big.certified and big.gap_count == rep.gap_count
            checked += 1
    assert checked >= 10


point_sets = st.integers(1, 2).flatmap(
    lambda d: st.tuples(
        st.just(d),
        st.lists(st.tuples(*[st.integers(0, 9)] * d), max_size=8),
        st.lists(st.tuples(*[st.integers(0, 9)] * d), max_size=4),
    )
)


@settings(max_examples=60, deadline=None)
@given(point_sets)
def test_monotone_in_generators(args):
    d, A, extra = args
    box = Box((12,) * d)
    small, large = closure_in_box(A, box), closure_in_box(A + extra, box)
    assert small.grid.issubset(large.grid)
    fs_small, fs_large = subset_sums_in_box(A, box), subset_sums_in_box(A + extra, box)
    assert fs_small.grid.issubset(fs_large.grid)
    assert fs_large.grid.issubset(large.grid)


def test_residue_coverage_examples():
    cov = residue_coverage([(1,)], (2,))
    assert cov.full and cov.covered_count == 2
    cov = residue_coverage([(2,)], (4,))
    assert not cov.full and set(np.flatnonzero(cov.covered)) == {0, 2}


def test_residue_coverage_against_enumeration():
    rng = np.random.default_rng(9)
    A = [tuple(int(c) for c in rng.integers(0, 100, 2)) for _ in range(30)]
    sub = A[:15]
    cov = residue_coverage(sub, (7, 9))
    assert set(map(tuple, np.argwhere(cov.covered).tolist())) == residues_by_enumeration(sub, (7, 9))
    full = residue_coverage(A, (7, 9))
    assert not np.any(cov.covered & ~full.covered)
    assert cov.covered_count <= 63


def test_residue_coverage_bad_moduli():
    with pytest.raises(ValueError):
        residue_coverage([(1,)], (0,))


def test_dense_spot_examples():
    assert not dense_spot_check([], (5,), 0.5)
    assert dense_spot_check([[k] for k in range(1, 13)], (12,), 0.9)
    assert subset_sums_in_box([[k] for k in range(1, 13)], Box((130,))).grid.popcount() == 79


def test_suggest_box():
    assert suggest_box([[3], [5]], 1).extents == (52,)
