"""Exact in-box semigroups, subset sums and their gap invariants.

``closure_in_box`` computes ``<A> ∩ box`` (repeated summands allowed) and
``subset_sums_in_box`` computes ``FS(A) ∩ box`` (distinct summands).  Both are
exact inside the box: every summand of an in-box sum is coordinatewise
below the sum, so generators outside the box can be dropped.

A semigroup grid can carry a completeness certificate, a finite check
proving that every gap of the infinite-lattice semigroup lies in the box; the
in-box gap count is then the genus.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, prod
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .lattice import BitGrid, Box, LatticeError, check_cell_budget
from .validation import check_points

SEMIGROUP = "semigroup"
SUBSET_SUMS = "subset_sums"
DEFAULT_GAP_POINT_CAP = 10**6


@dataclass(frozen=True, eq=False)
class ClosureGrid:
    grid: BitGrid
    generators: np.ndarray
    kind: str = SEMIGROUP
    # indecomposable generators, known for kind=semigroup
    minimal: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def box(self) -> Box:
        return self.grid.box

    def __contains__(self, p) -> bool:
        return self.grid[p]


@dataclass
class Certificate:
    certified: bool
    thresholds: Optional[tuple[int, ...]]
    axis_frobenius: tuple[Optional[int], ...]
    reason: Optional[str] = None


@dataclass
class GapReport:
    kind: str
    gap_count: int
    certified: bool
    certificate_threshold: Optional[tuple[int, ...]] = None
    axis_frobenius: Optional[tuple[Optional[int], ...]] = None
    max_gap_norm: Optional[int] = None
    gaps: Optional[np.ndarray] = None
    gaps_truncated: bool = False
    reason: Optional[str] = None
    shell_contained: Optional[bool] = None


@dataclass
class GroupCoverage:
    moduli: tuple[int, ...]
    covered_count: int
    full: bool
    covered: np.ndarray = field(repr=False)


def _in_box_generators(A, box: Box) -> np.ndarray:
    pts = check_points(A, box.d)
    if len(pts) == 0:
        return pts
    pts = pts[box.contains_array(pts)]
    pts = pts[np.any(pts != 0, axis=1)]
    if len(pts) == 0:
        return pts
    ranks = np.unique(np.ravel_multi_index(tuple(pts.T), box.extents))
    return np.stack(np.unravel_index(ranks, box.extents), axis=1).astype(np.int64)


def _rows_of(pts: np.ndarray, box: Box) -> tuple[np.ndarray, np.ndarray]:
    if box.d == 1:
        return np.zeros(len(pts), dtype=np.int64), pts[:, 0].astype(np.int64)
    row = np.ravel_multi_index(tuple(pts[:, :-1].T), box.extents[:-1]).astype(np.int64)
    return row, pts[:, -1].astype(np.int64)


def _fresh_rows(box: Box) -> np.ndarray:
    check_cell_budget(box.size)
    R = box.size // box.extents[-1]
    return np.zeros((R, K.words_for(box.extents[-1])), dtype=np.uint64)


def closure_in_box(A, box: Box) -> ClosureGrid:
    """``<A> ∩ box`` as a dense grid, with the indecomposable generators."""
    gens = _in_box_generators(A, box)
    rows = _fresh_rows(box)
    pt_row, pt_last = _rows_of(gens, box)
    flags = K.semigroup_closure(rows, box.extents[-1], K.prefix_table(box.extents), pt_row, pt_last)
    bits = K.unpack_rows(rows, box.extents)
    return ClosureGrid(BitGrid(box, bits), check_points(A, box.d), SEMIGROUP, gens[flags])


def subset_sums_in_box(A, box: Box) -> ClosureGrid:
    """``FS(A) ∩ box``; ``A`` is treated as a set of distinct points."""
    els = _in_box_generators(A, box)
    rows = _fresh_rows(box)
    order = np.lexsort((np.arange(len(els)), els.sum(axis=1))) if len(els) else np.empty(0, np.int64)
    els = els[order]
    el_row, el_last = _rows_of(els, box)
    pre_ext = np.asarray(box.extents[:-1] or (1,), dtype=np.int64)
    K.subset_sums(
        rows,
        box.extents[-1],
        K.prefix_table(box.extents),
        pre_ext,
        K.prefix_strides(box.extents),
        el_row,
        el_last,
    )
    bits = K.unpack_rows(rows, box.extents)
    return ClosureGrid(BitGrid(box, bits), check_points(A, box.d), SUBSET_SUMS)


def _axis_line(bits: np.ndarray, axis: int) -> np.ndarray:
    idx = [0] * bits.ndim
    idx[axis] = slice(None)
    return bits[tuple(idx)]


def frobenius_1d(line: np.ndarray) -> Optional[int]:
    """Frobenius number of a 1-d semigroup given by its in-box indicator.

    Cofiniteness is declared once the line shows a run of consecutive
    members at least as long as its smallest nonzero member; returns ``None``
    when no such run fits in the line.  A semigroup with no gaps gets -1.
    """
    line = np.asarray(line, dtype=bool)
    members = np.flatnonzero(line[1:]) + 1
    if len(members) == 0:
        return None
    g = int(members[0])
    padded = np.concatenate(([False], line, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    long_runs = np.flatnonzero(ends - starts >= g)
    if len(long_runs) == 0:
        return None
    return int(starts[long_runs[0]]) - 1


def completeness_certificate(S: ClosureGrid, A=None) -> Certificate:
    """Decide whether every gap of the infinite semigroup lies in ``S.box``.

    For each axis ``i`` the 1-d semigroup on that axis has Frobenius number
    ``F_i``, so every step ``k > F_i`` along axis ``i`` is a member.  With
    ``T_i = E_i - 1 - max(F_i, 0)``, a point beyond the box reduces coordinate by coordinate to a box point with some ``x_i >= T_i``,
    so it suffices that all such box points are members.
    """
    if S.kind != SEMIGROUP:
        raise LatticeError("completeness certificate needs a semigroup grid")
    bits = S.grid.bits
    ext = S.box.extents
    frob = tuple(frobenius_1d(_axis_line(bits, i)) for i in range(bits.ndim))
    if any(f is None for f in frob):
        return Certificate(False, None, frob, "axis semigroup not cofinite in box")
    thresholds = tuple(e - 1 - max(f, 0) for e, f in zip(ext, frob))
    if any(t <= 0 for t in thresholds):
        return Certificate(False, thresholds, frob, "box too small")
    for i, t in enumerate(thresholds):
        sl = [slice(None)] * bits.ndim
        sl[i] = slice(t, None)
        if not bits[tuple(sl)].all():
            return Certificate(False, thresholds, frob, f"gap beyond threshold on axis {i}")
    return Certificate(True, thresholds, frob)


def shell_contained(S: ClosureGrid) -> bool:
    """Whether every cell on the box's outer faces is a member."""
    bits = S.grid.bits
    for i in range(bits.ndim):
        sl = [slice(None)] * bits.ndim
        sl[i] = -1
        if not bits[tuple(sl)].all():
            return False
    return True


def _max_gap_norm(bits: np.ndarray) -> Optional[int]:
    gaps = ~bits
    best = None
    for axis in range(bits.ndim):
        others = tuple(a for a in range(bits.ndim) if a != axis)
        along = gaps.any(axis=others) if others else gaps
        hit = np.flatnonzero(along)
        if len(hit):
            best = int(hit[-1]) if best is None else max(best, int(hit[-1]))
    return best


def gap_report(
    S: ClosureGrid, collect_points: bool = False, max_points: int = DEFAULT_GAP_POINT_CAP
) -> GapReport:
    bits = S.grid.bits
    gap_count = S.box.size - S.grid.popcount()
    gaps = None
    truncated = False
    if collect_points:
        gaps = np.argwhere(~bits)
        if len(gaps) > max_points:
            gaps = gaps[:max_points]
            truncated = True
    report = GapReport(
        kind=S.kind,
        gap_count=gap_count,
        certified=False,
        max_gap_norm=_max_gap_norm(bits),
        gaps=gaps,
        gaps_truncated=truncated,
    )
    if S.kind == SEMIGROUP:
        cert = completeness_certificate(S)
        report.certified = cert.certified
        report.certificate_threshold = cert.thresholds
        report.axis_frobenius = cert.axis_frobenius
        report.reason = cert.reason
    else:
        report.reason = "subset-sum reports are never certified"
        report.shell_contained = shell_contained(S)
    return report


def minimal_generators(S: ClosureGrid) -> np.ndarray:
    """Nonzero members of ``S ∩ box`` that are not a sum of two nonzero members."""
    if S.kind != SEMIGROUP:
        raise LatticeError("minimal generators are defined for semigroup grids")
    if S.minimal is not None:
        return S.minimal
    return closure_in_box(S.grid.points(), S.box).minimal


def residue_coverage(A, moduli: Sequence[int]) -> GroupCoverage:
    """Residues of ``FS(A)`` in ``Z/Y_1 x ... x Z/Y_m``, by toroidal shift-or."""
    moduli = tuple(int(y) for y in moduli)
    if not moduli or any(y < 1 for y in moduli):
        raise ValueError("moduli must be positive integers")
    q = prod(moduli)
    check_cell_budget(q, "residue group")
    pts = check_points(A, len(moduli), nonnegative=False)
    covered = np.zeros(moduli, dtype=bool)
    covered[(0,) * len(moduli)] = True
    axes = tuple(range(len(moduli)))
    for a in pts:
        r = tuple(int(c) % y for c, y in zip(a, moduli))
        covered |= np.roll(covered, r, axis=axes)
    count = int(np.count_nonzero(covered))
    return GroupCoverage(moduli, count, count == q, covered)


def dense_spot_box(moduli: Sequence[int], p: float) -> Box:
    Y = prod(int(y) for y in moduli)
    return Box(tuple(ceil(p * Y * int(y)) + 1 for y in moduli))


def dense_spot_check(A, moduli: Sequence[int], p: float) -> bool:
    """Whether ``|FS(A) ∩ [0, pY Y_1] x ... x [0, pY Y_m]| >= Y`` with ``Y = prod Y_i``."""
    Y = prod(int(y) for y in moduli)
    S = subset_sums_in_box(A, dense_spot_box(moduli, p))
    return S.grid.popcount() >= Y


def suggest_box(A, d: int) -> Box:
    """A cube of side ``2 m^2 + 2`` where ``m`` is the largest coordinate in ``A``.

    In one dimension the Frobenius number of a cofinite semigroup is below
    ``m^2``, so this leaves the certificate room to succeed.
    """
    pts = check_points(A, d)
    m = int(pts.max()) if len(pts) else 1
    side = 2 * max(m, 1) ** 2 + 2
    check_cell_budget(side**d, "suggested box")
    return Box((side,) * d)
