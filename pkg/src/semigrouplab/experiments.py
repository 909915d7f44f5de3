"""Monte Carlo trials for random semigroups and their subset-sum cousins.

A trial samples a p-random set ``A`` in a box, builds ``<A>`` and/or
``FS(A)`` exactly inside the box, and measures them against two hyperboloid
regions: the inner one ``R_d(p, c Z*)`` where members should be rare and the
outer one ``R_d(p, C Z*)`` outside which everything should be a member.
Here ``Z* = p^-1 (log 1/p)^(d+1)``.
"""
from __future__ import annotations

import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .geometry import GeometryError, HyperboloidRegion, enumerate_region, hyperboloid_level, region_contains
from .lattice import Box, ResourceLimitError, check_cell_budget, max_cells, popcount_in
from .sampling import RandomSetSpec, derive_seed, parse_seed, sample, sample_restricted
from .semigroup import (
    SEMIGROUP,
    ClosureGrid,
    GroupCoverage,
    closure_in_box,
    completeness_certificate,
    gap_report,
    minimal_generators,
    residue_coverage,
    subset_sums_in_box,
)

MODELS = ("semigroup", "subset_sums", "both")
DEFAULT_INNER_C = 0.05
DEFAULT_OUTER_C = 20.0


class ExperimentError(ValueError):
    pass


def auto_extent(d: int, p: float, outer_C: float) -> int:
    """``ceil(2 C Z* / (log 1/p)^(d-1))``, twice the outer region's axis reach."""
    L = math.log(1.0 / p)
    return math.ceil(2.0 * outer_C * hyperboloid_level(d, p, 1.0) / L ** (d - 1))


def auto_box(d: int, p: float, outer_C: float = DEFAULT_OUTER_C) -> Box:
    ext = (auto_extent(d, p, outer_C),) * d
    cells = math.prod(ext)
    if cells > max_cells():
        raise ResourceLimitError(
            f"auto box needs extents {ext} ({cells} cells), above the cap of {max_cells()}"
        )
    return Box(ext)


@dataclass(frozen=True)
class TrialConfig:
    d: int
    p: float
    seed: int = 0
    box: Optional[tuple[int, ...]] = None  # None selects the auto box
    model: str = "both"
    inner_c: float = DEFAULT_INNER_C
    outer_C: float = DEFAULT_OUTER_C

    def __post_init__(self):
        if self.d < 1:
            raise ExperimentError("d must be >= 1")
        if not 0.0 < self.p < 1.0:
            raise ExperimentError("p out of range")
        if self.model not in MODELS:
            raise ExperimentError(f"model must be one of {MODELS}")
        if not 0.0 < self.inner_c <= self.outer_C:
            raise ExperimentError("need 0 < inner_c <= outer_C")
        object.__setattr__(self, "seed", parse_seed(self.seed))
        if self.box is not None:
            box = tuple(int(e) for e in self.box)
            if len(box) != self.d:
                raise ExperimentError("box dimension does not match d")
            object.__setattr__(self, "box", box)

    def resolve_box(self) -> Box:
        if self.box is None:
            return auto_box(self.d, self.p, self.outer_C)
        box = Box(self.box)
        check_cell_budget(box.size)
        return box

    @property
    def L(self) -> float:
        return math.log(1.0 / self.p)

    @property
    def z_star(self) -> float:
        return hyperboloid_level(self.d, self.p, 1.0)

    def inner_region(self) -> HyperboloidRegion:
        return HyperboloidRegion(self.d, self.L, self.inner_c * self.z_star)

    def outer_region(self) -> HyperboloidRegion:
        return HyperboloidRegion(self.d, self.L, self.outer_C * self.z_star)


@dataclass
class TrialResult:
    d: int
    p: float
    seed: int
    extents: Optional[tuple[int, ...]] = None
    model: str = "both"
    inner_c: float = DEFAULT_INNER_C
    outer_C: float = DEFAULT_OUTER_C
    n_generators: Optional[int] = None
    gap_count_semigroup: Optional[int] = None
    certified: Optional[bool] = None
    certificate_reason: Optional[str] = None
    gap_count_fs_in_box: Optional[int] = None
    fs_shell_contained: Optional[bool] = None
    inner_region_size: Optional[int] = None
    inner_overlap: Optional[int] = None
    inner_overlap_fs: Optional[int] = None
    outer_violations: Optional[int] = None
    outer_violations_fs: Optional[int] = None
    embedding_dimension: Optional[int] = None
    minimal_inside_region: Optional[bool] = None
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def inner_fraction(self) -> Optional[float]:
        if self.inner_overlap is None or not self.inner_region_size:
            return None
        return self.inner_overlap / self.inner_region_size

    def record(self, with_time: bool = False) -> dict[str, Any]:
        out = asdict(self)
        out["extents"] = list(self.extents) if self.extents else None
        if not with_time:
            out.pop("wall_time")
        return out


class ShapeReport(NamedTuple):
    inner_fraction: float
    outer_violation_count: int
    inner_overlap: int
    inner_region_size: int


def _check_covers(S: ClosureGrid, outer: HyperboloidRegion) -> None:
    reach = outer.axis_max()
    if reach >= min(S.box.extents):
        raise GeometryError(
            f"box {S.box.extents} does not cover the outer region (axis reach {reach})"
        )


def shape_report(S: ClosureGrid, config: TrialConfig, inner_pts: Optional[np.ndarray] = None) -> ShapeReport:
    """Inner density and outer violations of one grid.

    ``inner_fraction = |S ∩ R_inner| / |R_inner|`` and the violation count is
    the number of box points outside ``R_outer`` that are missing from ``S``.
    """
    outer = config.outer_region()
    _check_covers(S, outer)
    if inner_pts is None:
        inner_pts = enumerate_region(config.inner_region())
    bits = S.grid.bits
    overlap = int(bits[tuple(inner_pts.T)].sum()) if len(inner_pts) else 0
    size = len(inner_pts)
    frac = overlap / size if size else math.nan
    gaps = np.argwhere(~bits)
    violations = int(np.count_nonzero(~region_contains(outer, gaps))) if len(gaps) else 0
    return ShapeReport(frac, violations, overlap, size)


class EmbeddingReport(NamedTuple):
    count: int
    inside_region: bool


def embedding_dimension_report(S: ClosureGrid, config: TrialConfig) -> EmbeddingReport:
    if S.kind != SEMIGROUP or not completeness_certificate(S).certified:
        raise ExperimentError("embedding dimension requires certificate")
    mins = minimal_generators(S)
    inside = bool(np.all(region_contains(config.outer_region(), mins))) if len(mins) else True
    return EmbeddingReport(len(mins), inside)


def run_trial(config: TrialConfig) -> TrialResult:
    t0 = time.perf_counter()
    box = config.resolve_box()
    res = TrialResult(
        config.d, config.p, config.seed, box.extents, config.model, config.inner_c, config.outer_C
    )
    A = sample(RandomSetSpec(config.d, config.p, box, config.seed)).points
    res.n_generators = len(A)
    inner_pts = enumerate_region(config.inner_region())
    res.inner_region_size = len(inner_pts)
    if config.model in ("semigroup", "both"):
        S = closure_in_box(A, box)
        rep = gap_report(S)
        res.gap_count_semigroup = rep.gap_count
        res.certified = rep.certified
        res.certificate_reason = rep.reason
        shape = shape_report(S, config, inner_pts)
        res.inner_overlap = shape.inner_overlap
        res.outer_violations = shape.outer_violation_count
        if rep.certified:
            emb = embedding_dimension_report(S, config)
            res.embedding_dimension = emb.count
            res.minimal_inside_region = emb.inside_region
        del S
    if config.model in ("subset_sums", "both"):
        F = subset_sums_in_box(A, box)
        rep = gap_report(F)
        res.gap_count_fs_in_box = rep.gap_count
        res.fs_shell_contained = rep.shell_contained
        shape = shape_report(F, config, inner_pts)
        res.inner_overlap_fs = shape.inner_overlap
        res.outer_violations_fs = shape.outer_violation_count
    res.wall_time = time.perf_counter() - t0
    return res


def _safe_trial(config: TrialConfig) -> TrialResult:
    try:
        return run_trial(config)
    except (ValueError, RuntimeError, MemoryError) as exc:
        return TrialResult(
            config.d, config.p, config.seed, config.box, config.model,
            config.inner_c, config.outer_C, error=f"{type(exc).__name__}: {exc}",
        )


@dataclass
class CellSummary:
    d: int
    p: float
    trials: int
    errors: int
    certified: int
    median_genus: Optional[float]
    genus_q1: Optional[float]
    genus_q3: Optional[float]
    median_fs_gaps: Optional[float]
    median_embedding: Optional[float]
    mean_inner_fraction: Optional[float]
    outer_ok_rate: Optional[float]
    outer_ok_rate_fs: Optional[float]
    minimal_inside_rate: Optional[float]


@dataclass
class ScalingFit:
    d: int
    slope: float
    intercept: float
    cells: int


@dataclass
class SweepTable:
    seed_base: int
    grid: list[tuple[int, float]]
    template: TrialConfig
    rows: list[tuple[int, int, TrialResult]]
    cells: list[CellSummary] = field(default_factory=list)
    fits: list[ScalingFit] = field(default_factory=list)


def _quartiles(vals: list[float]) -> tuple[Optional[float], Optional[float], Optional[float]]:
    if not vals:
        return None, None, None
    arr = np.asarray(vals, dtype=float)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return float(med), float(q1), float(q3)


def _rate(flags: list[bool]) -> Optional[float]:
    return sum(flags) / len(flags) if flags else None


def summarize_cell(d: int, p: float, results: Sequence[TrialResult]) -> CellSummary:
    ok = [r for r in results if r.error is None]
    cert = [r for r in ok if r.certified]
    med, q1, q3 = _quartiles([r.gap_count_semigroup for r in cert])
    fs = [r.gap_count_fs_in_box for r in ok if r.gap_count_fs_in_box is not None]
    emb = [r.embedding_dimension for r in cert if r.embedding_dimension is not None]
    fr = [r.inner_fraction for r in ok if r.inner_fraction is not None]
    return CellSummary(
        d=d,
        p=p,
        trials=len(results),
        errors=len(results) - len(ok),
        certified=len(cert),
        median_genus=med,
        genus_q1=q1,
        genus_q3=q3,
        median_fs_gaps=float(statistics.median(fs)) if fs else None,
        median_embedding=float(statistics.median(emb)) if emb else None,
        mean_inner_fraction=float(np.mean(fr)) if fr else None,
        outer_ok_rate=_rate([r.outer_violations == 0 for r in ok if r.outer_violations is not None]),
        outer_ok_rate_fs=_rate(
            [r.outer_violations_fs == 0 for r in ok if r.outer_violations_fs is not None]
        ),
        minimal_inside_rate=_rate(
            [r.minimal_inside_region for r in cert if r.minimal_inside_region is not None]
        ),
    )


def genus_scale(d: int, p: float) -> float:
    """``p^-1 (log 1/p)^(2d)``."""
    return math.log(1.0 / p) ** (2 * d) / p


def fit_scaling(cells: Iterable[CellSummary]) -> list[ScalingFit]:
    """Per dimension, regress log(median genus) on log(p^-1 (log 1/p)^(2d))."""
    by_d: dict[int, list[CellSummary]] = {}
    for c in cells:
        if c.median_genus and c.median_genus > 0:
            by_d.setdefault(c.d, []).append(c)
    fits = []
    for d in sorted(by_d):
        cs = by_d[d]
        if len({c.p for c in cs}) < 2:
            continue
        x = np.log([genus_scale(d, c.p) for c in cs])
        y = np.log([c.median_genus for c in cs])
        slope, intercept = np.polyfit(x, y, 1)
        fits.append(ScalingFit(d, float(slope), float(intercept), len(cs)))
    return fits


def sweep(
    grid: Sequence[tuple[int, float]],
    trials_per_cell: int,
    seed_base: int | str,
    template: Optional[TrialConfig] = None,
    jobs: int = 1,
) -> SweepTable:
    """Run every (cell, trial) pair and aggregate.

    Trial ``t`` of cell ``i`` uses ``derive_seed(seed_base, i, t)``, so the
    table depends only on the arguments, never on ``jobs`` or scheduling.
    """
    if not grid:
        raise ExperimentError("sweep grid is empty")
    if trials_per_cell < 1:
        raise ExperimentError("trials_per_cell must be >= 1")
    base = parse_seed(seed_base)
    grid = [(int(d), float(p)) for d, p in grid]
    template = template or TrialConfig(grid[0][0], grid[0][1])
    keys, configs = [], []
    for ci, (d, p) in enumerate(grid):
        box = template.box if template.box is not None and len(template.box) == d else None
        for t in range(trials_per_cell):
            keys.append((ci, t))
            configs.append(replace(template, d=d, p=p, seed=derive_seed(base, ci, t), box=box))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_safe_trial, configs, chunksize=1))
    else:
        results = [_safe_trial(c) for c in configs]
    rows = sorted(((ci, t, r) for (ci, t), r in zip(keys, results)), key=lambda x: (x[0], x[1]))
    cells = [
        summarize_cell(d, p, [r for ci2, _, r in rows if ci2 == ci]) for ci, (d, p) in enumerate(grid)
    ]
    return SweepTable(base, grid, template, rows, cells, fit_scaling(cells))


# syndeticity ---------------------------------------------------------------


class SyndeticityResult(NamedTuple):
    hypothesis_holds: bool
    conclusion_holds: bool


def chain_hypothesis(A: Sequence[int], R: int, horizon: int) -> bool:
    """Whether ``a_1 <= R`` and ``a_i <= a_1 + ... + a_{i-1} + R`` hold long
    enough to certify every length-``R`` window inside ``[0, horizon)``.

    After the first ``i`` terms the subset sums hit every window inside
    ``[0, s_i + R - 1]``; the walk stops once that reaches ``horizon - 1``.
    """
    s = 0
    reach = R - 1
    for a in A:
        if reach >= horizon - 1:
            return True
        if a > s + R:
            return False
        s += a
        reach = s + R - 1
    return reach >= horizon - 1


def syndeticity_check(A: Sequence[int], R: int, horizon: int) -> SyndeticityResult:
    """Chain hypothesis and its conclusion: ``FS(A)`` meets every window
    ``[w, w + R - 1]`` with ``0 <= w <= horizon - R``."""
    R = int(R)
    horizon = int(horizon)
    if R < 1:
        raise ExperimentError("R must be positive")
    if horizon < R:
        raise ExperimentError("horizon must be >= R")
    arr = np.asarray(list(A), dtype=np.int64).reshape(-1)
    if len(arr) and (np.any(arr <= 0) or np.any(np.diff(arr) <= 0)):
        raise ExperimentError("A must be strictly increasing positive integers")
    hyp = chain_hypothesis(arr.tolist(), R, horizon)
    F = subset_sums_in_box(arr[arr < horizon].reshape(-1, 1), Box((horizon,)))
    hits = F.grid.bits.astype(np.int64)
    window = np.convolve(hits, np.ones(R, dtype=np.int64), mode="valid")
    return SyndeticityResult(hyp, bool(np.all(window > 0)))


def syndetic_scale(p: float) -> int:
    """``100 p^-1 ceil(log 1/p)``, rounded up to a multiple of 4."""
    raw = math.ceil(100.0 * math.ceil(math.log(1.0 / p)) / p - 1e-9)
    return 4 * math.ceil(raw / 4)


def restricted_support_trial(p: float, seed: int, R: Optional[int] = None, horizon_factor: int = 8) -> SyndeticityResult:
    """Sample ``A`` from ``[R/4, R/2] ∪ [2R, horizon)`` and run the check."""
    R = R or syndetic_scale(p)
    horizon = horizon_factor * R
    box = Box((horizon,))

    def allowed(pts):
        x = pts[:, 0]
        return ((x >= R // 4) & (x <= R // 2)) | (x >= 2 * R)

    A = sample_restricted(RandomSetSpec(1, p, box, seed), allowed).points[:, 0]
    return syndeticity_check(A, R, horizon)


# finite groups, pointwise frequencies, partition dominance --------------------


def group_coverage_trial(moduli: Sequence[int], n_elements: int, seed: int) -> GroupCoverage:
    """FS coverage for a uniformly random ``n_elements``-subset of ``Z/Y_1 x ... x Z/Y_m``."""
    moduli = tuple(int(y) for y in moduli)
    q = math.prod(moduli)
    if not 0 <= n_elements <= q:
        raise ExperimentError("subset size must be between 0 and the group order")
    rng = np.random.Generator(np.random.PCG64(parse_seed(seed)))
    flat = rng.choice(q, size=n_elements, replace=False)
    pts = np.stack(np.unravel_index(flat, moduli), axis=1)
    return residue_coverage(pts, moduli)


class Frequency(NamedTuple):
    point: tuple[int, ...]
    frequency: float
    stderr: float


def pointwise_frequencies(
    points: Sequence[Sequence[int]], p: float, trials: int, seed: int, batch: int = 50_000
) -> list[Frequency]:
    """Empirical ``P[x in <A>]`` for each query point ``x``.

    Membership of ``x`` only depends on ``A`` inside the box ``[0, x]``, so
    each trial samples the smallest box holding every query point and runs
    the closure recurrence on all trials at once.
    """
    pts = np.asarray(points, dtype=np.int64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if np.any(pts < 0):
        raise ExperimentError("query points must be nonnegative")
    box = Box(tuple(int(e) + 1 for e in pts.max(axis=0)))
    check_cell_budget(box.size * min(batch, trials), "pointwise batch")
    coords = box.coords()
    n = box.size
    # for each cell, the nonzero cells a <= x with x - a in the box
    preds = []
    for r in range(1, n):
        x = coords[r]
        le = np.all(coords[1:] <= x, axis=1)
        a_idx = np.flatnonzero(le) + 1
        diff = np.ravel_multi_index(tuple((x - coords[a_idx]).T), box.extents)
        preds.append((a_idx, diff))
    rng = np.random.Generator(np.random.PCG64(parse_seed(seed)))
    targets = np.ravel_multi_index(tuple(pts.T), box.extents)
    hits = np.zeros(len(pts), dtype=np.int64)
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        A = rng.random((m, n)) < p
        A[:, 0] = False
        member = np.zeros((m, n), dtype=bool)
        member[:, 0] = True
        for r in range(1, n):
            a_idx, diff = preds[r - 1]
            member[:, r] = np.any(A[:, a_idx] & member[:, diff], axis=1)
        hits += member[:, targets].sum(axis=0)
        done += m
    out = []
    for pt, h in zip(pts, hits):
        f = float(h / trials)
        out.append(Frequency(tuple(int(c) for c in pt), f, math.sqrt(f * (1 - f) / trials)))
    return out


def density_gamma(A0: np.ndarray, lam: Sequence[float]) -> float:
    """Smallest ``gamma`` with ``|{x in A0 : x.lam <= y}| <= gamma y^d`` for all ``y >= 0``."""
    A0 = np.asarray(A0, dtype=np.int64)
    if len(A0) == 0:
        return 0.0
    d = A0.shape[1]
    dots = np.sort(A0 @ np.asarray(lam, dtype=float))
    if dots[0] <= 0:
        raise ExperimentError("density hypothesis fails at y = 0")
    counts = np.searchsorted(dots, dots, side="right")
    return float(np.max(counts / dots**d))


def halfspace_closure_count(A0: np.ndarray, lam: Sequence[float], Y: float) -> int:
    """``|<A0> ∩ {x >= 0 : x.lam <= Y}|``, computed in the box the half-space fits in."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ExperimentError("lambda must be a positive vector")
    ext = tuple(int(math.floor(Y / l + 1e-9)) + 1 for l in lam)
    box = Box(ext)
    S = closure_in_box(A0, box)
    return popcount_in(S.grid, lambda pts: pts @ lam <= Y * (1 + 1e-12))
