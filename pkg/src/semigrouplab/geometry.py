"""Shifted hyperboloid regions, tetrahedra and dyadic covering nets.

The region ``R_d(L, Z)`` is the set of lattice points ``x >= 0`` with
``(x_1 + L) ... (x_d + L) <= Z``; in the random-semigroup setting ``L`` is
``log(1/p)``.  Membership multiplies the factors left to right in float64 and
accepts a product that exceeds ``Z`` by at most a relative ``1e-12``, so
boundary ties resolve toward inclusion deterministically.  Products that
overflow fall back to a log-space comparison with the same slack.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .lattice import LatticeError, ResourceLimitError

REL_SLACK = 1e-12
DEFAULT_REGION_CAP = 50_000_000
_EPS = 1e-12

HYPERPLANE_NET = "hyperplane_net"
BOX_NET = "box_net"


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class HyperboloidRegion:
    d: int
    L: float
    Z: float

    def __post_init__(self):
        if self.d < 1:
            raise GeometryError("dimension must be >= 1")
        if not (self.L > 0 and self.Z > 0):
            raise GeometryError("region needs L > 0 and Z > 0")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "Z", float(self.Z))

    @classmethod
    def from_p(cls, d: int, p: float, Z: float) -> "HyperboloidRegion":
        if not 0.0 < p < 1.0:
            raise GeometryError("p out of range")
        return cls(d, math.log(1.0 / p), Z)

    def contains(self, x) -> bool:
        return region_contains(self, x)

    def axis_max(self) -> int:
        """Largest coordinate any member can have (-1 for an empty region)."""
        if not self.contains((0,) * self.d):
            return -1
        return _last_fit(np.ones(1), self.L, self.Z, self.d - 1)[0]


def _accept(prod: np.ndarray, Z: float) -> np.ndarray:
    return prod <= Z * (1.0 + REL_SLACK)


def _region_mask(pts: np.ndarray, L: float, Z: float) -> np.ndarray:
    prod = np.ones(len(pts))
    with np.errstate(over="ignore"):
        for i in range(pts.shape[1]):
            prod = prod * (pts[:, i] + L)
    ok = _accept(prod, Z)
    big = ~np.isfinite(prod)
    if big.any():
        logs = np.log(pts[big] + L).sum(axis=1)
        ok[big] = logs <= math.log(Z) + REL_SLACK
    return ok


def region_contains(R: HyperboloidRegion, x) -> bool | np.ndarray:
    """Membership of one point, or of each row of an ``(n, d)`` array."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    pts = arr.reshape(-1, R.d)
    if np.any(pts < 0):
        raise GeometryError("region membership needs nonnegative points")
    mask = _region_mask(pts, R.L, R.Z)
    return bool(mask[0]) if single else mask


def _last_fit(prefix_prod: np.ndarray, L: float, Z: float, rest: int) -> np.ndarray:
    """Largest ``m`` with ``prefix * (m + L) * L**rest`` accepted, or -1.

    The float guess is corrected by one step each way against the
    acceptance test itself so enumeration and membership never disagree.
    """
    with np.errstate(over="ignore", divide="ignore"):
        guess = np.floor(Z / (prefix_prod * L**rest) - L)
    guess = np.clip(np.nan_to_num(guess, nan=-1.0, posinf=2**53, neginf=-1.0), -1, 2**53)
    m = guess.astype(np.int64)

    def ok(v):
        with np.errstate(over="ignore"):
            prod = prefix_prod * (v + L)
            for _ in range(rest):
                prod = prod * L
        return _accept(prod, Z) & (v >= 0)

    up = ok(m + 1)
    m = np.where(up, m + 1, m)
    down = (m >= 0) & ~ok(m)
    m = np.where(down, m - 1, m)
    return m


def _prefix_levels(R: HyperboloidRegion, cap: int):
    """Members of the projection onto the first ``d-1`` axes (zeros elsewhere).

    Yields the prefix coordinates, their running products, and the
    last-axis maximum for each prefix.
    """
    d, L, Z = R.d, R.L, R.Z
    coords = np.zeros((1, 0), dtype=np.int64)
    prod = np.ones(1)
    for level in range(d - 1):
        rest = d - level - 1
        mx = _last_fit(prod, L, Z, rest)
        keep = mx >= 0
        coords, prod, mx = coords[keep], prod[keep], mx[keep]
        counts = mx + 1
        total = int(counts.sum())
        if total > cap:
            raise ResourceLimitError("region too large")
        rep = np.repeat(np.arange(len(coords)), counts)
        starts = np.cumsum(counts) - counts
        vals = np.arange(total, dtype=np.int64) - np.repeat(starts, counts)
        coords = np.concatenate([coords[rep], vals[:, None]], axis=1)
        prod = prod[rep] * (vals + L)
    last = _last_fit(prod, L, Z, 0)
    keep = last >= 0
    return coords[keep], last[keep]


def count_region(R: HyperboloidRegion, cap: int = DEFAULT_REGION_CAP) -> int:
    """Exact ``|R|`` without listing the last axis."""
    _, last = _prefix_levels(R, cap)
    return int((last + 1).sum())


def enumerate_region(R: HyperboloidRegion, cap: int = DEFAULT_REGION_CAP) -> np.ndarray:
    """All members in row-major order as an ``(n, d)`` int64 array."""
    prefix, last = _prefix_levels(R, cap)
    counts = last + 1
    total = int(counts.sum())
    if total > cap:
        raise ResourceLimitError("region too large")
    rep = np.repeat(np.arange(len(prefix)), counts)
    starts = np.cumsum(counts) - counts
    vals = np.arange(total, dtype=np.int64) - np.repeat(starts, counts)
    return np.concatenate([prefix[rep], vals[:, None]], axis=1)


def _gamma_integral(t: float, d: int) -> float:
    # int_0^t e^y y^(d-1)/(d-1)! dy = sum_{j>=0} t^(d+j) / ((d-1)! j! (d+j)), all terms positive
    if t == 0.0:
        return 0.0
    log_t = math.log(t)
    total = 0.0
    j = 0
    while True:
        term = math.exp((d + j) * log_t - math.lgamma(d) - math.lgamma(j + 1)) / (d + j)
        total += term
        if j > t and term < total * 1e-17:
            return total
        j += 1


def region_volume(d: int, L: float, Z: float) -> float:
    """Volume of ``{x in R^d_{>=0} : prod (x_i + L) <= Z}``.

    Substituting ``x_i + L = e^{y_i}`` turns the region into a simplex slab
    of height ``t = log Z - d log L`` and gives
    ``L^d * int_0^t e^y y^(d-1)/(d-1)! dy``, which integrates by parts to
    ``Z * sum_{i<d} (-1)^i t^(d-1-i)/(d-1-i)! + (-1)^d L^d``.  The integral
    is summed as a positive power series, avoiding the cancellation the
    alternating form suffers near ``Z = L^d``.
    """
    if d < 1:
        raise GeometryError("dimension must be >= 1")
    if not (L > 0 and Z > 0):
        raise GeometryError("region needs L > 0 and Z > 0")
    t = math.log(Z) - d * math.log(L)
    if t < -1e-15:
        raise GeometryError("region degenerate")
    t = max(t, 0.0)
    if d == 1:
        return Z - L
    if t > 600:
        return region_volume_closed_form(d, L, Z)
    return L**d * _gamma_integral(t, d)


def region_volume_closed_form(d: int, L: float, Z: float) -> float:
    """The alternating-sum expression, kept for cross-checks."""
    t = math.log(Z) - d * math.log(L)
    if t < 0:
        raise GeometryError("region degenerate")
    s = math.fsum((-1) ** i * t ** (d - 1 - i) / math.factorial(d - 1 - i) for i in range(d))
    return Z * s + (-1) ** d * L**d


class Sandwich(NamedTuple):
    lower: float
    upper: float
    exact: int


def hyperboloid_level(d: int, p: float, C: float) -> float:
    """``C p^-1 (log 1/p)^(d+1)``."""
    L = math.log(1.0 / p)
    return C / p * L ** (d + 1)


def asymptotic_count(d: int, p: float, C: float) -> float:
    L = math.log(1.0 / p)
    return C / p * L ** (2 * d) / math.factorial(d - 1)


def lattice_count_sandwich(d: int, p: float, C: float, cap: int = DEFAULT_REGION_CAP) -> Sandwich:
    """Unit-cube bounds on ``|R_d(p, C p^-1 (log 1/p)^(d+1))|`` and the exact count."""
    if not 0.0 < p < 1.0:
        raise GeometryError("p out of range")
    L = math.log(1.0 / p)
    if L <= 1.0:
        raise GeometryError("upper bound needs log(1/p) > 1")
    Z = hyperboloid_level(d, p, C)
    lower = region_volume(d, L, Z)
    upper = region_volume(d, L - 1.0, Z)
    exact = count_region(HyperboloidRegion(d, L, Z), cap)
    return Sandwich(lower, upper, exact)


@dataclass(frozen=True)
class Tetrahedron:
    thresholds: tuple[float, ...]
    h: float = 1.0
    allow_zero_coords: bool = True

    def __post_init__(self):
        th = tuple(self.thresholds)
        if not th or any(not x > 0 for x in th):
            raise GeometryError("tetrahedron thresholds must be positive")
        object.__setattr__(self, "thresholds", th)

    @property
    def d(self) -> int:
        return len(self.thresholds)

    def volume(self) -> float:
        return math.prod(self.thresholds) * self.h**self.d / math.factorial(self.d)


def tetra_contains(T: Tetrahedron, y: Sequence[int]) -> bool:
    """Exact rational test of ``sum y_i / x_i <= h``."""
    if len(y) != T.d:
        raise GeometryError("point dimension does not match tetrahedron")
    low = 0 if T.allow_zero_coords else 1
    if any(c < low for c in y):
        return False
    s = sum(Fraction(int(c)) / Fraction(x) for c, x in zip(y, T.thresholds))
    return s <= Fraction(T.h)


@dataclass(frozen=True)
class DyadicNet:
    kind: str
    exponent_tuples: tuple[tuple[int, ...], ...]
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.exponent_tuples)

    def tetrahedra(self) -> list[Tetrahedron]:
        return [Tetrahedron(tuple(2.0**e for e in t)) for t in self.exponent_tuples]


def _tuples(d: int, lo: int, hi: int, sum_lo: Optional[int], sum_hi: Optional[int]):
    out: list[tuple[int, ...]] = []
    if lo > hi:
        return out

    def rec(prefix: list[int], s: int):
        k = len(prefix)
        if k == d:
            if (sum_lo is None or s >= sum_lo) and (sum_hi is None or s <= sum_hi):
                out.append(tuple(prefix))
            return
        rest = d - k - 1
        for e in range(lo, hi + 1):
            if sum_hi is not None and s + e + rest * lo > sum_hi:
                break
            if sum_lo is not None and s + e + rest * hi < sum_lo:
                continue
            prefix.append(e)
            rec(prefix, s + e)
            prefix.pop()

    rec([], 0)
    return out


def hyperplane_net(d: int, p: float, Z: float) -> DyadicNet:
    """Tuples with ``e_i >= log2 log(1/p)`` and ``sum e_i <= d + d log2 d + log2 Z``."""
    if not 0.0 < p < 1.0:
        raise GeometryError("p out of range")
    L = math.log(1.0 / p)
    lo = math.ceil(math.log2(L) - _EPS)
    top = math.floor(d + d * math.log2(d) + math.log2(Z) + _EPS)
    hi = top - (d - 1) * lo
    tuples = _tuples(d, lo, hi, None, top)
    return DyadicNet(HYPERPLANE_NET, tuple(tuples), {"d": d, "p": p, "Z": Z})


def box_net(m: int, p: float, Z: float, kappa: float) -> DyadicNet:
    """Tuples with ``log2(kappa log 1/p) - 1 <= e_i <= log2 Z`` and ``sum e_i >= log2 Z - m``."""
    if not 0.0 < p < 1.0:
        raise GeometryError("p out of range")
    L = math.log(1.0 / p)
    if kappa * L < 2:
        raise GeometryError("box net needs kappa * log(1/p) >= 2")
    lo = math.ceil(math.log2(kappa * L) - 1 - _EPS)
    hi = math.floor(math.log2(Z) + _EPS)
    sum_lo = math.ceil(math.log2(Z) - m - _EPS)
    tuples = _tuples(m, lo, hi, sum_lo, None)
    return DyadicNet(BOX_NET, tuple(tuples), {"m": m, "p": p, "Z": Z, "kappa": kappa})


class CoverResult(NamedTuple):
    holds: bool
    witness: Optional[tuple[int, ...]]
    checked: int


def _under_dyadic_plane(pts: np.ndarray, e: tuple[int, ...]) -> np.ndarray:
    # sum y_i / 2^e_i <= 1, in exact integer arithmetic
    M = max(e)
    if M < 0:
        return np.all(pts == 0, axis=1)
    ok = np.ones(len(pts), dtype=bool)
    total = np.zeros(len(pts), dtype=np.int64)
    for i, ei in enumerate(e):
        col = pts[:, i]
        if ei < 0:
            ok &= col == 0
            continue
        ok &= col <= (1 << ei)
        total += np.minimum(col, 1 << ei) << (M - ei)
    return ok & (total <= (1 << M))


def verify_hyperplane_cover(d: int, p: float, Z: float, cap: int = DEFAULT_REGION_CAP) -> CoverResult:
    """Check every member of ``R_d(p, Z)`` against the net's tetrahedra."""
    pts = enumerate_region(HyperboloidRegion.from_p(d, p, Z), cap)
    net = hyperplane_net(d, p, Z)
    if net.exponent_tuples and max(max(t) for t in net.exponent_tuples) > 60:
        raise GeometryError("net exponents too large for exact integer checks")
    left = np.arange(len(pts))
    for e in net.exponent_tuples:
        if not len(left):
            break
        left = left[~_under_dyadic_plane(pts[left], e)]
    if len(left):
        return CoverResult(False, tuple(int(c) for c in pts[left[0]]), len(pts))
    return CoverResult(True, None, len(pts))


def verify_box_cover(
    m: int, p: float, Z: float, kappa: float, probe: int, cap: int = DEFAULT_REGION_CAP
) -> CoverResult:
    """Scan ``[0, probe)^m`` for points with ``prod x_i >= Z`` and every
    ``x_i >= kappa log(1/p)`` that lie in no orthant corner of the net."""
    if probe**m > cap or probe**m >= 2**53:
        raise ResourceLimitError("probe box too large")
    L = math.log(1.0 / p)
    net = box_net(m, p, Z, kappa)
    grids = np.indices((probe,) * m).reshape(m, -1).T
    prods = np.prod(grids, axis=1)
    pts = grids[np.all(grids >= kappa * L, axis=1) & (prods >= Z)]
    left = np.arange(len(pts))
    for e in net.exponent_tuples:
        if not len(left):
            break
        corner = np.asarray([2.0**x for x in e])
        left = left[~np.all(pts[left] >= corner, axis=1)]
    if len(left):
        return CoverResult(False, tuple(int(c) for c in pts[left[0]]), len(pts))
    return CoverResult(True, None, len(pts))


def region_points_in_box(R: HyperboloidRegion, extents: Sequence[int]) -> bool:
    """Whether ``R`` fits inside the origin-anchored box with these extents."""
    if len(extents) != R.d:
        raise LatticeError("box dimension does not match region")
    return R.axis_max() < min(extents)
