"""Colored partitions: parts of size ``k`` come in ``k^(d-1)`` colors.

``ptn_d(n)`` is the coefficient of ``z^n`` in ``prod_k (1 - z^k)^(-k^(d-1))``.
For ``d = 1`` these are the ordinary partition numbers and for ``d = 2`` the
plane partition numbers.  All arithmetic is on Python integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

DIVISOR = "divisor"
EULER = "euler"
MAX_TABLE_N = 100_000


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class PartitionTable:
    d: int
    n_max: int
    values: tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)


def _check(d: int, n_max: int) -> None:
    if d < 1:
        raise PartitionError("d must be >= 1")
    if n_max < 0:
        raise PartitionError("n_max must be >= 0")
    if n_max > MAX_TABLE_N:
        raise PartitionError(f"n_max {n_max} beyond table capacity {MAX_TABLE_N}")


def _divisor_table(d: int, n_max: int) -> list[int]:
    # n a(n) = sum_{j=1}^n sigma(j) a(n-j),  sigma(j) = sum_{k | j} k^d
    sigma = [0] * (n_max + 1)
    for k in range(1, n_max + 1):
        w = k**d
        for j in range(k, n_max + 1, k):
            sigma[j] += w
    a = [0] * (n_max + 1)
    a[0] = 1
    for n in range(1, n_max + 1):
        s = 0
        for j in range(1, n + 1):
            s += sigma[j] * a[n - j]
        a[n] = s // n
    return a


def _euler_table(d: int, n_max: int) -> list[int]:
    # multiply factor by factor; (1 - z^k)^(-c) = sum_j C(c-1+j, j) z^(jk)
    a = np.zeros(n_max + 1, dtype=object)
    a[:] = 0
    a[0] = 1
    for k in range(1, n_max + 1):
        c = k ** (d - 1)
        out = a.copy()
        coef = 1
        for j in range(1, n_max // k + 1):
            coef = coef * (c - 1 + j) // j
            s = j * k
            out[s:] += coef * a[: n_max + 1 - s]
        a = out
    return [int(v) for v in a]


def ptn_table(d: int, n_max: int, method: str = DIVISOR) -> PartitionTable:
    _check(d, n_max)
    if method == DIVISOR:
        vals = _divisor_table(d, n_max)
    elif method == EULER:
        vals = _euler_table(d, n_max)
    else:
        raise PartitionError(f"unknown method {method!r}")
    return PartitionTable(d, n_max, tuple(vals))


def log_big(v: int) -> float:
    """Natural log of a positive integer from its bit length and top 53 bits."""
    if v <= 0:
        raise PartitionError("log of a nonpositive value")
    shift = max(v.bit_length() - 53, 0)
    return math.log(v >> shift) + shift * math.log(2.0)


def mantissa_exponent(v: int) -> tuple[float, int]:
    """``v = m * 10**e`` with ``1 <= m < 10`` (``(0.0, 0)`` for zero)."""
    if v == 0:
        return 0.0, 0
    digits = len(str(v))
    lead = int(str(v)[:17])
    return lead / 10 ** (min(digits, 17) - 1), digits - 1


class MeinardusFit(NamedTuple):
    alpha: float
    kappa_hat: float
    r2: float


def fit_loglog(x: np.ndarray, y: np.ndarray) -> MeinardusFit:
    if len(x) < 5:
        raise PartitionError("fit needs at least 5 points")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return MeinardusFit(float(slope), math.exp(intercept), r2)


def meinardus_exponent_fit(table: PartitionTable, n_lo: int = 200, n_hi: int = 2000) -> MeinardusFit:
    """Least squares of ``log log ptn_d(n)`` on ``log n`` over ``[n_lo, n_hi]``."""
    if n_lo < 8:
        raise PartitionError("fit window must start at n >= 8")
    if n_hi > table.n_max:
        raise PartitionError(f"fit window ends at {n_hi}, table stops at {table.n_max}")
    ns = np.arange(n_lo, n_hi + 1)
    if len(ns) < 5:
        raise PartitionError("fit needs at least 5 points")
    x = np.log(ns)
    y = np.log([log_big(table.values[n]) for n in ns])
    return fit_loglog(x, y)


def partition_budget(gamma: float, Y: float, d: int) -> int:
    if not (gamma > 0 and Y > 0):
        raise PartitionError("gamma and Y must be positive")
    return math.floor(2.0 * gamma ** (1.0 / d) * Y + 1e-9)


def partition_bound_count(
    gamma: float, Y: float, d: int, table: Optional[PartitionTable] = None
) -> int:
    """``sum_{n <= floor(2 gamma^(1/d) Y)} ptn_d(n)``."""
    budget = partition_budget(gamma, Y, d)
    if table is None:
        if budget > MAX_TABLE_N:
            raise PartitionError(f"budget {budget} beyond table capacity {MAX_TABLE_N}")
        table = ptn_table(d, budget)
    elif table.d != d:
        raise PartitionError("table dimension does not match d")
    if budget > table.n_max:
        raise PartitionError(f"budget {budget} beyond table capacity {table.n_max}")
    return sum(table.values[: budget + 1])
