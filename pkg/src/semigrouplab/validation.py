"""Input validation helpers shared by the library and the estimators."""
from __future__ import annotations

import numbers
from typing import Sequence

import numpy as np


def check_points(A, d: int, nonnegative: bool = True) -> np.ndarray:
    """Coerce a point collection to an ``(n, d)`` int64 array.

    Accepts any nested sequence or array; 1-d input is read as ``n`` points
    when ``d == 1``.  Non-integral or negative coordinates raise ``ValueError``.
    """
    arr = np.asarray(A if A is not None else [], dtype=object if _ragged(A) else None)
    if arr.dtype == object:
        raise ValueError("points must all have the same dimension")
    if arr.size == 0:
        return np.empty((0, d), dtype=np.int64)
    if arr.ndim == 1 and d == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got array of shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValueError("point coordinates must be integers")
    elif arr.dtype.kind not in "iub":
        raise ValueError(f"point coordinates must be integers, got dtype {arr.dtype}")
    out = arr.astype(np.int64)
    if nonnegative and np.any(out < 0):
        raise ValueError("point coordinates must be nonnegative")
    return out


def _ragged(A) -> bool:
    if isinstance(A, np.ndarray) or A is None:
        return False
    try:
        lengths = {len(a) for a in A}
    except TypeError:
        return False
    return len(lengths) > 1


def check_extents(extents: Sequence[int], d: int | None = None) -> tuple[int, ...]:
    if isinstance(extents, numbers.Integral):
        extents = (int(extents),) * (d or 1)
    ext = tuple(int(e) for e in extents)
    if d is not None and len(ext) != d:
        raise ValueError(f"expected {d} extents, got {len(ext)}")
    if any(e < 1 for e in ext):
        raise ValueError("box extents must be >= 1")
    return ext


def check_probability(p) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError("p out of range")
    return p
