"""Lattice points, origin-anchored boxes and dense boolean grids.

A :class:`Box` with extents ``(E_1, ..., E_d)`` is the set of points ``x`` with
``0 <= x_i < E_i``.  Cells are laid out row-major with the last coordinate
varying fastest, so a :class:`BitGrid` is just a C-ordered boolean ndarray of
shape ``extents``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from math import prod
from typing import Callable, Optional, Sequence

import numpy as np

Point = tuple[int, ...]
PointPredicate = Callable[[np.ndarray], np.ndarray]

MAX_CELLS_ENV = "SEMIGROUPLAB_MAX_CELLS"
DEFAULT_MAX_CELLS = 2**31

# hard ceiling on what a Box may describe, independent of the memory cap
_ADDRESSABLE = 2**62


class LatticeError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    """Raised when a computation would exceed the configured cell cap."""


def max_cells() -> int:
    raw = os.environ.get(MAX_CELLS_ENV)
    if raw is None:
        return DEFAULT_MAX_CELLS
    return int(raw, 0)


def check_cell_budget(n_cells: int, what: str = "box") -> None:
    cap = max_cells()
    if n_cells > cap:
        raise ResourceLimitError(
            f"{what} needs {n_cells} cells, above the cap of {cap} "
            f"(set {MAX_CELLS_ENV} to raise it)"
        )


@dataclass(frozen=True)
class Box:
    extents: tuple[int, ...]
    strides: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ext = tuple(int(e) for e in self.extents)
        if len(ext) == 0:
            raise LatticeError("box needs at least one axis")
        if any(e < 1 for e in ext):
            raise LatticeError(f"box extents must be >= 1, got {ext}")
        if prod(ext) > _ADDRESSABLE:
            raise LatticeError(f"box {ext} overflows the addressable cell count")
        strides = [1] * len(ext)
        for i in range(len(ext) - 2, -1, -1):
            strides[i] = strides[i + 1] * ext[i + 1]
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "strides", tuple(strides))

    @classmethod
    def cube(cls, d: int, n: int) -> "Box":
        return cls((n,) * d)

    @property
    def d(self) -> int:
        return len(self.extents)

    @property
    def size(self) -> int:
        return prod(self.extents)

    def contains(self, p: Sequence[int]) -> bool:
        return len(p) == self.d and all(0 <= c < e for c, e in zip(p, self.extents))

    def contains_array(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, self.d)
        return np.all((pts >= 0) & (pts < np.asarray(self.extents)), axis=1)

    def coords(self) -> np.ndarray:
        """All points of the box in row-major order, shape ``(size, d)``."""
        grids = np.indices(self.extents).reshape(self.d, -1)
        return grids.T.copy()


def index(box: Box, p: Sequence[int]) -> int:
    """Row-major rank of ``p`` inside ``box``."""
    if len(p) != box.d:
        raise LatticeError(f"point {tuple(p)} has dimension {len(p)}, box has {box.d}")
    if not box.contains(p):
        raise LatticeError("point outside box")
    return sum(int(c) * s for c, s in zip(p, box.strides))


def point_at(box: Box, rank: int) -> Point:
    if not 0 <= rank < box.size:
        raise LatticeError("point outside box")
    out = []
    for s in box.strides:
        q, rank = divmod(rank, s)
        out.append(q)
    return tuple(out)


class BitGrid:
    """Dense indicator of a set of lattice points inside a box.

    ``bits`` is a C-ordered boolean array of shape ``box.extents``; callers
    must treat it as read-only once the grid has been handed out.
    """

    __slots__ = ("box", "bits")

    def __init__(self, box: Box, bits: Optional[np.ndarray] = None):
        self.box = box
        if bits is None:
            check_cell_budget(box.size)
            bits = np.zeros(box.extents, dtype=bool)
        else:
            bits = np.ascontiguousarray(bits, dtype=bool)
            if bits.shape != box.extents:
                raise LatticeError(
                    f"bit array shape {bits.shape} does not match box {box.extents}"
                )
        self.bits = bits

    @classmethod
    def from_points(cls, box: Box, points) -> "BitGrid":
        grid = cls(box)
        pts = np.asarray(points, dtype=np.int64).reshape(-1, box.d)
        if len(pts):
            if not box.contains_array(pts).all():
                raise LatticeError("point outside box")
            grid.bits[tuple(pts.T)] = True
        return grid

    @classmethod
    def full(cls, box: Box) -> "BitGrid":
        check_cell_budget(box.size)
        return cls(box, np.ones(box.extents, dtype=bool))

    def __getitem__(self, p: Sequence[int]) -> bool:
        if not self.box.contains(p):
            raise LatticeError("point outside box")
        return bool(self.bits[tuple(p)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitGrid):
            return NotImplemented
        return self.box == other.box and np.array_equal(self.bits, other.bits)

    def __repr__(self) -> str:
        return f"BitGrid(extents={self.box.extents}, popcount={self.popcount()})"

    @property
    def flat(self) -> np.ndarray:
        return self.bits.reshape(-1)

    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def points(self) -> np.ndarray:
        """Set cells as an ``(n, d)`` array in row-major order."""
        return np.argwhere(self.bits)

    def point_list(self) -> list[Point]:
        return [tuple(int(c) for c in row) for row in self.points()]

    def issubset(self, other: "BitGrid") -> bool:
        if self.box != other.box:
            raise LatticeError("grids live in different boxes")
        return not np.any(self.bits & ~other.bits)


def shift_or(grid: BitGrid, offset: Sequence[int]) -> BitGrid:
    """Union of ``grid`` with its translate by ``offset``, clipped to the box."""
    offset = tuple(int(o) for o in offset)
    if len(offset) != grid.box.d:
        raise LatticeError(
            f"offset dimension {len(offset)} does not match grid dimension {grid.box.d}"
        )
    if any(o < 0 for o in offset):
        raise LatticeError("offset must be a nonnegative lattice vector")
    out = grid.bits.copy()
    if any(o >= e for o, e in zip(offset, grid.box.extents)):
        return BitGrid(grid.box, out)
    dst = tuple(slice(o, None) for o in offset)
    src = tuple(slice(0, e - o) for o, e in zip(offset, grid.box.extents))
    out[dst] |= grid.bits[src]
    return BitGrid(grid.box, out)


def popcount_in(grid: BitGrid, predicate: Optional[PointPredicate] = None) -> int:
    """Number of set cells whose point satisfies ``predicate``.

    The predicate is vectorized: it receives an ``(n, d)`` integer array of
    points and returns a boolean mask of length ``n``.
    """
    if predicate is None:
        return grid.popcount()
    pts = grid.points()
    if len(pts) == 0:
        return 0
    mask = np.asarray(predicate(pts), dtype=bool)
    return int(np.count_nonzero(mask))
