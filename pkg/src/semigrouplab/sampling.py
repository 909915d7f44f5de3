"""Seeded Erdős–Rényi sampling of lattice boxes.

Every nonzero cell of the box is kept independently with probability ``p``.
Draws come from numpy's ``PCG64`` bit generator seeded with the RandomSetSpec 64-bit
seed; the kept cells are located by geometric skip lengths over the
candidate cells in row-major order, so the cost is proportional to the
number of kept points rather than the box size.  Changing the generator or
the skip scheme changes every sample, so both are part of the
reproducibility contract.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .lattice import Box, PointPredicate, check_cell_budget

GENERATOR_NAME = "numpy.random.PCG64"
_U64 = 2**64


class SamplingError(ValueError):
    pass


def parse_seed(seed: Union[int, str]) -> int:
    """Accept a 64-bit unsigned seed as an int, a decimal string or ``0x`` hex."""
    if isinstance(seed, str):
        s = seed.strip().lower()
        value = int(s, 16) if s.startswith("0x") else int(s, 10)
    else:
        value = int(seed)
    if not 0 <= value < _U64:
        raise SamplingError(f"seed {seed!r} is not a 64-bit unsigned integer")
    return value


def derive_seed(seed_base: int, *keys: int) -> int:
    """Per-trial seed from a base seed and integer keys (cell, trial, ...).

    Uses ``numpy.random.SeedSequence(seed_base, spawn_key=keys)`` and takes
    its first 64-bit state word, so the result depends only on the inputs
    and never on execution order.
    """
    ss = np.random.SeedSequence(parse_seed(seed_base), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class RandomSetSpec:
    dimension: int
    p: float
    box: Box
    seed: int = 0
    include_origin: bool = False

    def __post_init__(self):
        if not (0.0 < float(self.p) < 1.0):
            raise SamplingError("p out of range")
        if self.dimension < 1:
            raise SamplingError("dimension must be >= 1")
        if self.box.d != self.dimension:
            raise SamplingError(
                f"box dimension {self.box.d} does not match dimension {self.dimension}"
            )
        object.__setattr__(self, "seed", parse_seed(self.seed))
        object.__setattr__(self, "p", float(self.p))


@dataclass(frozen=True)
class SampleResult:
    spec: RandomSetSpec
    points: np.ndarray  # (n, d) int64, strictly increasing row-major rank

    def __len__(self) -> int:
        return len(self.points)

    def point_list(self) -> list[tuple[int, ...]]:
        return [tuple(int(c) for c in row) for row in self.points]


def _geometric_positions(rng: np.random.Generator, p: float, n: int) -> np.ndarray:
    """Indices in ``[0, n)`` of the successes of ``n`` Bernoulli(p) trials."""
    if n <= 0:
        return np.empty(0, dtype=np.int64)
    batch = int(min(n, p * n * 1.1)) + 64
    chunks = []
    pos = -1
    while True:
        skips = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(skips, dtype=np.int64)
        chunks.append(idx)
        pos = int(idx[-1])
        if pos >= n:
            break
    out = np.concatenate(chunks)
    return out[out < n]


def _rng(spec: RandomSetSpec) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(spec.seed))


def sample(spec: RandomSetSpec) -> SampleResult:
    """Realize the p-random subset of ``spec.box`` (origin only if requested)."""
    return sample_restricted(spec, None)


def sample_restricted(spec: RandomSetSpec, allowed: Optional[PointPredicate]) -> SampleResult:
    """Like :func:`sample` but only cells accepted by ``allowed`` are candidates.

    ``allowed`` is vectorized over an ``(n, d)`` coordinate array.  With
    ``allowed=None`` no coordinate array is materialized.
    """
    box = spec.box
    start = 0 if spec.include_origin else 1
    rng = _rng(spec)
    if allowed is None:
        ranks = _geometric_positions(rng, spec.p, box.size - start) + start
    else:
        check_cell_budget(box.size, "restricted sampling")
        coords = box.coords()[start:]
        mask = np.asarray(allowed(coords), dtype=bool)
        candidates = np.flatnonzero(mask) + start
        ranks = candidates[_geometric_positions(rng, spec.p, len(candidates))]
    if len(ranks):
        pts = np.stack(np.unravel_index(ranks, box.extents), axis=1).astype(np.int64)
    else:
        pts = np.empty((0, box.d), dtype=np.int64)
    return SampleResult(spec, pts)
