"""scikit-learn style wrappers.

``SemigroupModel`` treats the rows of ``X`` in ``fit`` as generators and
answers membership queries in ``predict``.  ``RandomSemigroupSampler`` draws
the generators itself from the p-random model, so it is fitted on nothing.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .experiments import auto_box
from .lattice import Box
from .sampling import RandomSetSpec, sample
from .semigroup import (
    SEMIGROUP,
    SUBSET_SUMS,
    closure_in_box,
    gap_report,
    minimal_generators,
    subset_sums_in_box,
    suggest_box,
)
from .validation import check_extents, check_points, check_probability

_BUILDERS = {SEMIGROUP: closure_in_box, SUBSET_SUMS: subset_sums_in_box}


class SemigroupModel(BaseEstimator):
    """Exact in-box ``<X>`` (``kind="semigroup"``) or ``FS(X)`` (``kind="subset_sums"``).

    Parameters
    ----------
    kind : {"semigroup", "subset_sums"}
    box : sequence of int, optional
        Box extents; by default a cube sized from the largest coordinate.
    collect_gaps : bool
        Keep the gap point list on ``gap_report_``.

    Attributes set by ``fit``: ``grid_``, ``gap_report_``, ``n_gaps_``,
    ``certified_``, ``minimal_generators_`` (semigroup only) and
    ``n_features_in_``.
    """

    def __init__(self, kind: str = SEMIGROUP, box: Optional[Sequence[int]] = None, collect_gaps: bool = False):
        self.kind = kind
        self.box = box
        self.collect_gaps = collect_gaps

    def fit(self, X, y=None):
        if self.kind not in _BUILDERS:
            raise ValueError(f"kind must be one of {sorted(_BUILDERS)}")
        arr = np.asarray(X)
        d = arr.shape[1] if arr.ndim == 2 else 1
        A = check_points(X, d)
        box = Box(check_extents(self.box, d)) if self.box is not None else suggest_box(A, d)
        self.grid_ = _BUILDERS[self.kind](A, box)
        self.gap_report_ = gap_report(self.grid_, collect_points=self.collect_gaps)
        self.n_gaps_ = self.gap_report_.gap_count
        self.certified_ = self.gap_report_.certified
        if self.kind == SEMIGROUP:
            self.minimal_generators_ = minimal_generators(self.grid_)
        self.n_features_in_ = d
        return self

    def predict(self, X) -> np.ndarray:
        """Membership of each query row.

        Points beyond the box are members when the semigroup grid is
        certified; otherwise they cannot be decided and raise ``ValueError``.
        """
        check_is_fitted(self, "grid_")
        Q = check_points(X, self.n_features_in_)
        box = self.grid_.box
        inside = box.contains_array(Q)
        out = np.ones(len(Q), dtype=bool)
        if inside.any():
            out[inside] = self.grid_.grid.bits[tuple(Q[inside].T)]
        if not inside.all() and not self.certified_:
            raise ValueError("query outside box and the grid is not certified")
        return out

    def score(self, X, y) -> float:
        """Fraction of queries whose predicted membership equals ``y``."""
        return float(np.mean(self.predict(X) == np.asarray(y, dtype=bool)))


class RandomSemigroupSampler(BaseEstimator):
    """Sample ``A`` from the p-random model and fit a :class:`SemigroupModel` on it."""

    def __init__(self, d: int = 1, p: float = 0.1, seed: int = 0, box: Optional[Sequence[int]] = None,
                 kind: str = SEMIGROUP, outer_C: float = 20.0):
        self.d = d
        self.p = p
        self.seed = seed
        self.box = box
        self.kind = kind
        self.outer_C = outer_C

    def fit(self, X=None, y=None):
        p = check_probability(self.p)
        box = Box(check_extents(self.box, self.d)) if self.box is not None else auto_box(self.d, p, self.outer_C)
        self.generators_ = sample(RandomSetSpec(self.d, p, box, self.seed)).points
        self.model_ = SemigroupModel(self.kind, box.extents).fit(self.generators_)
        self.genus_ = self.model_.n_gaps_ if self.model_.certified_ else None
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return self.model_.predict(X)
