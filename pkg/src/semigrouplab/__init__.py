"""Exact lattice computations and Monte Carlo experiments for random
generalized numerical semigroups."""
from .estimators import RandomSemigroupSampler, SemigroupModel
from .geometry import (
    DyadicNet,
    HyperboloidRegion,
    Tetrahedron,
    box_net,
    count_region,
    enumerate_region,
    hyperplane_net,
    lattice_count_sandwich,
    region_contains,
    region_volume,
    tetra_contains,
    verify_box_cover,
    verify_hyperplane_cover,
)
from .lattice import BitGrid, Box, LatticeError, ResourceLimitError, index, point_at, popcount_in, shift_or
from .partitions import PartitionTable, meinardus_exponent_fit, partition_bound_count, ptn_table
from .sampling import RandomSetSpec, SampleResult, derive_seed, sample, sample_restricted
from .semigroup import (
    ClosureGrid,
    GapReport,
    GroupCoverage,
    closure_in_box,
    completeness_certificate,
    dense_spot_check,
    gap_report,
    minimal_generators,
    residue_coverage,
    subset_sums_in_box,
)
from .experiments import (
    SweepTable,
    TrialConfig,
    TrialResult,
    embedding_dimension_report,
    run_trial,
    shape_report,
    sweep,
    syndeticity_check,
)

__version__ = "0.1.0"

__all__ = [
    "BitGrid",
    "Box",
    "ClosureGrid",
    "DyadicNet",
    "GapReport",
    "GroupCoverage",
    "HyperboloidRegion",
    "LatticeError",
    "PartitionTable",
    "RandomSemigroupSampler",
    "RandomSetSpec",
    "ResourceLimitError",
    "SampleResult",
    "SemigroupModel",
    "SweepTable",
    "Tetrahedron",
    "TrialConfig",
    "TrialResult",
    "box_net",
    "closure_in_box",
    "completeness_certificate",
    "count_region",
    "dense_spot_check",
    "derive_seed",
    "embedding_dimension_report",
    "enumerate_region",
    "gap_report",
    "hyperplane_net",
    "index",
    "lattice_count_sandwich",
    "meinardus_exponent_fit",
    "minimal_generators",
    "partition_bound_count",
    "point_at",
    "popcount_in",
    "ptn_table",
    "region_contains",
    "region_volume",
    "residue_coverage",
    "run_trial",
    "sample",
    "sample_restricted",
    "shape_report",
    "shift_or",
    "subset_sums_in_box",
    "sweep",
    "syndeticity_check",
    "tetra_contains",
    "verify_box_cover",
    "verify_hyperplane_cover",
]
