"""Orthogonal sets of exponentials for the unit disk: zeros, certification, search."""
from .bessel import (
    MCMAHON_K1,
    ZeroTable,
    bessel_j0,
    bessel_j1,
    bessel_j1_prime,
    build_zero_table,
    ft_disk,
    mcmahon_zero,
    refine_zero,
    zero_gap_defect,
)
from .errors import (
    ClassificationDomainError,
    DegenerateInputError,
    DiskSpecError,
    DomainError,
    EmptyTableError,
    NotCertifiedError,
    RangeError,
    RefinementError,
    SchemaError,
    VersionMismatchError,
)
from .experiments import ExperimentRecord
from .geometry import (
    Configuration,
    HyperbolaClassification,
    Point,
    circle_intersections,
    classify_hyperbola,
    hyperbola_params,
    is_admissible_distance,
    min_gap,
    strip_width,
    triangle_angles,
    verify_configuration,
)
from .search import SearchBudget, SearchReport, candidate_points, extend, search_maximal, seed_pair

__version__ = "0.1.0"

__all__ = [
    "ClassificationDomainError",
    "Configuration",
    "DegenerateInputError",
    "DiskSpecError",
    "DomainError",
    "EmptyTableError",
    "ExperimentRecord",
    "HyperbolaClassification",
    "MCMAHON_K1",
    "NotCertifiedError",
    "Point",
    "RangeError",
    "RefinementError",
    "SchemaError",
    "SearchBudget",
    "SearchReport",
    "VersionMismatchError",
    "ZeroTable",
    "bessel_j0",
    "bessel_j1",
    "bessel_j1_prime",
    "build_zero_table",
    "candidate_points",
    "circle_intersections",
    "classify_hyperbola",
    "extend",
    "ft_disk",
    "hyperbola_params",
    "is_admissible_distance",
    "mcmahon_zero",
    "min_gap",
    "refine_zero",
    "search_maximal",
    "seed_pair",
    "strip_width",
    "triangle_angles",
    "verify_configuration",
    "zero_gap_defect",
]
