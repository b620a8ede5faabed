"""Continued-fraction resolvents and singular values of complex tridiagonal Hamiltonians."""

from .errors import (
    DimensionError,
    InconsistencyError,
    NumericalError,
    PoleError,
    SingularityError,
    TricfracError,
    ValidationError,
)
from .fixed_point import convergence_verdict, quartic_coeffs, solve_quartic
from .matrix_cf import mcf_iterate_homogeneous, mcf_tail, secular_det, singular_values_scan
from .operators import (
    BlockTridiagonal2,
    ComplexTridiagonal,
    GeneralTridiagonal,
    augment_double,
    build_block_tridiagonal,
    build_tridiagonal,
    discretize_schroedinger,
    homogeneous_tridiagonal,
    interleave_similarity,
)
from .scalar_cf import cf_tail, factorize, greens_f1, resolvent_full, scalar_fixed_points, scalar_iterate

__version__ = "0.1.0"
