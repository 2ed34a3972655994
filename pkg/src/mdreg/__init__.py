"""Minimum-distance linear regression by coordinate-wise minimization.

The estimator minimizes a Cramer-von Mises type L2 distance between the
weighted empirical processes of residuals and negated residuals, using the
identity integration measure. The distance has an exact pairwise closed
form, and each coordinate minimization reduces to a sorted kink search over
a piecewise-linear objective.
"""

from .bench import BenchReport, BenchRow, compare_run, nelder_mead_fit, scaling_run
from .distance import PairTables, build_pair_tables, loss
from .model import (
    DataError,
    FitResult,
    RegressionData,
    default_weights,
    load_csv,
    simulate,
    write_csv,
)
from .oracle import (
    MeasureSpec,
    brute_force_coordinate_min,
    brute_force_grid_min,
    loss_by_integration,
)
from .solver import (
    CandidateGrid,
    CoordinateSlice,
    SlopeProfile,
    SolverConfig,
    candidate_grid,
    candidate_zeros,
    coordinate_objective,
    coordinate_slice,
    coordinate_update,
    derivative_at,
    fit,
    slope_profile,
)

__version__ = "0.1.0"
