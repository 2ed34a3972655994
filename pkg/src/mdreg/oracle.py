"""Slow reference implementations used by tests and the verify command.

These deliberately avoid the closed-form and slope machinery of the fast
paths: the loss is recomputed by exact piecewise-constant integration of the
defining integral, and coordinate minima are found by exhaustive evaluation
at every kink with no slope shortcut. Size caps are hard errors so these
never leak into production use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import PairTables
from .model import RegressionData, validate_params, validate_weights
from .solver import _objective_many, candidate_grid, coordinate_slice, slope_profile

INTEGRATION_CAP = 50
BRUTE_FORCE_CAP = 30
GRID_STEPS_CAP = 401
GRID_POINTS_CAP = 1_000_000


@dataclass(frozen=True)
class MeasureSpec:
    """Integration measure for the defining integral; only the identity
    (Lebesgue) measure is implemented."""

    kind: str = "lebesgue"

    def __post_init__(self) -> None:
        if self.kind != "lebesgue":
            raise ValueError(f"unsupported measure kind {self.kind!r}")


def loss_by_integration(
    data: RegressionData,
    weights: np.ndarray,
    b,
    measure: MeasureSpec = MeasureSpec(),
    cap: int = INTEGRATION_CAP,
) -> float:
    """Evaluate the distance from its integral definition, exactly.

    Per weight column the integrand is the square of a step function of y
    with jumps only at the residuals and negated residuals, so integrating
    piece by piece between sorted breakpoints is exact: no quadrature error.
    The step vanishes outside the breakpoint hull, hence the integral is
    finite. O(n^2) per column; requires n <= cap.
    """
    if data.n > cap:
        raise ValueError(f"integration oracle capped at n={cap}, got n={data.n}")
    w = validate_weights(data, weights)
    bv = validate_params(b, data.p)
    r = data.y - data.x @ bv

    pts = np.sort(np.concatenate((r, -r)))
    mids = 0.5 * (pts[:-1] + pts[1:])
    lengths = np.diff(pts)
    # On each open interval: sum_i d_ik * [ I(r_i <= y) - I(-r_i < y) ].
    step = (r[None, :] <= mids[:, None]).astype(np.float64)
    step -= (-r[None, :] < mids[:, None]).astype(np.float64)
    total = 0.0
    for k in range(data.p):
        bracket = step @ w[:, k]
        total += float(np.sum(bracket * bracket * lengths))
    return total


def brute_force_coordinate_min(
    tables: PairTables, b, coord: int, cap: int = BRUTE_FORCE_CAP
) -> tuple[float, float]:
    """Exhaustive coordinate minimum: evaluate the objective at every kink.

    No slope profile and no candidate filtering; every kink in the merged
    grid is tried, ties broken toward the smallest kink exactly as in
    the solver's update. O(n^4); requires n <= cap.
    """
    if tables.n > cap:
        raise ValueError(f"brute-force oracle capped at n={cap}, got n={tables.n}")
    sl = coordinate_slice(tables, b, coord)
    if sl.plus_zeros.size == 0 and sl.minus_zeros.size == 0:
        return float(np.asarray(b, dtype=np.float64)[coord]), 0.0
    grid = candidate_grid(sl, slope_profile(sl))
    values = _objective_many(sl, grid.zeros)
    k = int(np.argmin(values))
    return float(grid.zeros[k]), float(values[k])


def brute_force_grid_min(
    data: RegressionData,
    weights: np.ndarray,
    lo,
    hi,
    steps: int,
) -> tuple[np.ndarray, float]:
    """Dense-grid minimization of the distance over a box (sanity probe only).

    Returns the best grid point; if the true minimizer lies outside the box
    the returned point sits on the boundary. Requires p <= 3 and
    steps <= 401 per axis with at most 10^6 grid points in total.
    """
    from .distance import build_pair_tables, loss as closed_loss

    if data.p > 3:
        raise ValueError(f"grid search capped at p=3, got p={data.p}")
    if not 2 <= steps <= GRID_STEPS_CAP:
        raise ValueError(f"steps must be in [2, {GRID_STEPS_CAP}], got {steps}")
    if steps**data.p > GRID_POINTS_CAP:
        raise ValueError(f"grid too large: {steps}^{data.p} > {GRID_POINTS_CAP}")
    lov = validate_params(lo, data.p)
    hiv = validate_params(hi, data.p)
    if np.any(hiv <= lov):
        raise ValueError("need lo < hi on every axis")

    tables = build_pair_tables(data, weights)
    axes = [np.linspace(lov[k], hiv[k], steps) for k in range(data.p)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)

    xp = tables.xplus.reshape(-1, data.p)
    xm = tables.xminus.reshape(-1, data.p)
    yp = tables.yplus.ravel()
    ym = tables.yminus.ravel()
    ds = tables.dstar.ravel()

    best_v = np.inf
    best_i = 0
    chunk = max(1, GRID_POINTS_CAP // max(1, xp.shape[0]))
    for lo_i in range(0, points.shape[0], chunk):
        block = points[lo_i : lo_i + chunk]
        vals = np.abs(yp[None, :] - block @ xp.T)
        vals -= np.abs(ym[None, :] - block @ xm.T)
        losses = vals @ ds
        k = int(np.argmin(losses))
        if losses[k] < best_v:
            best_v = float(losses[k])
            best_i = lo_i + k
    return points[best_i].copy(), float(best_v)
