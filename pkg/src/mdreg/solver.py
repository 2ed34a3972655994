"""Coordinate-wise minimization of the pairwise absolute-deviation distance.

Along one coordinate the distance is a continuous piecewise-linear function

    f(z) = sum_k w+_k |z - e+_k|  -  sum_k w-_k |z - e-_k|  + const,

whose kinks ("zeros") come from the pair sums and differences of the sample.
One update sorts the zeros of both families, runs the prefix-sum slope
recursions, scans interval midpoints for slope sign changes from negative to
nonnegative, and picks the best such kink. A sweep applies this to every
coordinate in order; per sweep the cost is O(p n^2 log n).

Because the minus-family weights enter with a negative sign and the pair
weights d*_ij may themselves be negative, f need not be convex; all
sign-change kinks are therefore evaluated, not just the first one.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distance import PairTables, build_pair_tables, loss
from .model import (
    DataError,
    FitResult,
    RegressionData,
    default_weights,
    validate_params,
    validate_weights,
)

# Zeros closer than this (relative) are merged into one kink with summed
# weight; keeps interval midpoints well separated from the kinks themselves.
TIE_RTOL = 1e-12

# Row chunk cap for the candidate-objective broadcast (rows x terms doubles).
_EVAL_CHUNK = 8_000_000


@dataclass(frozen=True, eq=False)
class CoordinateSlice:
    """Sorted, tie-merged kink terms of one coordinate's objective.

    ``plus_zeros``/``minus_zeros`` are strictly ascending after merging;
    weights are the signed pair weights times |pair sum or difference| of the
    active column. Pairs whose column entry vanishes contribute only to the
    constant; their (i, j) indices (upper-triangular convention, an off-
    diagonal entry standing for both orders) are kept in ``excluded_plus`` /
    ``excluded_minus``. ``n_plus_raw``/``n_minus_raw`` count included pairs
    before tie-merging.
    """

    coord: int
    b_coord: float
    plus_zeros: np.ndarray
    plus_weights: np.ndarray
    minus_zeros: np.ndarray
    minus_weights: np.ndarray
    excluded_plus: tuple[np.ndarray, np.ndarray]
    excluded_minus: tuple[np.ndarray, np.ndarray]
    n_plus_raw: int
    n_minus_raw: int


@dataclass(frozen=True, eq=False)
class SlopeProfile:
    """Prefix-sum slope sequences; ``zeta[i]`` is the plus-sum derivative on
    the i-th inter-kink interval (i kinks to the left), ``eta`` likewise for
    the minus sum."""

    zeta: np.ndarray
    eta: np.ndarray


@dataclass(frozen=True, eq=False)
class CandidateGrid:
    """Merged kink grid of both families with one probe point per linear piece.

    ``midpoints[i]`` lies strictly between ``zeros[i-1]`` and ``zeros[i]``
    (the outer probes sit one unit beyond the extreme kinks), and ``slopes``
    holds the objective derivative at each probe.
    """

    zeros: np.ndarray
    midpoints: np.ndarray
    slopes: np.ndarray


@dataclass(frozen=True)
class SolverConfig:
    """Sweep-loop controls; ``init`` is "ols", "zeros", or a start vector.

    ``tol_param`` bounds the largest coordinate move in a sweep (absolute);
    ``tol_loss`` bounds the per-sweep loss decrease relative to the current
    loss level (the accumulated loss carries rounding noise proportional to
    its own magnitude, so an absolute threshold would chase noise).
    """

    tol_param: float = 1e-8
    tol_loss: float = 1e-10
    max_sweeps: int = 100
    init: object = "ols"

    def __post_init__(self) -> None:
        if not (self.tol_param > 0 and self.tol_loss > 0):
            raise DataError("tolerances must be positive")
        if self.max_sweeps < 1:
            raise DataError("max_sweeps must be >= 1")
        if isinstance(self.init, str) and self.init not in ("ols", "zeros"):
            raise DataError(f"unknown init {self.init!r}; use 'ols', 'zeros', or a vector")


def _run_starts(z: np.ndarray) -> np.ndarray:
    """Start indices of (near-)duplicate runs in a sorted array.

    Two neighbors belong to one run when their gap is within TIE_RTOL
    relative to the array's magnitude (at least 1), so the tolerance is a
    single number per array.
    """
    if z.size <= 1:
        return np.zeros(min(z.size, 1), dtype=np.intp)
    tol = TIE_RTOL * max(1.0, abs(float(z[0])), abs(float(z[-1])))
    new_run = np.diff(z) > tol
    return np.flatnonzero(np.concatenate(([True], new_run)))


def _merge_ties(zeros: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort terms by kink location and merge runs of (near-)equal kinks."""
    if zeros.size == 0:
        return zeros, weights
    order = np.argsort(zeros)
    z = zeros[order]
    w = weights[order]
    if z.size == 1:
        return z, w
    starts = _run_starts(z)
    return z[starts], np.add.reduceat(w, starts)


def _coord_statics(tables: PairTables, coord: int) -> dict:
    """Parameter-independent slice ingredients for one coordinate, cached on
    the tables: nonzero column pair sums/differences, their weights, and the
    pair indices they came from."""
    cached = tables.coord_cache.get(coord)
    if cached is not None:
        return cached
    xl = tables.x[:, coord]

    s = xl[tables.iu] + xl[tables.ju]
    keep = s != 0.0
    drop = ~keep
    diag = np.arange(tables.n)
    s2 = xl[tables.iu_strict] - xl[tables.ju_strict]
    keep2 = s2 != 0.0
    drop2 = ~keep2
    statics = {
        "s_plus": s[keep],
        "w_plus": tables.dstar_tri[keep] * np.abs(s[keep]),
        "i_plus": tables.iu[keep],
        "j_plus": tables.ju[keep],
        "excluded_plus": (tables.iu[drop], tables.ju[drop]),
        "s_minus": s2[keep2],
        "w_minus": tables.dstar_tri_strict[keep2] * np.abs(s2[keep2]),
        "i_minus": tables.iu_strict[keep2],
        "j_minus": tables.ju_strict[keep2],
        "excluded_minus": (
            np.concatenate((diag, tables.iu_strict[drop2])),
            np.concatenate((diag, tables.ju_strict[drop2])),
        ),
    }
    tables.coord_cache[coord] = statics
    return statics


def coordinate_slice(tables: PairTables, b, coord: int) -> CoordinateSlice:
    """Build the kink terms of coordinate ``coord`` at the current point.

    Kink locations follow from the pair identities: with residuals
    r = y - x b, the plus-family kink of pair (i, j) is
    b_coord + (r_i + r_j) / (x_i + x_j)_coord and the minus-family kink is
    b_coord + (r_i - r_j) / (x_i - x_j)_coord, defined whenever the
    denominator is nonzero. O(n^2 log n) including the sort.
    """
    if not 0 <= coord < tables.p:
        raise DataError(f"coordinate {coord} out of range for p={tables.p}")
    bv = validate_params(b, tables.p)
    st = _coord_statics(tables, coord)
    r = tables.y - tables.x @ bv
    bl = float(bv[coord])

    zp = bl + (r[st["i_plus"]] + r[st["j_plus"]]) / st["s_plus"]
    zm = bl + (r[st["i_minus"]] - r[st["j_minus"]]) / st["s_minus"]
    zp, wp = _merge_ties(zp, st["w_plus"])
    zm, wm = _merge_ties(zm, st["w_minus"])
    return CoordinateSlice(
        coord=coord,
        b_coord=bl,
        plus_zeros=zp,
        plus_weights=wp,
        minus_zeros=zm,
        minus_weights=wm,
        excluded_plus=st["excluded_plus"],
        excluded_minus=st["excluded_minus"],
        n_plus_raw=st["s_plus"].size,
        n_minus_raw=st["s_minus"].size,
    )


def slope_profile(sl: CoordinateSlice) -> SlopeProfile:
    """Run the slope recursions over the sorted, merged terms of ``sl``."""

    def profile(weights: np.ndarray) -> np.ndarray:
        out = np.empty(weights.size + 1)
        if weights.size == 0:
            out[0] = 0.0
            return out
        total = float(np.sum(weights))
        out[0] = -total
        np.cumsum(weights, out=out[1:])
        out[1:] *= 2.0
        out[1:] -= total
        return out

    return SlopeProfile(zeta=profile(sl.plus_weights), eta=profile(sl.minus_weights))


def _slopes_at(sl: CoordinateSlice, prof: SlopeProfile, q: np.ndarray) -> np.ndarray:
    i1 = np.searchsorted(sl.plus_zeros, q)
    i2 = np.searchsorted(sl.minus_zeros, q)
    return prof.zeta[i1] - prof.eta[i2]


def derivative_at(sl: CoordinateSlice, prof: SlopeProfile, q: float) -> float:
    """Objective derivative at ``q``, located by binary search in each family.

    ``q`` must not coincide with a kink (use interval midpoints); the
    derivative does not exist there.
    """
    for zeros in (sl.plus_zeros, sl.minus_zeros):
        k = np.searchsorted(zeros, q)
        if k < zeros.size and zeros[k] == q:
            raise ValueError(f"derivative undefined at kink {q!r}")
    return float(_slopes_at(sl, prof, np.asarray([q], dtype=np.float64))[0])


def candidate_grid(sl: CoordinateSlice, prof: SlopeProfile) -> CandidateGrid:
    """Merge both kink families into one grid and probe every linear piece.

    The slope on each inter-kink interval is read from the profiles by
    counting how many kinks of each family sit to the interval's left, which
    the labeled union sort yields directly.
    """
    zp, zm = sl.plus_zeros, sl.minus_zeros
    if zp.size + zm.size == 0:
        empty = np.empty(0)
        return CandidateGrid(zeros=empty, midpoints=empty.copy(), slopes=empty.copy())
    union = np.concatenate((zp, zm))
    order = np.argsort(union)
    z = union[order]
    starts = _run_starts(z)
    zeros = z[starts]

    # Interval slope = zeta[#plus kinks left of it] - eta[#minus kinks left].
    plus_before = np.cumsum(order < zp.size)
    ends = np.append(starts[1:], z.size)
    ip = np.empty(zeros.size + 1, dtype=np.intp)
    im = np.empty(zeros.size + 1, dtype=np.intp)
    ip[0] = im[0] = 0
    ip[1:] = plus_before[ends - 1]
    im[1:] = ends - ip[1:]
    slopes = prof.zeta[ip] - prof.eta[im]

    q = np.empty(zeros.size + 1)
    q[0] = zeros[0] - 1.0
    q[-1] = zeros[-1] + 1.0
    if zeros.size > 1:
        q[1:-1] = 0.5 * (zeros[:-1] + zeros[1:])
    return CandidateGrid(zeros=zeros, midpoints=q, slopes=slopes)


def candidate_zeros(sl: CoordinateSlice, prof: SlopeProfile) -> np.ndarray:
    """Kinks where the slope changes sign from negative to nonnegative.

    A zero slope counts as nonnegative on the right probe but not as negative
    on the left probe, so a flat valley emits its left kink and plateau
    interiors are skipped.
    """
    grid = candidate_grid(sl, prof)
    if grid.zeros.size == 0:
        return grid.zeros
    mask = (grid.slopes[:-1] < 0.0) & (grid.slopes[1:] >= 0.0)
    return grid.zeros[mask]


def _objective_many(sl: CoordinateSlice, zs: np.ndarray) -> np.ndarray:
    """Objective values at the points ``zs``; O(len(zs) * terms).

    The per-row reductions are plain axis sums (not BLAS dots), so a value at
    a given point does not depend on how many other points are evaluated in
    the same call.
    """
    zs = np.asarray(zs, dtype=np.float64)
    out = np.empty(zs.size)
    terms = max(1, sl.plus_zeros.size + sl.minus_zeros.size)
    step = max(1, _EVAL_CHUNK // terms)
    for lo in range(0, zs.size, step):
        hi = min(lo + step, zs.size)
        block = zs[lo:hi, None]
        acc = np.sum(np.abs(block - sl.plus_zeros[None, :]) * sl.plus_weights, axis=1)
        if sl.minus_zeros.size:
            acc -= np.sum(np.abs(block - sl.minus_zeros[None, :]) * sl.minus_weights, axis=1)
        out[lo:hi] = acc
    return out


def coordinate_objective(sl: CoordinateSlice, z: float) -> float:
    """Value of the coordinate objective at ``z`` (constant term excluded)."""
    return float(_objective_many(sl, np.asarray([z], dtype=np.float64))[0])


def _coordinate_step(
    tables: PairTables, b, coord: int
) -> tuple[float, float, float, int, bool]:
    """One exact line minimization; returns
    (new value, f at old value, f at new value, candidate count, degenerate flag)."""
    sl = coordinate_slice(tables, b, coord)
    if sl.plus_zeros.size == 0 and sl.minus_zeros.size == 0:
        return sl.b_coord, 0.0, 0.0, 0, True
    f_old = float(_objective_many(sl, np.asarray([sl.b_coord]))[0])
    prof = slope_profile(sl)
    cands = candidate_zeros(sl, prof)
    if cands.size == 0:
        return sl.b_coord, f_old, f_old, 0, False
    fv = _objective_many(sl, cands)
    k = int(np.argmin(fv))  # first minimum: ties break to the smallest kink
    return float(cands[k]), f_old, float(fv[k]), int(cands.size), False


def coordinate_update(tables: PairTables, b, coord: int) -> float:
    """Exact minimizer of the distance along one coordinate.

    Evaluates the objective at every candidate kink and returns the best one
    (ties toward the smallest). A coordinate whose column contributes no
    kinks at all is left unchanged.
    """
    return _coordinate_step(tables, b, coord)[0]


def initial_point(data: RegressionData, config: SolverConfig) -> np.ndarray:
    """Starting vector: least squares by default, zeros if rank-deficient."""
    if isinstance(config.init, str):
        if config.init == "zeros":
            return np.zeros(data.p)
        coef, _, rank, _ = np.linalg.lstsq(data.x, data.y, rcond=None)
        if rank < data.p:
            return np.zeros(data.p)
        return coef
    return validate_params(config.init, data.p)


def fit(
    data: RegressionData,
    weights: np.ndarray | None = None,
    config: SolverConfig | None = None,
) -> FitResult:
    """Minimize the distance by cyclic coordinate sweeps.

    Each coordinate update is an exact one-dimensional minimization, so the
    recorded loss trace is nonincreasing. Sweeping stops when no coordinate
    moved more than ``tol_param``, when a full sweep lowered the loss by at
    most ``tol_loss``, or after ``max_sweeps`` (converged flag False then).
    """
    t0 = time.perf_counter()
    if config is None:
        config = SolverConfig()
    w = default_weights(data) if weights is None else validate_weights(data, weights)
    tables = build_pair_tables(data, w)
    b = initial_point(data, config)

    loss_exact = loss(tables, b)
    running = loss_exact
    trace = [loss_exact]
    counts: list[int] = []
    sweep_seconds: list[float] = []
    warned: set[int] = set()
    converged = False
    sweeps = 0

    for sweep in range(1, config.max_sweeps + 1):
        prev = loss_exact
        max_move = 0.0
        for l in range(data.p):
            z_new, f_old, f_new, ncand, degenerate = _coordinate_step(tables, b, l)
            if degenerate and l not in warned:
                warnings.warn(
                    f"coordinate {l}: no usable kinks (column of zeros); skipped",
                    RuntimeWarning,
                    stacklevel=2,
                )
                warned.add(l)
            if f_new <= f_old:
                max_move = max(max_move, abs(z_new - b[l]))
                b[l] = z_new
                running += f_new - f_old
            counts.append(ncand)
            trace.append(running)
        sweeps = sweep
        loss_exact = loss(tables, b)
        running = loss_exact  # resync incremental bookkeeping once per sweep
        sweep_seconds.append(time.perf_counter() - t0)
        if (
            max_move <= config.tol_param
            or (prev - loss_exact) <= config.tol_loss * (1.0 + abs(loss_exact))
        ):
            converged = True
            break

    return FitResult(
        estimate=b.copy(),
        loss=loss_exact,
        sweeps=sweeps,
        converged=converged,
        elapsed=time.perf_counter() - t0,
        loss_trace=np.asarray(trace),
        candidate_counts=np.asarray(counts, dtype=np.int64),
        sweep_seconds=np.asarray(sweep_seconds),
    )
