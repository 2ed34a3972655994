"""Closed-form evaluation of the L2 distance for the identity integration measure.

For weights d and parameter b the distance is

    L(b) = sum_ij dstar_ij * ( |y_ij+ - b'x_ij+| - |y_ij- - b'x_ij-| ),

with dstar_ij = sum_k d_ik d_jk, y_ij+- = y_i +- y_j, x_ij+- = x_i +- x_j.
Building the tables and one evaluation both cost O(n^2 p) time; the full
n x n tables are stored (memory O(n^2 p) is the capacity limit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import DataError, RegressionData, validate_params, validate_weights


@dataclass(frozen=True, eq=False)
class PairTables:
    """Precomputed pair sums and differences for one (data, weights) pair.

    ``dstar`` is symmetric, ``yminus``/``xminus`` are antisymmetric with a
    zero diagonal, ``yplus``/``xplus`` are symmetric. The source ``x``, ``y``
    and the triangular index caches are retained so coordinate slices can be
    built in O(n^2) without re-deriving pair structure; transpose-duplicate
    pairs (i, j)/(j, i) are represented once with doubled weight.
    """

    dstar: np.ndarray
    yplus: np.ndarray
    yminus: np.ndarray
    xplus: np.ndarray
    xminus: np.ndarray
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    # Triangular caches: iu/ju include the diagonal (plus family), the strict
    # versions exclude it (minus family, whose diagonal is identically zero).
    iu: np.ndarray = field(repr=False)
    ju: np.ndarray = field(repr=False)
    iu_strict: np.ndarray = field(repr=False)
    ju_strict: np.ndarray = field(repr=False)
    dstar_tri: np.ndarray = field(repr=False)
    dstar_tri_strict: np.ndarray = field(repr=False)
    # Per-coordinate slice statics (column pair sums, weights, pair indices);
    # populated lazily by the solver, immutable once written.
    coord_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.dstar.shape[0]

    @property
    def p(self) -> int:
        return self.xplus.shape[2]


def build_pair_tables(data: RegressionData, weights: np.ndarray) -> PairTables:
    """Assemble the pair tables in O(n^2 p) time."""
    d = validate_weights(data, weights)
    x, y = data.x, data.y
    n = data.n

    dstar = d @ d.T
    yplus = y[:, None] + y[None, :]
    yminus = y[:, None] - y[None, :]
    xplus = x[:, None, :] + x[None, :, :]
    xminus = x[:, None, :] - x[None, :, :]

    iu, ju = np.triu_indices(n)
    ius, jus = np.triu_indices(n, k=1)
    # Off-diagonal terms stand for both (i, j) and (j, i): double the weight.
    fac = np.where(iu < ju, 2.0, 1.0)
    dstar_tri = fac * dstar[iu, ju]
    dstar_tri_strict = 2.0 * dstar[ius, jus]

    for a in (dstar, yplus, yminus, xplus, xminus, dstar_tri, dstar_tri_strict):
        a.flags.writeable = False
    return PairTables(
        dstar=dstar,
        yplus=yplus,
        yminus=yminus,
        xplus=xplus,
        xminus=xminus,
        x=x,
        y=y,
        iu=iu,
        ju=ju,
        iu_strict=ius,
        ju_strict=jus,
        dstar_tri=dstar_tri,
        dstar_tri_strict=dstar_tri_strict,
    )


def loss(tables: PairTables, b) -> float:
    """Evaluate the distance at ``b`` from the closed form, O(n^2 p).

    The two pair sums are accumulated in a fixed row-major order, so repeat
    evaluations are bit-identical.
    """
    bv = validate_params(b, tables.p)
    tplus = np.tensordot(tables.xplus, bv, axes=([2], [0]))
    tminus = np.tensordot(tables.xminus, bv, axes=([2], [0]))
    np.abs(tables.yplus - tplus, out=tplus)
    np.abs(tables.yminus - tminus, out=tminus)
    tplus -= tminus
    tplus *= tables.dstar
    return float(np.sum(tplus))


def residuals(tables: PairTables, b) -> np.ndarray:
    """Residual vector y - x b for the sample behind ``tables``."""
    bv = validate_params(b, tables.p)
    return tables.y - tables.x @ bv


def check_tables(tables: PairTables, atol: float = 0.0) -> None:
    """Assert the structural symmetries of the tables (test helper)."""
    if not np.allclose(tables.dstar, tables.dstar.T, atol=atol, rtol=0):
        raise DataError("dstar is not symmetric")
    if not np.allclose(tables.yminus, -tables.yminus.T, atol=atol, rtol=0):
        raise DataError("yminus is not antisymmetric")
    if np.any(np.diag(tables.yminus) != 0) or np.any(
        tables.xminus[np.arange(tables.n), np.arange(tables.n), :] != 0
    ):
        raise DataError("minus-table diagonal is not exactly zero")
    if not np.allclose(tables.yplus, tables.yplus.T, atol=atol, rtol=0):
        raise DataError("yplus is not symmetric")
    if not np.allclose(tables.xplus, np.swapaxes(tables.xplus, 0, 1), atol=atol, rtol=0):
        raise DataError("xplus is not symmetric")
