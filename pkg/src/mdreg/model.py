"""Domain types, validation, CSV ingestion, and synthetic data generation.

The regression sample is an (n, p) design matrix plus an n-vector of
responses. Weight matrices and parameter vectors are plain float64
ndarrays validated at the library boundary; all stored arrays are
read-only copies, so every object in this module can be shared freely
across threads after construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed input files or ill-shaped user data."""


_ERROR_DISTS = ("normal", "laplace", "uniform")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, order="C", copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class RegressionData:
    """Observed sample: design matrix ``x`` (n, p) and responses ``y`` (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if x.ndim != 2:
            raise DataError("design matrix must be 2-dimensional")
        n, p = x.shape
        if n < 1 or p < 1:
            raise DataError("need n >= 1 rows and p >= 1 columns")
        if y.shape[0] != n:
            raise DataError(f"row mismatch: x has {n} rows, y has {y.shape[0]}")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise DataError("data contains non-finite entries")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "y", _readonly(y))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a solver run.

    ``loss_trace`` holds the loss value before the first update followed by
    the value after every coordinate update; ``candidate_counts`` holds the
    number of candidate zeros examined at each update, in the same order;
    ``sweep_seconds`` holds cumulative wall time at the end of each sweep.
    """

    estimate: np.ndarray
    loss: float
    sweeps: int
    converged: bool
    elapsed: float
    loss_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    candidate_counts: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    sweep_seconds: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def mean_candidates(self) -> float:
        if self.candidate_counts.size == 0:
            return float("nan")
        return float(np.mean(self.candidate_counts))


def validate_weights(data: RegressionData, weights: np.ndarray) -> np.ndarray:
    """Check a user weight matrix against ``data`` and return a read-only copy."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (data.n, data.p):
        raise DataError(
            f"weight matrix shape {w.shape} does not match data shape {(data.n, data.p)}"
        )
    if not np.all(np.isfinite(w)):
        raise DataError("weight matrix contains non-finite entries")
    return _readonly(w)


def validate_params(b, p: int) -> np.ndarray:
    """Check a parameter vector of length ``p`` and return a float64 copy."""
    v = np.asarray(b, dtype=np.float64).reshape(-1)
    if v.shape[0] != p:
        raise DataError(f"parameter vector has length {v.shape[0]}, expected {p}")
    if not np.all(np.isfinite(v)):
        raise DataError("parameter vector contains non-finite entries")
    return v.copy()


def default_weights(data: RegressionData) -> np.ndarray:
    """Default weight matrix: the design matrix itself (d_ik = x_ik)."""
    return _readonly(data.x)


def load_csv(path, response_column) -> RegressionData:
    """Read a headed numeric CSV into RegressionData.

    ``response_column`` is a header name or a 0-based column index; all
    remaining columns become covariates in file order. Errors name the
    offending 1-based data row and the column.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty file: {path}") from None
        header = [h.strip() for h in header]
        if isinstance(response_column, int):
            if not 0 <= response_column < len(header):
                raise DataError(
                    f"response column index {response_column} out of range "
                    f"for {len(header)} columns"
                )
            resp_idx = response_column
        else:
            if response_column not in header:
                raise DataError(f"response column {response_column!r} not in header {header}")
            resp_idx = header.index(response_column)
        if len(header) < 2:
            raise DataError("need at least one covariate column besides the response")

        rows: list[list[float]] = []
        for lineno, cells in enumerate(reader, start=1):
            if not cells:
                continue
            if len(cells) != len(header):
                raise DataError(f"row {lineno}: expected {len(header)} cells, got {len(cells)}")
            parsed = []
            for j, cell in enumerate(cells):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"non-numeric cell {cell!r} at row {lineno}, column {header[j]!r}"
                    ) from None
                if not np.isfinite(v):
                    raise DataError(
                        f"non-finite cell {cell!r} at row {lineno}, column {header[j]!r}"
                    )
                parsed.append(v)
            rows.append(parsed)

    if not rows:
        raise DataError(f"no data rows in {path}")
    table = np.asarray(rows, dtype=np.float64)
    y = table[:, resp_idx]
    x = np.delete(table, resp_idx, axis=1)
    return RegressionData(x=x, y=y)


def write_csv(data: RegressionData, path, feature_names=None, response_name: str = "y") -> None:
    """Write data as a headed CSV with full float round-trip precision."""
    if feature_names is None:
        feature_names = [f"x{k + 1}" for k in range(data.p)]
    if len(feature_names) != data.p:
        raise DataError(f"expected {data.p} feature names, got {len(feature_names)}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*feature_names, response_name])
        for i in range(data.n):
            writer.writerow([repr(v) for v in data.x[i]] + [repr(float(data.y[i]))])


def load_weights_csv(path, data: RegressionData) -> np.ndarray:
    """Read a headed numeric CSV of weights shaped like the design matrix."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty file: {path}") from None
        rows = []
        for lineno, cells in enumerate(reader, start=1):
            if not cells:
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                raise DataError(f"non-numeric weight cell at row {lineno}") from None
    w = np.asarray(rows, dtype=np.float64)
    if w.ndim != 2 or w.shape != (data.n, data.p):
        raise DataError(
            f"weight file shape {w.shape if w.ndim == 2 else w.shape} "
            f"does not match data shape {(data.n, data.p)}"
        )
    return validate_weights(data, w)


def simulate(
    n: int,
    p: int,
    beta,
    error: str = "normal",
    scale: float = 1.0,
    seed: int = 0,
) -> RegressionData:
    """Draw a synthetic sample y_i = x_i'beta + eps_i.

    Covariates are i.i.d. standard normal. Only zero-symmetric error
    distributions are offered: ``normal`` and ``laplace`` take ``scale``
    as their scale parameter, ``uniform`` draws from (-scale, scale).
    Output is deterministic given ``seed``.
    """
    if n < 1 or p < 1:
        raise DataError("need n >= 1 and p >= 1")
    if error not in _ERROR_DISTS:
        raise DataError(f"unknown error distribution {error!r}; choose from {_ERROR_DISTS}")
    if not np.isfinite(scale) or scale < 0:
        raise DataError("scale must be finite and nonnegative")
    b = validate_params(beta, p)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    if error == "normal":
        eps = rng.normal(0.0, scale, n) if scale > 0 else np.zeros(n)
    elif error == "laplace":
        eps = rng.laplace(0.0, scale, n) if scale > 0 else np.zeros(n)
    else:
        eps = rng.uniform(-scale, scale, n) if scale > 0 else np.zeros(n)
    y = x @ b + eps
    return RegressionData(x=x, y=y)
