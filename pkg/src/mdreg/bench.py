"""Timing harness: sample-size scaling study and a derivative-free baseline.

The coordinate solver's per-sweep cost is quadratic in n and linear in p;
``scaling_run`` measures that shape on fresh synthetic instances, and
``compare_run`` races the solver against Nelder-Mead on identical instances.
Absolute seconds are machine-bound, so downstream checks should only consume
ratios and orderings. Candidate-set sizes are recorded alongside every
timing because the candidate count has no closed form; the empirical log is
the substitute.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .distance import build_pair_tables, loss
from .model import DataError, FitResult, RegressionData, default_weights, simulate, validate_weights
from .solver import SolverConfig, fit, initial_point

CSV_HEADER = [
    "n",
    "p",
    "repeats",
    "method",
    "mean_seconds",
    "mean_sweeps",
    "mean_candidates",
    "final_loss",
]


@dataclass(frozen=True)
class BenchRow:
    n: int
    p: int
    repeats: int
    method: str
    mean_seconds: float
    mean_sweeps: float
    mean_candidates: float
    final_loss: float


@dataclass(frozen=True)
class InstanceRecord:
    """Raw per-instance timings backing one aggregated report row pair."""

    n: int
    rep: int
    method: str
    seconds: float
    sweeps: float
    candidates: float
    final_loss: float


@dataclass(frozen=True, eq=False)
class BenchReport:
    rows: list[BenchRow]
    instances: list[InstanceRecord] = field(default_factory=list)

    def time_over(self, k: int, method: str = "coordinate") -> np.ndarray:
        """Derived column time / n^k, recomputed from mean_seconds."""
        sel = [r for r in self.rows if r.method == method]
        return np.array([r.mean_seconds / r.n**k for r in sel])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in self.rows:
                writer.writerow(
                    [
                        r.n,
                        r.p,
                        r.repeats,
                        r.method,
                        repr(r.mean_seconds),
                        repr(r.mean_sweeps),
                        repr(r.mean_candidates),
                        repr(r.final_loss),
                    ]
                )


def _instance_seeds(seed: int, count: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(2 * count).reshape(count, 2)


def _make_instance(p: int, n: int, seeds) -> tuple[RegressionData, np.ndarray]:
    beta = np.random.default_rng(int(seeds[1])).normal(0.0, 1.0, p)
    data = simulate(n, p, beta, error="normal", scale=1.0, seed=int(seeds[0]))
    return data, default_weights(data)


def _check_run_args(n_list, repeats: int) -> list[int]:
    ns = [int(v) for v in n_list]
    if not ns:
        raise DataError("n_list is empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DataError("n_list must be strictly ascending")
    if repeats < 3:
        raise DataError("repeats must be >= 3 for stable means")
    return ns


def nelder_mead_fit(
    data: RegressionData,
    weights: np.ndarray | None = None,
    init="ols",
    max_evals: int | None = None,
) -> FitResult:
    """Simplex baseline over the exact distance; comparison use only.

    Runs scipy's Nelder-Mead with tight tolerances until ``max_evals``
    function evaluations (default 500 p). With ``max_evals=0`` the start
    point is returned untouched. No optimality claim is attached: the
    distance is nonsmooth and the simplex may stall on a kink.
    """
    t0 = time.perf_counter()
    w = default_weights(data) if weights is None else validate_weights(data, weights)
    tables = build_pair_tables(data, w)
    if isinstance(init, str):
        b0 = initial_point(data, SolverConfig(init=init))
    else:
        b0 = np.asarray(init, dtype=np.float64).reshape(-1)
    if max_evals is None:
        max_evals = 500 * data.p
    if max_evals < 0:
        raise DataError("max_evals must be >= 0")
    if max_evals == 0:
        return FitResult(
            estimate=b0.copy(),
            loss=loss(tables, b0),
            sweeps=0,
            converged=False,
            elapsed=time.perf_counter() - t0,
        )
    res = scipy_minimize(
        lambda bb: loss(tables, bb),
        b0,
        method="Nelder-Mead",
        options={"maxfev": max_evals, "xatol": 1e-8, "fatol": 1e-8},
    )
    return FitResult(
        estimate=np.asarray(res.x, dtype=np.float64),
        loss=float(res.fun),
        sweeps=int(res.nit),
        converged=bool(res.success),
        elapsed=time.perf_counter() - t0,
    )


def _run_instances(tasks, worker, workers: int):
    """Run instance tasks sequentially (default) or across a thread pool.

    Reduction order is fixed by task order either way, so reports do not
    depend on the worker count; timing happens inside each task, never
    around the pool.
    """
    if workers <= 1:
        return [worker(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks))


def scaling_run(
    n_list,
    p: int = 4,
    repeats: int = 5,
    seed: int = 0,
    workers: int = 0,
) -> BenchReport:
    """Time the coordinate solver across sample sizes on fresh instances."""
    ns = _check_run_args(n_list, repeats)
    seeds = _instance_seeds(seed, len(ns) * repeats)

    def one(task):
        idx, n, rep = task
        data, w = _make_instance(p, n, seeds[idx])
        res = fit(data, w)
        return InstanceRecord(
            n=n,
            rep=rep,
            method="coordinate",
            seconds=res.elapsed,
            sweeps=float(res.sweeps),
            candidates=res.mean_candidates,
            final_loss=res.loss,
        )

    tasks = [(i * repeats + rep, n, rep) for i, n in enumerate(ns) for rep in range(repeats)]
    records = _run_instances(tasks, one, workers)

    rows = []
    for n in ns:
        per_n = [r for r in records if r.n == n]
        rows.append(
            BenchRow(
                n=n,
                p=p,
                repeats=repeats,
                method="coordinate",
                mean_seconds=float(np.mean([r.seconds for r in per_n])),
                mean_sweeps=float(np.mean([r.sweeps for r in per_n])),
                mean_candidates=float(np.mean([r.candidates for r in per_n])),
                final_loss=float(np.mean([r.final_loss for r in per_n])),
            )
        )
    return BenchReport(rows=rows, instances=records)


def compare_run(
    n_list,
    p: int = 4,
    repeats: int = 5,
    seed: int = 0,
    workers: int = 0,
    nm_max_evals: int | None = None,
) -> BenchReport:
    """Race the coordinate solver against Nelder-Mead on identical instances.

    Both methods start from the same least-squares point. Per-instance
    seconds and final losses are kept on the report so speed claims can be
    audited against solution quality.
    """
    ns = _check_run_args(n_list, repeats)
    seeds = _instance_seeds(seed, len(ns) * repeats)

    def one(task):
        idx, n, rep = task
        data, w = _make_instance(p, n, seeds[idx])
        b0 = initial_point(data, SolverConfig())
        cd = fit(data, w, SolverConfig(init=b0))
        nm = nelder_mead_fit(data, w, init=b0, max_evals=nm_max_evals)
        return (
            InstanceRecord(
                n=n,
                rep=rep,
                method="coordinate",
                seconds=cd.elapsed,
                sweeps=float(cd.sweeps),
                candidates=cd.mean_candidates,
                final_loss=cd.loss,
            ),
            InstanceRecord(
                n=n,
                rep=rep,
                method="nelder-mead",
                seconds=nm.elapsed,
                sweeps=float(nm.sweeps),
                candidates=float("nan"),
                final_loss=nm.loss,
            ),
        )

    tasks = [(i * repeats + rep, n, rep) for i, n in enumerate(ns) for rep in range(repeats)]
    paired = _run_instances(tasks, one, workers)
    records = [rec for pair in paired for rec in pair]

    rows = []
    for n in ns:
        for method in ("coordinate", "nelder-mead"):
            per = [r for r in records if r.n == n and r.method == method]
            rows.append(
                BenchRow(
                    n=n,
                    p=p,
                    repeats=repeats,
                    method=method,
                    mean_seconds=float(np.mean([r.seconds for r in per])),
                    mean_sweeps=float(np.mean([r.sweeps for r in per])),
                    mean_candidates=float(np.mean([r.candidates for r in per])),
                    final_loss=float(np.mean([r.final_loss for r in per])),
                )
            )
    return BenchReport(rows=rows, instances=records)
