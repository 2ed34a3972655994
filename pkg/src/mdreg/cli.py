"""Command-line entry point: fit, simulate, verify, and bench subcommands.

Exit codes are script-friendly: 0 success, 1 usage error, 2 data error,
3 solver stopped at the sweep limit, 4 oracle verification failure. Output
is UTF-8 with LF endings; fit prints JSON by default, bench and simulate
write CSV files. The MDE_THREADS environment variable caps internal
parallelism (0 = fully sequential, the default).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bench as bench_mod
from . import oracle
from .distance import build_pair_tables, loss
from .model import (
    DataError,
    RegressionData,
    default_weights,
    load_csv,
    load_weights_csv,
    simulate,
    write_csv,
)
from .solver import SolverConfig, coordinate_update, fit

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_CONVERGENCE = 3
EXIT_VERIFY_FAILED = 4


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit with code 1, not 2."""

    def error(self, message):
        raise _UsageExit(message)


def _threads() -> int:
    raw = os.environ.get("MDE_THREADS", "0")
    try:
        v = int(raw)
    except ValueError:
        raise _UsageExit(f"MDE_THREADS must be an integer, got {raw!r}") from None
    if v < 0:
        raise _UsageExit("MDE_THREADS must be >= 0")
    return v


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.asarray([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError:
        raise _UsageExit(f"expected a comma-separated number list, got {text!r}") from None


def _parse_response(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def build_parser() -> _Parser:
    parser = _Parser(prog="mdreg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="estimate coefficients from a CSV sample")
    p_fit.add_argument("--data", required=True, help="input CSV with a header row")
    p_fit.add_argument("--response", required=True, help="response column name or 0-based index")
    p_fit.add_argument("--weights", help="optional CSV of weights shaped like the design matrix")
    p_fit.add_argument("--init", default="ols", help="ols, zeros, or a comma-separated start vector")
    p_fit.add_argument("--tol-param", type=float, default=1e-8)
    p_fit.add_argument("--tol-loss", type=float, default=1e-10)
    p_fit.add_argument("--max-sweeps", type=int, default=100)
    p_fit.add_argument("--out", choices=("json", "csv"), default="json", help="output format")

    p_sim = sub.add_parser("simulate", help="write a synthetic sample to CSV")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--p", type=int, required=True)
    p_sim.add_argument("--beta", required=True, help="comma-separated true coefficients")
    p_sim.add_argument("--error", choices=("normal", "laplace", "uniform"), default="normal")
    p_sim.add_argument("--sigma", type=float, default=1.0,
                       help="scale parameter (half-width for uniform)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="output CSV path")

    p_ver = sub.add_parser("verify", help="run the oracle equivalence suite")
    p_ver.add_argument("--trials", type=int, default=100)
    p_ver.add_argument("--max-n", type=int, default=15)
    p_ver.add_argument("--max-p", type=int, default=4)
    p_ver.add_argument("--seed", type=int, default=0)

    p_bench = sub.add_parser("bench", help="timing reports (scaling or method comparison)")
    p_bench.add_argument("--mode", choices=("scaling", "compare"), required=True)
    p_bench.add_argument("--n-list", required=True, help="comma-separated ascending sample sizes")
    p_bench.add_argument("--p", type=int, default=4)
    p_bench.add_argument("--repeats", type=int, default=5)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", required=True, help="report CSV path")
    return parser


def _cmd_fit(args) -> int:
    try:
        data = load_csv(args.data, _parse_response(args.response))
        weights = load_weights_csv(args.weights, data) if args.weights else None
        init = args.init if args.init in ("ols", "zeros") else _parse_vector(args.init)
        config = SolverConfig(
            tol_param=args.tol_param,
            tol_loss=args.tol_loss,
            max_sweeps=args.max_sweeps,
            init=init,
        )
        result = fit(data, weights, config)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    if args.out == "json":
        doc = {
            "estimate": [float(v) for v in result.estimate],
            "loss": result.loss,
            "sweeps": result.sweeps,
            "converged": result.converged,
            "elapsed_seconds": result.elapsed,
        }
        print(json.dumps(doc))
    else:
        names = [f"b{k + 1}" for k in range(result.estimate.size)]
        print(",".join([*names, "loss", "sweeps", "converged", "elapsed_seconds"]))
        cells = [repr(float(v)) for v in result.estimate]
        cells += [repr(result.loss), str(result.sweeps), str(result.converged).lower(),
                  repr(result.elapsed)]
        print(",".join(cells))
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _cmd_simulate(args) -> int:
    beta = _parse_vector(args.beta)
    try:
        data = simulate(args.n, args.p, beta, error=args.error, scale=args.sigma, seed=args.seed)
    except DataError as exc:
        raise _UsageExit(str(exc)) from None
    try:
        write_csv(data, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _random_check_instance(seed: int, max_n: int, max_p: int):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_n + 1))
    p = int(rng.integers(1, max_p + 1))
    x = rng.normal(0.0, 1.0, (n, p))
    beta = rng.normal(0.0, 1.0, p)
    y = x @ beta + rng.normal(0.0, 1.0, n)
    if n >= 3 and rng.random() < 0.5:  # exercise tie handling
        x[1] = x[0]
        y[1] = y[0]
    data = RegressionData(x=x, y=y)
    w = data.x if rng.random() < 0.5 else rng.normal(0.0, 1.0, (n, p))
    b = rng.normal(0.0, 1.0, p)
    return data, np.asarray(w), b


def _cmd_verify(args) -> int:
    if args.trials < 1:
        raise _UsageExit("--trials must be >= 1")
    if args.max_n > oracle.BRUTE_FORCE_CAP:
        raise _UsageExit(
            f"--max-n {args.max_n} exceeds the brute-force oracle cap "
            f"({oracle.BRUTE_FORCE_CAP}); refusing to run"
        )
    if args.max_n < 2 or args.max_p < 1:
        raise _UsageExit("need --max-n >= 2 and --max-p >= 1")

    loss_pass = update_pass = 0
    failures = []
    for trial in range(args.trials):
        instance_seed = args.seed + trial
        data, w, b = _random_check_instance(instance_seed, args.max_n, args.max_p)
        tables = build_pair_tables(data, w)

        closed = loss(tables, b)
        integrated = oracle.loss_by_integration(data, w, b)
        if abs(closed - integrated) <= 1e-8 * (1.0 + abs(closed)):
            loss_pass += 1
        else:
            failures.append(("loss-vs-integration", instance_seed))

        ok = True
        for coord in range(data.p):
            z_fast = coordinate_update(tables, b, coord)
            z_brute, _ = oracle.brute_force_coordinate_min(tables, b, coord)
            if z_fast != z_brute:
                ok = False
                break
        if ok:
            update_pass += 1
        else:
            failures.append(("coordinate-vs-brute-force", instance_seed))

    print(f"loss-vs-integration: {loss_pass}/{args.trials} passed")
    print(f"coordinate-vs-brute-force: {update_pass}/{args.trials} passed")
    if failures:
        for name, s in failures:
            print(f"FAIL {name}: replay with --seed {s} --trials 1", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print("all checks passed")
    return EXIT_OK


def _cmd_bench(args) -> int:
    n_list = [int(v) for v in _parse_vector(args.n_list)]
    workers = _threads()
    try:
        if args.mode == "scaling":
            report = bench_mod.scaling_run(
                n_list, p=args.p, repeats=args.repeats, seed=args.seed, workers=workers
            )
        else:
            report = bench_mod.compare_run(
                n_list, p=args.p, repeats=args.repeats, seed=args.seed, workers=workers
            )
    except DataError as exc:
        raise _UsageExit(str(exc)) from None
    try:
        report.to_csv(args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_bench(args)
    except _UsageExit as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
