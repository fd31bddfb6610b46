"""Benchmark CLI: load or generate a problem, run a solver, write the trace.

Exit codes: 0 converged, 1 iteration cap reached, 2 data/parse error,
3 usage or parameter error, 4 numeric error, 5 linesearch failure.
The ``TMAP_DATA_DIR`` environment variable prefixes relative --data paths.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError, ParseError
from .io import load_instance, parse_libsvm, write_trace
from .problems import LassoOracle, LogisticOracle, generate_lasso_instance
from .safeguard import solve_prox_grad, solve_safeguarded
from .solver import (
    CONVERGED,
    LINESEARCH_FAILURE,
    MAX_ITERS,
    NUMERIC_ERROR,
    SolverConfig,
    solve,
)

PROBLEMS = ("logistic", "lasso", "synthetic_lasso")
SOLVERS = ("tmap", "tmap_safe", "prox_grad")

EXIT_OK = 0
EXIT_MAX_ITERS = 1
EXIT_DATA_ERROR = 2
EXIT_USAGE = 3
EXIT_NUMERIC = 4
EXIT_LINESEARCH = 5

_STATUS_EXIT = {
    CONVERGED: EXIT_OK,
    MAX_ITERS: EXIT_MAX_ITERS,
    NUMERIC_ERROR: EXIT_NUMERIC,
    LINESEARCH_FAILURE: EXIT_LINESEARCH,
}


@dataclass
class RunSpec:
    """One benchmark run: problem source, solver choice, and tunables.

    ``gamma=None`` picks the problem default (1/m for logistic, 0.01 for
    the LASSO problems). Generator fields are used only when
    ``problem="synthetic_lasso"``.
    """

    problem: str
    solver: str = "tmap"
    data: str | None = None
    out: str | None = None
    gamma: float | None = None
    seed: int = 0
    n: int = 1024
    m: int = 256
    k: int = 25
    dynamic_range_db: float = 20.0
    noise_sigma: float = 0.1
    tol: float = 1e-6
    eps: float = 1e-2
    sigma: float = 1e-4
    beta: float = 0.5
    tau: float = 0.1
    c: float = 1e-4
    delta: float = 0.5
    eta: float = 0.5
    tau_th: float = 1e-4
    max_iters: int = 1000
    max_cg: int | None = None


def _resolve_data_path(path):
    if path is None:
        raise ParameterError("--data is required for file-backed problems")
    base = os.environ.get("TMAP_DATA_DIR")
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    if not os.path.exists(path):
        raise DataError(f"data file not found: {path}")
    return path


def _build_problem(spec):
    """Return (oracle, default_gamma) for the spec's problem."""
    if spec.problem == "logistic":
        matrix, labels = parse_libsvm(_resolve_data_path(spec.data))
        return LogisticOracle(matrix, labels), 1.0 / matrix.shape[0]
    if spec.problem == "lasso":
        op, b, _, _ = load_instance(_resolve_data_path(spec.data))
        return LassoOracle(op, b), 0.01
    if spec.problem == "synthetic_lasso":
        op, b, _ = generate_lasso_instance(
            spec.n, spec.m, spec.k, spec.dynamic_range_db,
            spec.noise_sigma, spec.seed,
        )
        return LassoOracle(op, b), 0.01
    raise ParameterError(f"unknown problem {spec.problem!r}")


def run(spec):
    """Execute one run and return (exit_code, SolveReport).

    Writes the trace CSV when ``spec.out`` is set and prints a one-screen
    summary to stdout.
    """
    if spec.solver not in SOLVERS:
        raise ParameterError(f"unknown solver {spec.solver!r}")
    oracle, default_gamma = _build_problem(spec)
    gamma = default_gamma if spec.gamma is None else spec.gamma
    config = SolverConfig(
        gamma=gamma, eps_accuracy=spec.eps, sigma=spec.sigma, beta=spec.beta,
        tau=spec.tau, c=spec.c, delta=spec.delta, eta=spec.eta,
        tau_th=spec.tau_th, tol=spec.tol, max_outer=spec.max_iters,
        max_cg=spec.max_cg,
    )
    x0 = np.zeros(oracle.n)
    runner = {"tmap": solve, "tmap_safe": solve_safeguarded,
              "prox_grad": solve_prox_grad}[spec.solver]
    report = runner(oracle, x0, config)

    if spec.out:
        write_trace(spec.out, report)
    ident = report.identification_iter
    print(
        f"problem={spec.problem} solver={spec.solver} n={oracle.n} "
        f"gamma={gamma:.6g} tol={spec.tol:g}"
    )
    print(
        f"status={report.status} iterations={report.iterations} "
        f"residual={report.final_residual:.3e} psi={report.final_psi:.12g}"
    )
    print(
        f"identification_iter={'none' if ident is None else ident} "
        f"wall_time={report.wall_time:.3f}s"
        + (
            f" switch_count={report.safeguard.switch_count}"
            if report.safeguard is not None
            else ""
        )
    )
    if spec.out:
        print(f"trace written to {spec.out}")
    return _STATUS_EXIT[report.status], report


def _make_parser():
    parser = argparse.ArgumentParser(
        prog="tmap",
        description="l1-regularized solver benchmark runner",
    )
    parser.add_argument("--problem", required=True, choices=PROBLEMS)
    parser.add_argument("--data", help="input file (LIBSVM text or instance .npz)")
    parser.add_argument("--solver", default="tmap",
                        choices=("tmap", "tmap-safe", "prox-grad"))
    parser.add_argument("--gamma", type=float, default=None,
                        help="l1 weight; defaults to 1/m (logistic) or 0.01 (lasso)")
    parser.add_argument("--tol", type=float, default=1e-6)
    parser.add_argument("--eps", type=float, default=1e-2,
                        help="near-zero band accuracy level")
    parser.add_argument("--sigma", type=float, default=1e-4)
    parser.add_argument("--beta", type=float, default=0.5)
    parser.add_argument("--tau", type=float, default=0.1)
    parser.add_argument("--c", type=float, default=1e-4)
    parser.add_argument("--delta", type=float, default=0.5)
    parser.add_argument("--eta", type=float, default=0.5)
    parser.add_argument("--tau-th", type=float, default=1e-4)
    parser.add_argument("--max-iters", type=int, default=1000)
    parser.add_argument("--max-cg", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n", type=int, default=1024)
    parser.add_argument("--m", type=int, default=256)
    parser.add_argument("--k", type=int, default=25)
    parser.add_argument("--dynamic-range", type=float, default=20.0,
                        help="dynamic range of generated magnitudes, in dB")
    parser.add_argument("--noise-sigma", type=float, default=0.1)
    parser.add_argument("--out", help="trace CSV output path")
    return parser


def main(argv=None):
    args = _make_parser().parse_args(argv)
    spec = RunSpec(
        problem=args.problem,
        solver=args.solver.replace("-", "_"),
        data=args.data,
        out=args.out,
        gamma=args.gamma,
        seed=args.seed,
        n=args.n,
        m=args.m,
        k=args.k,
        dynamic_range_db=args.dynamic_range,
        noise_sigma=args.noise_sigma,
        tol=args.tol,
        eps=args.eps,
        sigma=args.sigma,
        beta=args.beta,
        tau=args.tau,
        c=args.c,
        delta=args.delta,
        eta=args.eta,
        tau_th=args.tau_th,
        max_iters=args.max_iters,
        max_cg=args.max_cg,
    )
    try:
        code, _ = run(spec)
    except (ParseError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
