"""Main solver loop: two-metric adaptive projection with backtracking.

Each iteration partitions the coordinates, takes a scaled-gradient step on
the near-zero band and a damped inexact Newton step on the free block,
then backtracks on a composite sufficient-decrease test and applies the
adaptive projection. A solve is single-threaded over iterations;
independent solves may run concurrently on thread-safe oracles.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import active_set_hash, track_identification
from .errors import LinesearchError, ParameterError
from .partition import adaptive_project, compute_partition, shift_vector
from .prox import gradient_map, stationarity_residual
from .subproblem import NewtonSolveStats, compute_damping, solve_newton

logger = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERS = "max_iters"
LINESEARCH_FAILURE = "linesearch_failure"
NUMERIC_ERROR = "numeric_error"


@dataclass(frozen=True)
class SolverConfig:
    """All solver tunables.

    gamma           l1 weight (> 0)
    eps_accuracy    cap on the near-zero band half-width (> 0)
    sigma           sufficient-decrease constant in (0,1)
    beta            backtracking shrink factor in (0,1)
    tau             Newton-system inexactness constant in (0,1)
    c, delta        damping rule mu = c * ||stacked residual||^delta,
                    delta in (0,1)
    eta             damping exponent in the safeguarded acceptance test,
                    in (0,1]; the plain solver always behaves as eta = 1
    tau_th          stepsize threshold in [0,1) below which the safeguarded
                    solver discards the trial and takes a prox-gradient step
    tol             stationarity-residual stopping tolerance (> 0)
    max_outer       iteration cap
    max_backtracks  linesearch cap; exhaustion is a hard failure
    max_cg          CG cap per Newton solve; None means min(|free|, 100)
    """

    gamma: float
    eps_accuracy: float = 1e-2
    sigma: float = 1e-4
    beta: float = 0.5
    tau: float = 0.1
    c: float = 1e-4
    delta: float = 0.5
    eta: float = 0.5
    tau_th: float = 1e-4
    tol: float = 1e-6
    max_outer: int = 1000
    max_backtracks: int = 60
    max_cg: int | None = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if self.eps_accuracy <= 0:
            raise ParameterError(f"eps_accuracy must be positive, got {self.eps_accuracy}")
        for name in ("sigma", "beta", "tau", "delta"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ParameterError(f"{name} must lie in (0,1), got {value}")
        if self.c <= 0:
            raise ParameterError(f"c must be positive, got {self.c}")
        if not 0.0 < self.eta <= 1.0:
            raise ParameterError(f"eta must lie in (0,1], got {self.eta}")
        if not 0.0 <= self.tau_th < 1.0:
            raise ParameterError(f"tau_th must lie in [0,1), got {self.tau_th}")
        if self.tol <= 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_outer < 0 or self.max_backtracks < 0:
            raise ParameterError("iteration caps must be nonnegative")
        if self.max_cg is not None and self.max_cg < 1:
            raise ParameterError(f"max_cg must be at least 1, got {self.max_cg}")


@dataclass(frozen=True)
class IterationRecord:
    """One trace row per visited iterate.

    Step fields (``step_size`` .. ``backtracks``) describe the step taken
    FROM this iterate and are None on the terminal row, where no step was
    taken. ``step_size`` lies in (0, 1] when present.
    """

    k: int
    psi: float
    residual_norm: float
    step_size: float | None
    mu: float | None
    free_set_size: int | None
    cg_iters: int | None
    active_set_hash: str
    used_safeguard: bool = False
    backtracks: int | None = None


@dataclass(frozen=True)
class SafeguardStats:
    """How often the safeguarded solver fell back to prox-gradient steps."""

    switch_count: int
    switch_iterations: tuple


@dataclass
class SolveReport:
    """Final iterate plus the full per-iteration trace."""

    x: np.ndarray
    status: str
    trace: list[IterationRecord]
    identification_iter: int | None
    wall_time: float
    iterates: list = field(default_factory=list)
    safeguard: SafeguardStats | None = None

    @property
    def iterations(self):
        """Number of steps taken (trace rows minus the terminal row)."""
        return len(self.trace) - 1

    @property
    def final_residual(self):
        return self.trace[-1].residual_norm

    @property
    def final_psi(self):
        return self.trace[-1].psi


def l1_norm(x):
    """||x||_1 accumulated in extended precision.

    The linesearch compares objective values whose true differences can sit
    near one ulp; plain pairwise summation noise would drown them.
    """
    return float(np.sum(np.abs(x), dtype=np.longdouble))


def objective_value(oracle, x, gamma):
    """Composite objective f(x) + gamma * ||x||_1."""
    return oracle.value(x) + gamma * l1_norm(x)


def build_step(x, g, part, p_bar):
    """Assemble the full-length step: gradient on the active band (the
    shift is zero there), Newton step on the free set."""
    p = np.empty_like(np.asarray(x, dtype=float))
    p[part.active] = np.asarray(g, dtype=float)[part.active]
    p[part.free] = p_bar
    return p


def trial_point(x, p, t, part, gamma):
    """Candidate iterate at stepsize t: adaptive projection of x - t*p."""
    return adaptive_project(np.asarray(x, dtype=float) - t * p, part, t, gamma)


def _required_decrease(t, mu, p_bar_norm, gmap_norm, sigma, tau, eta):
    # eta == 1 is special-cased so the plain test carries no extra rounding
    mu_eff = mu if eta == 1.0 else mu**eta
    return sigma * t * (1.0 - tau) * mu_eff * p_bar_norm**2 + sigma * t * gmap_norm**2


def acceptance_test(psi_x, psi_trial, t, mu, p_bar_norm, gmap_norm, sigma, tau, eta):
    """Composite sufficient-decrease test for the backtracking linesearch.

    Accepts (non-strictly) when the objective drop covers the damped Newton
    decrease sigma*t*(1-tau)*mu^eta*||p_bar||^2 plus the prox-gradient
    decrease sigma*t*||G_t||^2. Exact floating-point comparison; the solver
    loop layers its rounding floor on top of this kernel.
    """
    required = _required_decrease(t, mu, p_bar_norm, gmap_norm, sigma, tau, eta)
    return psi_x - psi_trial >= required


# Objective drops below this relative scale are indistinguishable from
# evaluation roundoff in double precision; when the REQUIRED decrease is
# that small, the loop accepts any exactly non-increasing trial instead of
# backtracking against noise.
_NOISE_FLOOR_REL = 1e-12


def descent_noise_floor(psi):
    """Smallest objective drop certifiable against roundoff near ``psi``."""
    return _NOISE_FLOOR_REL * max(1.0, abs(psi))


def _terminal_record(k, psi, res_norm, fingerprint):
    return IterationRecord(
        k=k,
        psi=psi,
        residual_norm=res_norm,
        step_size=None,
        mu=None,
        free_set_size=None,
        cg_iters=None,
        active_set_hash=fingerprint,
    )


def _run_loop(oracle, x0, config, *, eta, fallback_step=None, keep_iterates=False):
    """Shared iteration loop for the plain and safeguarded variants.

    ``fallback_step``, when given, is called as fallback_step(oracle, x, g,
    psi) -> (x_next, t) whenever the accepted stepsize drops to or below
    config.tau_th; the computed trial point is then discarded.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.ndim != 1 or x.size != oracle.n:
        raise ParameterError(
            f"x0 must be a vector of length {oracle.n}, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ParameterError("x0 must be finite")

    gamma = config.gamma
    started = time.perf_counter()
    trace: list[IterationRecord] = []
    iterates = [x.copy()] if keep_iterates else []
    switch_iterations: list[int] = []
    status = MAX_ITERS

    for k in range(config.max_outer + 1):
        f_val, g = oracle.value_and_gradient(x)
        psi = f_val + gamma * l1_norm(x)
        fingerprint = active_set_hash(x)
        if not np.isfinite(psi) or not np.all(np.isfinite(g)):
            trace.append(_terminal_record(k, psi, float("nan"), fingerprint))
            status = NUMERIC_ERROR
            break
        res_vec, res_norm = stationarity_residual(x, g, gamma)
        if res_norm <= config.tol:
            trace.append(_terminal_record(k, psi, res_norm, fingerprint))
            status = CONVERGED
            break
        if k == config.max_outer:
            trace.append(_terminal_record(k, psi, res_norm, fingerprint))
            status = MAX_ITERS
            break

        part = compute_partition(
            x, g, config.eps_accuracy, gamma, residual=(res_vec, res_norm)
        )
        free = part.free
        shift = shift_vector(part, gamma, part.n)
        rhs = (g + shift)[free]
        mu = compute_damping(res_vec[part.active], rhs, config.c, config.delta)

        if free.size == 0 or not np.any(rhs):
            p_bar = np.zeros(free.size)
            stats = NewtonSolveStats(0, 0.0, mu, "zero_rhs")
        else:
            max_cg = min(free.size, config.max_cg if config.max_cg else 100)
            p_bar, stats = solve_newton(oracle, x, free, rhs, mu, config.tau, max_cg)

        p = build_step(x, g, part, p_bar)
        p_bar_norm = float(np.linalg.norm(p_bar))
        x_active = x[part.active]
        g_active = g[part.active]

        t = 1.0
        accepted = False
        backtracks = 0
        trial = x
        noise_floor = descent_noise_floor(psi)
        for backtracks in range(config.max_backtracks + 1):
            trial = trial_point(x, p, t, part, gamma)
            psi_trial = objective_value(oracle, trial, gamma)
            gmap_norm = float(
                np.linalg.norm(gradient_map(x_active, g_active, t, gamma))
            )
            required = _required_decrease(
                t, mu, p_bar_norm, gmap_norm, config.sigma, config.tau, eta
            )
            drop = psi - psi_trial
            # A backtracked trial that did not move the iterate is a dead
            # end (the full-step trial stagnates only at exact stationarity,
            # which the residual check catches first).
            moved = t == 1.0 or not np.array_equal(trial, x)
            if (
                np.isfinite(psi_trial)
                and moved
                and (drop >= required or (required <= noise_floor and drop >= 0.0))
            ):
                accepted = True
                break
            t *= config.beta

        if not accepted:
            logger.error(
                "linesearch exhausted %d backtracks at iteration %d "
                "(residual %.3e); giving up", config.max_backtracks, k, res_norm,
            )
            trace.append(
                IterationRecord(
                    k=k, psi=psi, residual_norm=res_norm,
                    step_size=None, mu=mu, free_set_size=int(free.size),
                    cg_iters=stats.cg_iterations, active_set_hash=fingerprint,
                    backtracks=backtracks,
                )
            )
            status = LINESEARCH_FAILURE
            break

        used_safeguard = False
        if fallback_step is not None and t <= config.tau_th:
            try:
                x_next, t_used = fallback_step(oracle, x, g, psi)
            except LinesearchError:
                trace.append(_terminal_record(k, psi, res_norm, fingerprint))
                status = LINESEARCH_FAILURE
                break
            used_safeguard = True
            switch_iterations.append(k)
        else:
            x_next, t_used = trial, t

        if np.array_equal(x_next, x):
            # Bitwise stagnation: repeating the (deterministic) iteration
            # cannot make further progress in this arithmetic.
            logger.warning(
                "iterate stagnated at residual %.3e (floating-point floor)",
                res_norm,
            )
            trace.append(_terminal_record(k, psi, res_norm, fingerprint))
            status = LINESEARCH_FAILURE
            break

        trace.append(
            IterationRecord(
                k=k, psi=psi, residual_norm=res_norm,
                step_size=t_used, mu=mu, free_set_size=int(free.size),
                cg_iters=stats.cg_iterations, active_set_hash=fingerprint,
                used_safeguard=used_safeguard, backtracks=backtracks,
            )
        )
        x = x_next
        if keep_iterates:
            iterates.append(x.copy())

    report = SolveReport(
        x=x,
        status=status,
        trace=trace,
        identification_iter=track_identification(trace),
        wall_time=time.perf_counter() - started,
        iterates=iterates,
    )
    if fallback_step is not None:
        report.safeguard = SafeguardStats(
            switch_count=len(switch_iterations),
            switch_iterations=tuple(switch_iterations),
        )
    return report


def solve(oracle, x0, config, keep_iterates=False):
    """Run the plain two-metric adaptive projection solver.

    Iterates until the stationarity residual drops to ``config.tol``, the
    iteration cap is reached, or the linesearch fails. The objective is
    non-increasing along accepted steps by construction of the acceptance
    test. ``keep_iterates=True`` additionally records every iterate (for
    convergence-order analysis).
    """
    return _run_loop(oracle, x0, config, eta=1.0, keep_iterates=keep_iterates)
