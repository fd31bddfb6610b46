"""Safeguarded solver variant and the backtracking prox-gradient method.

The safeguarded loop runs the two-metric linesearch with a damping
exponent eta in the acceptance test; whenever the accepted stepsize falls
to or below the threshold tau_th, the trial point is discarded and a
backtracking prox-gradient step is taken instead. With eta = 1 and
tau_th = 0 the trace coincides step for step with the plain solver.
"""

from __future__ import annotations

import time

import numpy as np

from .analysis import active_set_hash, track_identification
from .errors import LinesearchError
from .prox import prox_l1, stationarity_residual
from .solver import (
    CONVERGED,
    MAX_ITERS,
    LINESEARCH_FAILURE,
    NUMERIC_ERROR,
    IterationRecord,
    SolveReport,
    _run_loop,
    _terminal_record,
    descent_noise_floor,
    l1_norm,
)


def prox_grad_step(oracle, x, gamma, sigma, beta, max_backtracks=60,
                   grad=None, psi=None):
    """One backtracking prox-gradient step from ``x``.

    Takes the largest t in {1, beta, beta^2, ...} whose prox-gradient update
    x_next = prox_{t * gamma * ||.||_1}(x - t * grad f(x)) satisfies
    psi(x) - psi(x_next) >= sigma * t * ||(x - x_next) / t||^2. A known
    gradient / objective value at ``x`` can be passed in to avoid
    reevaluation.

    Returns
    -------
    (x_next, t) : (ndarray, float)
    """
    x = np.asarray(x, dtype=float)
    g = oracle.gradient(x) if grad is None else grad
    if psi is None:
        psi = oracle.value(x) + gamma * l1_norm(x)
    t = 1.0
    noise_floor = descent_noise_floor(psi)
    for _ in range(max_backtracks + 1):
        x_next = prox_l1(x - t * g, t, gamma)
        psi_next = oracle.value(x_next) + gamma * l1_norm(x_next)
        step = (x - x_next) / t
        required = sigma * t * float(step @ step)
        drop = psi - psi_next
        # Stagnant backtracked trials are dead ends; the full step stagnates
        # only at an exact fixed point, which is a valid zero-length step.
        moved = t == 1.0 or not np.array_equal(x_next, x)
        if (
            np.isfinite(psi_next)
            and moved
            and (drop >= required or (required <= noise_floor and drop >= 0.0))
        ):
            return x_next, t
        t *= beta
    raise LinesearchError(
        f"prox-gradient backtracking exhausted {max_backtracks} trials"
    )


def solve_safeguarded(oracle, x0, config, keep_iterates=False):
    """Two-metric solver with the damping-exponent test and prox fallback.

    Per iteration the two-metric linesearch runs to completion with mu^eta
    in the acceptance test; if the accepted stepsize t satisfies
    t > config.tau_th the step is kept, otherwise it is discarded in favor
    of one backtracking prox-gradient step (reusing the current gradient).
    The report carries SafeguardStats recording every switch.
    """

    def fallback(orc, x, g, psi):
        return prox_grad_step(
            orc, x, config.gamma, config.sigma, config.beta,
            config.max_backtracks, grad=g, psi=psi,
        )

    return _run_loop(
        oracle, x0, config,
        eta=config.eta,
        fallback_step=fallback,
        keep_iterates=keep_iterates,
    )


def solve_prox_grad(oracle, x0, config, keep_iterates=False):
    """Plain backtracking prox-gradient solver (baseline / cross-check).

    Shares the stopping rule and trace format with the two-metric solvers;
    the Newton-specific trace fields are left empty.
    """
    x = np.asarray(x0, dtype=float).copy()
    gamma = config.gamma
    started = time.perf_counter()
    trace: list[IterationRecord] = []
    iterates = [x.copy()] if keep_iterates else []
    status = MAX_ITERS

    for k in range(config.max_outer + 1):
        f_val, g = oracle.value_and_gradient(x)
        psi = f_val + gamma * l1_norm(x)
        fingerprint = active_set_hash(x)
        if not np.isfinite(psi) or not np.all(np.isfinite(g)):
            trace.append(_terminal_record(k, psi, float("nan"), fingerprint))
            status = NUMERIC_ERROR
            break
        _, res_norm = stationarity_residual(x, g, gamma)
        if res_norm <= config.tol:
            trace.append(_terminal_record(k, psi, res_norm, fingerprint))
            status = CONVERGED
            break
        if k == config.max_outer:
            trace.append(_terminal_record(k, psi, res_norm, fingerprint))
            break
        try:
            x_next, t = prox_grad_step(
                oracle, x, gamma, config.sigma, config.beta,
                config.max_backtracks, grad=g, psi=psi,
            )
        except LinesearchError:
            trace.append(_terminal_record(k, psi, res_norm, fingerprint))
            status = LINESEARCH_FAILURE
            break
        if np.array_equal(x_next, x):
            trace.append(_terminal_record(k, psi, res_norm, fingerprint))
            status = LINESEARCH_FAILURE
            break
        trace.append(
            IterationRecord(
                k=k, psi=psi, residual_norm=res_norm,
                step_size=t, mu=None, free_set_size=None, cg_iters=None,
                active_set_hash=fingerprint,
            )
        )
        x = x_next
        if keep_iterates:
            iterates.append(x.copy())

    return SolveReport(
        x=x,
        status=status,
        trace=trace,
        identification_iter=track_identification(trace),
        wall_time=time.perf_counter() - started,
        iterates=iterates,
    )
