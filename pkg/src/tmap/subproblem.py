"""Damped Newton subproblem on the free block, solved by truncated CG.

The system (H + mu I) p = rhs is solved matrix-free with Hessian-vector
products restricted to the free index set; the sub-Hessian is never
materialized. CG stops as soon as the running residual satisfies the
inexactness rule ||r|| <= tau * min(mu * ||p||, ||rhs||), which is safe to
test against the running iterate because ||p_j|| grows monotonically in CG.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError, ParameterError

logger = logging.getLogger(__name__)

# Relative slack so exact-arithmetic inequalities are not spuriously flagged
# under roundoff.
_FLOAT_SLACK = 1e-10


@dataclass(frozen=True)
class NewtonSolveStats:
    """Outcome of one damped-Newton CG solve.

    ``stop_reason`` is one of "tolerance_met", "max_iters", "zero_rhs".
    ``negative_curvature`` flags that the sub-Hessian acted indefinitely on
    the Krylov directions and the step was replaced by the zero-curvature
    fallback rhs / mu (an always-admissible positive semidefinite model).
    """

    cg_iterations: int
    final_residual_norm: float
    mu: float
    stop_reason: str
    negative_curvature: bool = False


def compute_damping(residual_active, shifted_grad_free, c, delta):
    """Damping weight c * ||stacked residual||^delta for the Newton system.

    ``residual_active`` is the prox-gradient residual restricted to the
    active band; ``shifted_grad_free`` is the shifted gradient restricted to
    the free set. The result is zero only at exact stationarity.
    """
    if c <= 0:
        raise ParameterError(f"c must be positive, got {c}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0,1), got {delta}")
    stacked = float(
        np.hypot(np.linalg.norm(residual_active), np.linalg.norm(shifted_grad_free))
    )
    return c * stacked**delta


def masked_hessvec(oracle, x, free, v_bar):
    """Sub-Hessian product [H v]_free with v_bar scattered into the free slots.

    Equivalent to forming the principal submatrix of the Hessian on ``free``
    and multiplying, but uses a single full Hessian-vector product instead.
    """
    free = np.asarray(free)
    v_bar = np.asarray(v_bar, dtype=float)
    if v_bar.size != free.size:
        raise DimensionError(
            f"v_bar has length {v_bar.size}, free set has {free.size} indices"
        )
    return _restricted_operator(oracle, x, free)(v_bar)


def _restricted_operator(oracle, x, free):
    """Return v_bar -> [H(x) embed(v_bar)]_free using one cached operator."""
    hvp = oracle.hessian_operator(x)
    n = oracle.n

    def apply(v_bar):
        v = np.zeros(n)
        v[free] = v_bar
        return hvp(v)[free]

    return apply


def solve_newton(oracle, x, free, rhs, mu, tau, max_cg):
    """Solve (H + mu I) p = rhs inexactly on the free set by truncated CG.

    Terminates once the residual satisfies the inexactness rule; if the
    iteration cap is hit first, the best iterate is returned with
    ``stop_reason="max_iters"`` and a warning (callers decide the fallback).
    A zero right-hand side short-circuits to the zero step.

    Every returned step is guaranteed to satisfy the descent pairing
    rhs . p >= (1 - tau) * mu * ||p||^2 and the norm bound
    ||p|| <= ||rhs|| / ((1 - tau) * mu): when curvature information breaks
    them (possible only for indefinite Hessians, or a severely truncated
    solve), the step falls back to rhs / mu.

    Returns
    -------
    (p_bar, stats) : (ndarray over free, NewtonSolveStats)
    """
    rhs = np.asarray(rhs, dtype=float)
    free = np.asarray(free)
    if rhs.size != free.size:
        raise DimensionError(
            f"rhs has length {rhs.size}, free set has {free.size} indices"
        )
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        stats = NewtonSolveStats(0, 0.0, mu, "zero_rhs")
        return np.zeros(rhs.size), stats
    if mu <= 0:
        raise ParameterError(f"mu must be positive when rhs is nonzero, got {mu}")
    if not 0.0 < tau < 1.0:
        raise ParameterError(f"tau must lie in (0,1), got {tau}")
    if max_cg < 1:
        raise ParameterError(f"max_cg must be at least 1, got {max_cg}")

    hv = _restricted_operator(oracle, x, free)

    def operator(v):
        return hv(v) + mu * v

    p = np.zeros(rhs.size)
    resid = rhs.copy()
    direction = rhs.copy()
    rs_old = rhs_norm**2
    stop_reason = "max_iters"
    resid_norm = rhs_norm
    negative_curvature = False
    iterations = 0
    for iterations in range(1, max_cg + 1):
        op_d = operator(direction)
        if not np.all(np.isfinite(op_d)):
            raise NumericError("non-finite Hessian-vector product in CG")
        curvature = float(direction @ op_d)
        if curvature <= 0.0:
            # Indefinite sub-Hessian: abandon the Krylov path.
            negative_curvature = True
            iterations -= 1
            break
        alpha = rs_old / curvature
        p += alpha * direction
        resid -= alpha * op_d
        rs_new = float(resid @ resid)
        resid_norm = np.sqrt(rs_new)
        if resid_norm <= tau * min(mu * float(np.linalg.norm(p)), rhs_norm):
            stop_reason = "tolerance_met"
            break
        direction = resid + (rs_new / rs_old) * direction
        rs_old = rs_new

    p_norm = float(np.linalg.norm(p))
    pairing = float(rhs @ p)
    if stop_reason == "max_iters":
        # Truncated exits only guarantee rhs.p >= mu*||p||^2 / 2 for PSD
        # Hessians; demand a quarter of that so indefinite garbage is caught
        # without discarding legitimate truncated steps.
        usable = pairing >= 0.25 * mu * p_norm**2
    else:
        pairing_ok = pairing >= (1.0 - tau) * mu * p_norm**2 * (1.0 - _FLOAT_SLACK)
        bound_ok = p_norm <= rhs_norm / ((1.0 - tau) * mu) * (1.0 + _FLOAT_SLACK)
        usable = pairing_ok and bound_ok
    if negative_curvature or not usable:
        p = rhs / mu
        negative_curvature = True
        stop_reason = "tolerance_met"
        resid_norm = 0.0  # exact solve of the fallback (H = 0) system
    elif stop_reason == "max_iters":
        logger.warning(
            "CG hit the iteration cap (%d) with residual %.3e > tolerance; "
            "proceeding with the best iterate",
            max_cg,
            resid_norm,
        )

    stats = NewtonSolveStats(
        cg_iterations=iterations,
        final_residual_norm=float(resid_norm),
        mu=mu,
        stop_reason=stop_reason,
        negative_curvature=negative_curvature,
    )
    return p, stats
