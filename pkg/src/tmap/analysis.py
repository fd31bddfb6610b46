"""Post-hoc analytics over solver traces and iterate histories."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError


def active_set_hash(x):
    """Order-independent fingerprint of the zero-coordinate index set.

    The projection update produces exact zeros, so no thresholding is
    applied: a coordinate belongs to the active set iff it equals 0.0.
    """
    zeros = np.flatnonzero(np.asarray(x) == 0.0).astype(np.int64)
    return hashlib.sha1(zeros.tobytes()).hexdigest()[:16]


def track_identification(trace):
    """Earliest iteration whose active set persists through the final iterate.

    ``trace`` is a sequence of records exposing ``active_set_hash``. Returns
    None when the last two fingerprints differ (no stable suffix yet).
    """
    if not trace:
        raise InsufficientDataError("empty trace")
    final = trace[-1].active_set_hash
    k = len(trace) - 1
    while k > 0 and trace[k - 1].active_set_hash == final:
        k -= 1
    if k == len(trace) - 1 and len(trace) > 1:
        return None
    return k


@dataclass(frozen=True)
class RateEstimate:
    """Convergence-order estimate from a trailing window of iterate errors."""

    order: float
    superlinear: bool
    errors: tuple
    ratios: tuple


def estimate_rate(iterate_history, x_star):
    """Estimate the convergence order q from errors e_k = ||x_k - x_star||.

    Works on the trailing window where the errors are positive and strictly
    decreasing; at least 4 such values are required. The order is the median
    of log(e_{k+1}/e_k) / log(e_k/e_{k-1}) over consecutive triples, and the
    superlinearity flag is set when the last error ratio has dropped below
    one tenth of the first.
    """
    errors = [float(np.linalg.norm(np.asarray(xk) - np.asarray(x_star)))
              for xk in iterate_history]
    # trailing usable window: positive, strictly decreasing
    end = len(errors)
    start = end - 1
    while start > 0 and 0.0 < errors[start] < errors[start - 1]:
        start -= 1
    usable = errors[start:end]
    if len(usable) < 4 or any(e <= 0.0 for e in usable):
        raise InsufficientDataError(
            f"need at least 4 positive, decreasing errors, got {len(usable)} usable"
        )
    logs = [math.log(e) for e in usable]
    orders = [
        (logs[j + 1] - logs[j]) / (logs[j] - logs[j - 1])
        for j in range(1, len(usable) - 1)
    ]
    ratios = [usable[j + 1] / usable[j] for j in range(len(usable) - 1)]
    return RateEstimate(
        order=float(np.median(orders)),
        superlinear=ratios[-1] < 0.1 * ratios[0],
        errors=tuple(usable),
        ratios=tuple(ratios),
    )


def complementarity_margin(x, g, gamma):
    """Smallest gap gamma - |g_i| over the zero coordinates of ``x``.

    A strictly positive margin certifies strict complementarity of a
    stationary point: the gradient stays strictly inside [-gamma, gamma] on
    every zero coordinate. Returns +inf when ``x`` has no zeros.
    """
    zeros = np.asarray(x) == 0.0
    if not np.any(zeros):
        return float("inf")
    return float(np.min(gamma - np.abs(np.asarray(g)[zeros])))
