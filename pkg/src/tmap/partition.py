"""Adaptive index partition and the associated shift / projection operators.

Each iterate is split into a near-zero band treated by soft thresholding
(``active``) and two sign-clamped blocks treated by a Newton step
(``free_pos`` / ``free_neg``). The band half-width adapts to the
prox-gradient residual, so it collapses as the iterate approaches
stationarity. Pure functions throughout; safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .prox import soft_threshold, stationarity_residual


@dataclass(frozen=True)
class IndexPartition:
    """Disjoint cover of {0..n-1} for one iterate.

    ``active`` collects coordinates inside the band where the model stays
    first-order; ``free_pos`` / ``free_neg`` collect coordinates clamped to
    stay nonnegative / nonpositive. ``residual_norm`` is the prox-gradient
    residual norm at the iterate and ``band`` the half-width actually used,
    band = min(eps, residual_norm).
    """

    active: np.ndarray
    free_pos: np.ndarray
    free_neg: np.ndarray
    residual_norm: float
    band: float
    n: int

    @property
    def free(self):
        """Sorted union of the two sign-clamped index sets."""
        return np.sort(np.concatenate([self.free_pos, self.free_neg]))


def compute_partition(x, g, eps, gamma, residual=None):
    """Split indices by the band/gradient clauses evaluated at (x, g).

    Membership tests follow the defining clauses exactly (strict |g| < gamma
    for the band, non-strict g <= -gamma / g >= gamma for the clamped sets);
    the strictness is what makes the three sets provably disjoint.

    Parameters
    ----------
    x, g : ndarray
        Iterate and gradient, same length.
    eps : float
        Accuracy level capping the band half-width. Must be positive.
    gamma : float
        l1 weight, must be positive.
    residual : (ndarray, float), optional
        Precomputed output of ``stationarity_residual(x, g, gamma)``; passed
        by the solver loop to avoid recomputation.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    if x.shape != g.shape:
        raise DimensionError(f"x has shape {x.shape} but g has shape {g.shape}")
    if eps <= 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if residual is None:
        residual = stationarity_residual(x, g, gamma)
    pi = residual[1]
    band = min(eps, pi)

    in_active = (
        ((np.abs(x) <= band) & (np.abs(g) < gamma))
        | ((-band <= x) & (x < 0.0) & (g <= -gamma))
        | ((0.0 < x) & (x <= band) & (g >= gamma))
    )
    in_free_pos = (x > band) | ((0.0 <= x) & (x <= band) & (g <= -gamma))
    in_free_neg = (x < -band) | ((-band <= x) & (x <= 0.0) & (g >= gamma))

    return IndexPartition(
        active=np.flatnonzero(in_active),
        free_pos=np.flatnonzero(in_free_pos),
        free_neg=np.flatnonzero(in_free_neg),
        residual_norm=pi,
        band=band,
        n=x.size,
    )


def shift_vector(part, gamma, n):
    """Subgradient shift: +gamma on free_pos, -gamma on free_neg, 0 on active."""
    if n != part.n:
        raise DimensionError(f"partition covers {part.n} indices, requested {n}")
    w = np.zeros(n)
    w[part.free_pos] = gamma
    w[part.free_neg] = -gamma
    return w


def adaptive_project(v, part, t, gamma):
    """Iterate-dependent projection used by the update rule.

    Clamps below at zero on free_pos, above at zero on free_neg, and soft
    thresholds by t * gamma on the active band.
    """
    if t <= 0:
        raise ParameterError(f"step t must be positive, got {t}")
    v = np.asarray(v, dtype=float)
    if v.size != part.n:
        raise DimensionError(f"v has length {v.size}, partition covers {part.n}")
    out = v.copy()
    out[part.free_pos] = np.maximum(v[part.free_pos], 0.0)
    out[part.free_neg] = np.minimum(v[part.free_neg], 0.0)
    out[part.active] = soft_threshold(v[part.active], t * gamma)
    return out
