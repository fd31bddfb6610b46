"""Proximal kernels for the weighted l1 term and the associated residuals.

All functions here are pure and use exact floating-point comparisons;
tolerance handling belongs to the solver loop, not to these kernels.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ParameterError


def soft_threshold(v, theta):
    """Shrink ``v`` toward zero by ``theta``: sign(v) * max(|v| - theta, 0).

    Works elementwise on arrays and on plain scalars. ``theta`` must be
    nonnegative.
    """
    if np.any(np.asarray(theta) < 0):
        raise ParameterError(f"threshold must be nonnegative, got {theta}")
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def prox_l1(x, t, gamma):
    """Proximity operator of u -> t * gamma * ||u||_1, i.e. componentwise
    soft thresholding with threshold t * gamma."""
    if t <= 0:
        raise ParameterError(f"prox scale t must be positive, got {t}")
    if gamma < 0:
        raise ParameterError(f"gamma must be nonnegative, got {gamma}")
    return soft_threshold(np.asarray(x, dtype=float), t * gamma)


def stationarity_residual(x, g, gamma):
    """Prox-gradient displacement x - prox_{gamma||.||_1}(x - g) and its norm.

    The norm vanishes exactly at points satisfying the first-order
    conditions of min f + gamma*||.||_1 with g = grad f(x). The raw vector
    is returned alongside so callers can reuse its componentwise values.

    Returns
    -------
    (vector, norm) : (ndarray, float)
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    if x.shape != g.shape:
        raise DimensionError(f"x has shape {x.shape} but g has shape {g.shape}")
    vector = x - prox_l1(x - g, 1.0, gamma)
    return vector, float(np.linalg.norm(vector))


def gradient_map(x_plus, g_plus, t, gamma):
    """Prox-gradient displacement per unit step on the near-zero block.

    Computes (x - prox_{t * gamma * ||.||_1}(x - t * g)) / t for the
    subvectors ``x_plus``, ``g_plus``; ``t`` must be positive.
    """
    if t <= 0:
        raise ParameterError(f"step t must be positive, got {t}")
    x_plus = np.asarray(x_plus, dtype=float)
    g_plus = np.asarray(g_plus, dtype=float)
    if x_plus.shape != g_plus.shape:
        raise DimensionError(
            f"x_plus has shape {x_plus.shape} but g_plus has shape {g_plus.shape}"
        )
    return (x_plus - prox_l1(x_plus - t * g_plus, t, gamma)) / t
