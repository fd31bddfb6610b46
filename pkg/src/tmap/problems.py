"""Problem oracles, measurement operators, and synthetic instance generation.

Oracles expose the smooth part f only; the l1 term is handled by the
solvers. All oracles are immutable after construction and safe for
concurrent read-only evaluation.
"""

from __future__ import annotations

import numpy as np
import scipy.fft
import scipy.sparse
from scipy.special import expit

from .errors import CapabilityError, DataError, DimensionError, ParameterError


class ProblemOracle:
    """Smooth-part oracle: value, gradient, and (optionally) Hessian-vector.

    Subclasses must set ``n`` and implement ``value`` and ``gradient``;
    Hessian-vector support is optional and advertised via ``capabilities``.
    ``hessian_operator(x)`` returns a closure evaluating v -> H(x) v with
    any per-point work (e.g. sigmoid weights) hoisted out, so repeated
    products at a fixed x cost one pass each.
    """

    n: int

    def value(self, x) -> float:
        return float(self.value_extended(x))

    def value_extended(self, x) -> np.longdouble:
        """Smooth-part value as an extended-precision scalar.

        The solvers compose the objective from this and the l1 term with a
        single final rounding, so comparisons between nearby points stay
        truthful down to one double ulp (rounding is monotone). Subclasses
        should evaluate their whole chain in extended precision where the
        operators allow it.
        """
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def value_and_gradient(self, x):
        return self.value(x), self.gradient(x)

    def hessian_vector(self, x, v) -> np.ndarray:
        raise CapabilityError(
            f"{type(self).__name__} does not provide Hessian-vector products"
        )

    def hessian_operator(self, x):
        if "hessian_vector" not in self.capabilities:
            raise CapabilityError(
                f"{type(self).__name__} does not provide Hessian-vector products"
            )
        return lambda v: self.hessian_vector(x, v)

    @property
    def capabilities(self) -> frozenset:
        caps = {"value", "gradient"}
        if type(self).hessian_vector is not ProblemOracle.hessian_vector:
            caps.add("hessian_vector")
        return frozenset(caps)


def _check_finite(name, array):
    data = array.data if scipy.sparse.issparse(array) else array
    if not np.all(np.isfinite(data)):
        raise DataError(f"{name} contains non-finite entries")


class LogisticOracle(ProblemOracle):
    """Mean logistic loss (1/m) sum_i log(1 + exp(-b_i * a_i . x)).

    ``A`` is the m-by-n sample matrix (dense ndarray or scipy sparse),
    ``b`` the +-1 label vector. The loss is evaluated in an overflow-safe
    form and the Hessian is applied as A^T diag(d) A / m with the sigmoid
    weights d in (0, 1/4], never materialized.
    """

    def __init__(self, A, b):
        b = np.asarray(b, dtype=float)
        if not scipy.sparse.issparse(A):
            A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != b.size:
            raise DimensionError(
                f"A has shape {A.shape}, expected ({b.size}, n)"
            )
        if not np.all(np.isin(b, (-1.0, 1.0))):
            raise DataError("labels must be -1 or +1")
        _check_finite("A", A)
        self.A = A
        self.b = b
        self.m, self.n = A.shape

    def _margins(self, x):
        # s_i = -b_i * a_i . x, the argument of the softplus
        return -self.b * (self.A @ x)

    def value_extended(self, x):
        s = self._margins(np.asarray(x, dtype=np.longdouble))
        return np.sum(np.logaddexp(0.0, s), dtype=np.longdouble) / self.m

    def gradient(self, x):
        s = self._margins(x)
        return -(self.A.T @ (self.b * expit(s))) / self.m

    def hessian_vector(self, x, v):
        return self.hessian_operator(x)(v)

    def hessian_operator(self, x):
        sig = expit(self._margins(x))
        d = sig * (1.0 - sig)
        A, m = self.A, self.m
        return lambda v: (A.T @ (d * (A @ v))) / m


class DenseOperator:
    """Thin matvec/rmatvec wrapper around a dense matrix."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)
        if self.matrix.ndim != 2:
            raise DimensionError("operator matrix must be two-dimensional")
        _check_finite("operator matrix", self.matrix)
        self.shape = self.matrix.shape

    def matvec(self, x):
        return self.matrix @ x

    def rmatvec(self, y):
        return self.matrix.T @ y


class PartialDctOperator:
    """Row-subsampled orthonormal (type-II) discrete cosine transform.

    Applies the full orthonormal DCT and keeps the rows listed in
    ``row_indices`` (0-based, distinct). The adjoint scatters into a
    length-n vector and applies the inverse transform, so matvec/rmatvec
    are exact transposes of each other and A A^T is the identity on the
    selected rows.
    """

    def __init__(self, n, row_indices):
        rows = np.asarray(row_indices, dtype=np.int64)
        if rows.ndim != 1:
            raise DimensionError("row_indices must be one-dimensional")
        if rows.size > n:
            raise ParameterError(f"cannot select {rows.size} rows from {n}")
        if rows.size and (rows.min() < 0 or rows.max() >= n):
            raise ParameterError("row indices out of range")
        if np.unique(rows).size != rows.size:
            raise ParameterError("row indices must be distinct")
        self.n = int(n)
        self.rows = rows
        self.shape = (rows.size, self.n)

    def matvec(self, x):
        x = np.asarray(x)
        if x.dtype != np.longdouble:  # extended precision passes through
            x = x.astype(float)
        return scipy.fft.dct(x, norm="ortho")[self.rows]

    def rmatvec(self, y):
        z = np.zeros(self.n)
        z[self.rows] = y
        return scipy.fft.idct(z, norm="ortho")


def dct_matrix(n):
    """Dense orthonormal type-II DCT matrix; O(n^2) reference path.

    Used to cross-validate the fast transform; capped at n <= 4096 to keep
    memory and runtime sane.
    """
    if n > 4096:
        raise ParameterError(f"reference DCT capped at n=4096, got {n}")
    j = np.arange(n)
    k = j[:, None]
    matrix = np.cos(np.pi * (2 * j + 1) * k / (2 * n))
    matrix *= np.sqrt(2.0 / n)
    matrix[0] *= np.sqrt(0.5)
    return matrix


class LassoOracle(ProblemOracle):
    """Half squared residual 0.5 * ||A x - b||^2 for a linear operator A.

    ``op`` may be a dense matrix (wrapped automatically) or any object with
    ``matvec``, ``rmatvec`` and ``shape``.
    """

    def __init__(self, op, b):
        if isinstance(op, np.ndarray):
            op = DenseOperator(op)
        b = np.asarray(b, dtype=float)
        if b.size != op.shape[0]:
            raise DimensionError(
                f"b has length {b.size}, operator has {op.shape[0]} rows"
            )
        _check_finite("b", b)
        self.op = op
        self.b = b
        self.m, self.n = op.shape

    def value_extended(self, x):
        r = self.op.matvec(np.asarray(x, dtype=np.longdouble)) - self.b
        return 0.5 * np.sum(np.square(r), dtype=np.longdouble)

    def gradient(self, x):
        return self.op.rmatvec(self.op.matvec(x) - self.b)

    def hessian_vector(self, x, v):
        return self.op.rmatvec(self.op.matvec(v))

    def hessian_operator(self, x):
        return lambda v: self.op.rmatvec(self.op.matvec(v))


class SaturatingQuadraticOracle(ProblemOracle):
    """Separable smooth nonconvex smoke-test objective sum_i x_i^2/(1+x_i^2).

    Bounded in [0, n), minimized at the origin, with negative curvature for
    |x_i| > 1/sqrt(3); exercises the solver's indefinite-Hessian paths.
    """

    def __init__(self, n):
        self.n = int(n)

    def value_extended(self, x):
        sq = np.square(np.asarray(x, dtype=np.longdouble))
        return np.sum(sq / (1.0 + sq), dtype=np.longdouble)

    def gradient(self, x):
        return 2.0 * x / np.square(1.0 + np.square(x))

    def hessian_vector(self, x, v):
        sq = np.square(x)
        return (2.0 - 6.0 * sq) / (1.0 + sq) ** 3 * v


def generate_lasso_instance(n, m, k, dynamic_range_db=20.0, noise_sigma=0.1,
                            seed=0):
    """Seeded sparse-recovery instance with partial-DCT measurements.

    Draws, in a fixed order from one PCG64 stream: k distinct support
    indices, k signs (+-1 equiprobable), k magnitude exponents uniform on
    [0,1] (magnitudes 10^(d*u/20), so within [1, 10^(d/20)]), m distinct
    measurement rows, and Gaussian noise with standard deviation
    ``noise_sigma``. The same seed reproduces the instance bit for bit.

    Returns
    -------
    (op, b, x_true) : (PartialDctOperator, ndarray, ndarray)
    """
    if not 0 <= k <= n:
        raise ParameterError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0 <= m <= n:
        raise ParameterError(f"need 0 <= m <= n, got m={m}, n={n}")
    if noise_sigma < 0:
        raise ParameterError(f"noise_sigma must be nonnegative, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    support = rng.choice(n, size=k, replace=False)
    signs = rng.choice([-1.0, 1.0], size=k)
    exponents = rng.random(k)
    rows = rng.choice(n, size=m, replace=False)
    x_true = np.zeros(n)
    x_true[support] = signs * 10.0 ** (dynamic_range_db * exponents / 20.0)
    op = PartialDctOperator(n, rows)
    b = op.matvec(x_true) + rng.normal(0.0, noise_sigma, size=m)
    return op, b, x_true
