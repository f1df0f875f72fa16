"""Dense linear-algebra kernels: norms, null vectors, power iteration.

Vectors and matrices are plain float64 numpy arrays.  The two nontrivial
routines here form a deliberate dual route: :func:`null_vector` extracts the
stationary direction by direct elimination, while :func:`power_iteration`
estimates the same direction iteratively, so each can check the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PIVOT_RTOL = 1e-10
_RESIDUAL_RTOL = 1e-10


class NullSpaceError(ArithmeticError):
    """The matrix does not have the one-dimensional, sign-definite null space
    guaranteed by the convergence theorem; signals a hypothesis violation or
    an implementation fault upstream."""


def as_vector(x, n: int | None = None) -> np.ndarray:
    """Validate x as a finite 1-D float64 vector, optionally of length n."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_square_matrix(m) -> np.ndarray:
    """Validate m as a finite 2-D square float64 matrix."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def matvec(m, x) -> np.ndarray:
    """Matrix-vector product with shape validation."""
    a = as_square_matrix(m)
    v = as_vector(x, a.shape[0])
    return a @ v


def l1_norm(x) -> float:
    """Sum of absolute entries."""
    return float(np.sum(np.abs(as_vector(x))))


def matrix_inf_norm(m) -> float:
    """Maximum absolute row sum."""
    a = as_square_matrix(m)
    return float(np.max(np.sum(np.abs(a), axis=1)))


def null_vector(m) -> np.ndarray:
    """Null vector of a transposed weighted Laplacian, normalized to unit l1 norm.

    Intended for matrices M with a one-dimensional null space spanned by an
    entrywise-positive vector (M equal to the transpose of a weighted
    Laplacian of a strongly connected graph guarantees this).  Gaussian
    elimination with partial pivoting reduces M; the column of the single
    numerically negligible pivot becomes the free variable, back substitution
    fills in the rest, and the result is scaled to unit l1 norm with its
    first nonzero entry positive.

    Raises :class:`NullSpaceError` when the number of negligible pivots is
    not exactly one, when the residual check ``||M v||_inf <=
    1e-10 * ||M||_inf * ||v||_inf`` fails, or when the normalized vector is
    not entrywise positive.  Those are theorem conclusions, so their failure
    signals a bad input or a bug rather than a condition to repair silently.
    """
    original = as_square_matrix(m)
    n = original.shape[0]
    u = original.copy()
    scale = matrix_inf_norm(original)
    pivot_tol = _PIVOT_RTOL * scale

    pivots = np.empty(n, dtype=np.float64)
    for k in range(n):
        p = k + int(np.argmax(np.abs(u[k:, k])))
        if p != k:
            u[[k, p], :] = u[[p, k], :]
        pivots[k] = abs(u[k, k])
        if u[k, k] != 0.0 and k + 1 < n:
            factors = u[k + 1 :, k] / u[k, k]
            u[k + 1 :, k:] -= np.outer(factors, u[k, k:])
            u[k + 1 :, k] = 0.0

    negligible = int(np.sum(pivots <= pivot_tol))
    if negligible == 0:
        raise NullSpaceError(
            "matrix is numerically nonsingular; expected a one-dimensional null space"
        )
    if negligible > 1:
        raise NullSpaceError(
            f"null space dimension at least {negligible}; "
            "expected exactly one (is the graph strongly connected?)"
        )

    free = int(np.argmin(pivots))
    v = np.zeros(n, dtype=np.float64)
    v[free] = 1.0
    for k in range(n - 1, -1, -1):
        if k == free:
            continue
        s = float(u[k, k + 1 :] @ v[k + 1 :])
        v[k] = -s / u[k, k]

    v /= l1_norm(v)
    for entry in v:
        if entry != 0.0:
            if entry < 0.0:
                v = -v
            break

    residual = float(np.max(np.abs(original @ v)))
    if residual > _RESIDUAL_RTOL * scale * float(np.max(np.abs(v))):
        raise NullSpaceError(
            f"null vector residual {residual:.3e} exceeds tolerance; matrix may be ill-conditioned"
        )
    if float(v.min()) <= 0.0:
        raise NullSpaceError(
            "null vector is not entrywise positive; hypothesis violation or upstream fault"
        )
    return v


@dataclass(frozen=True)
class PowerIterationResult:
    """Outcome of a power iteration run.

    value is the Rayleigh-quotient eigenvalue estimate at the final iterate,
    vector is the final iterate with unit l1 norm, converged records whether
    successive iterates came within tol in l1 distance before max_iter.
    """

    value: float
    vector: np.ndarray
    converged: bool
    iterations: int


def power_iteration(m, x0, max_iter: int = 10_000, tol: float = 1e-13) -> PowerIterationResult:
    """Estimate the dominant eigenpair of m by repeated multiplication.

    Iterates x <- m x / ||m x||_1 from x0 until the l1 distance between
    successive iterates drops below tol or max_iter is reached.
    Non-convergence is reported in the result, not raised: for the intended
    inputs (primitive nonnegative matrices) it indicates a budget problem,
    and for anything else it is itself informative.
    """
    a = as_square_matrix(m)
    x = as_vector(x0, a.shape[0]).copy()
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    norm = l1_norm(x)
    if norm == 0.0:
        raise ValueError("starting vector must be nonzero")
    x /= norm

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        y = a @ x
        ynorm = float(np.sum(np.abs(y)))
        if ynorm == 0.0:
            # x landed in the null space; the estimate below is still defined
            x = y
            break
        y /= ynorm
        delta = float(np.sum(np.abs(y - x)))
        x = y
        if delta < tol:
            converged = True
            break

    xx = float(x @ x)
    value = float(x @ (a @ x)) / xx if xx > 0.0 else 0.0
    return PowerIterationResult(value=value, vector=x, converged=converged, iterations=iterations)
