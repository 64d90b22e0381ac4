"""Symmetric eigenproblems, definiteness tests, and the block Schur criterion.

All matrices here are small and dense (3n rows for n agents), so a cyclic
Jacobi iteration is used as the eigensolver: it is simple, unconditionally
convergent for symmetric input, and accurate to the off-diagonal sweep
threshold.  Definiteness is decided on the minimum eigenvalue against an
absolute tolerance; the block test follows the standard Schur-complement
characterization, with the inner inverse applied through a Cholesky solve
rather than explicit inversion.
"""

from __future__ import annotations

import numpy as np

#: Absolute tolerance on the minimum eigenvalue for definiteness decisions.
DEFAULT_PD_TOL = 1e-9

_SWEEP_LIMIT = 60


class SymmetryError(ValueError):
    """Input matrix violates the symmetry tolerance."""


def require_symmetric(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate |m_ij - m_ji| <= 1e-12 * max(1, |m_ij|) and return float64 copy."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SymmetryError(f"{name} must be square, got shape {a.shape}")
    tol = 1e-12 * np.maximum(1.0, np.abs(a))
    if np.any(np.abs(a - a.T) > tol):
        raise SymmetryError(f"{name} is not symmetric within tolerance")
    return a.copy()


def eigenvalues_sym(m: np.ndarray, with_vectors: bool = False):
    """Eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi.

    Args:
        m: symmetric matrix (validated against the symmetry tolerance).
        with_vectors: also return the orthonormal eigenvector matrix whose
            column j pairs with eigenvalue j.

    Returns:
        (k,) ascending eigenvalues, or (values, vectors) if requested.
    """
    a = require_symmetric(m)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        vals = np.array([a[0, 0]])
        return (vals, v) if with_vectors else vals

    norm = np.linalg.norm(a)
    threshold = 1e-12 * max(norm, 1e-300)

    for _ in range(_SWEEP_LIMIT):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold / (n * n):
                    continue
                theta = 0.5 * np.arctan2(2.0 * apq, a[q, q] - a[p, p])
                c, s = np.cos(theta), np.sin(theta)
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = a[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q

    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    if with_vectors:
        return vals, v[:, order]
    return vals


def is_positive_definite(m: np.ndarray, tol: float = DEFAULT_PD_TOL) -> bool:
    """True iff the minimum eigenvalue exceeds the absolute tolerance."""
    if tol < 0.0:
        raise ValueError("tolerance must be nonnegative")
    return float(eigenvalues_sym(m)[0]) > tol


def _cholesky_lower(a: np.ndarray):
    """Lower Cholesky factor of a, or None if a is not positive definite."""
    n = a.shape[0]
    low = np.zeros_like(a)
    for i in range(n):
        for j in range(i + 1):
            s = a[i, j] - low[i, :j] @ low[j, :j]
            if i == j:
                if s <= 0.0:
                    return None
                low[i, i] = np.sqrt(s)
            else:
                low[i, j] = s / low[j, j]
    return low


def _cholesky_solve(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (low low^T) x = rhs by forward and back substitution."""
    n = low.shape[0]
    y = np.zeros_like(rhs, dtype=float)
    for i in range(n):
        y[i] = (rhs[i] - low[i, :i] @ y[:i]) / low[i, i]
    x = np.zeros_like(y)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - low[i + 1 :, i] @ x[i + 1 :]) / low[i, i]
    return x


def schur_positive_definite(
    a: np.ndarray, e: np.ndarray, c: np.ndarray, tol: float = DEFAULT_PD_TOL
) -> bool:
    """Definiteness of the block matrix [[a, e], [e^T, c]] via Schur complement.

    True iff a is positive definite and c - e^T a^{-1} e is positive definite,
    both against the given tolerance.  A non-definite a short-circuits to
    False: the block criterion has already failed, no solve is attempted.
    """
    a = require_symmetric(a, "a")
    c = require_symmetric(c, "c")
    e = np.asarray(e, dtype=float)
    if e.shape != (a.shape[0], c.shape[0]):
        raise ValueError(
            f"e must be {a.shape[0]}x{c.shape[0]} to conform, got {e.shape}"
        )
    if not is_positive_definite(a, tol):
        return False
    low = _cholesky_lower(a)
    if low is None:
        return False
    complement = c - e.T @ _cholesky_solve(low, e)
    return is_positive_definite(complement, tol)


def spectral_bounds(
    family: list[np.ndarray], tol: float = DEFAULT_PD_TOL
) -> tuple[float, float]:
    """Extreme eigenvalues over a family of positive definite matrices.

    Returns (smallest eigenvalue over the family, largest eigenvalue over the
    family).  Every member must be positive definite; a failing member aborts
    with its index, since it corresponds to a mode that is not jointly
    connected and must be excluded by the caller.
    """
    if not family:
        raise ValueError("family must be nonempty")
    lo = np.inf
    hi = -np.inf
    for idx, m in enumerate(family):
        vals = eigenvalues_sym(m)
        if vals[0] <= tol:
            raise ValueError(
                f"family member {idx} is not positive definite "
                f"(min eigenvalue {vals[0]:.3e}); exclude disconnected modes"
            )
        lo = min(lo, float(vals[0]))
        hi = max(hi, float(vals[-1]))
    return lo, hi
