"""Dense symmetric linear algebra and order-statistic kernels.

Everything here is a pure function on immutable inputs.  The pseudoinverse
follows the rank-revealing convention: relative to the largest absolute
eigenvalue, eigenvalues below ``dim * eps`` (or a caller-supplied relative
tolerance) are treated as exact zeros.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatchError, EigenFailureError, EmptyInputError

# Absolute guard when mapping a quantile level to an order-statistic index;
# protects ceil() against float noise in level * B (e.g. (1 - 1/3) * 3 > 2).
_LEVEL_GUARD = 1e-9


def _check_square_symmetric(mat) -> np.ndarray:
    arr = np.asarray(mat, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")
    scale = max(1.0, float(np.max(np.abs(arr))) if arr.size else 1.0)
    asym = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
    if asym > 1e-10 * scale:
        raise DimensionMismatchError(
            f"matrix is not symmetric (max asymmetry {asym:.3e} at scale {scale:.3e})"
        )
    return (arr + arr.T) / 2.0


def sym_pseudo_inverse(mat, rtol: float = 0.0) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric matrix.

    Computed from the symmetric eigendecomposition; eigenvalues ``lam`` with
    ``|lam| <= tol * max|lam|`` are treated as zero, where ``tol`` is ``rtol``
    or, when ``rtol == 0``, ``dim * machine epsilon``.
    """
    if rtol < 0:
        raise DimensionMismatchError("rtol must be >= 0")
    arr = _check_square_symmetric(mat)
    try:
        w, v = np.linalg.eigh(arr)
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(f"eigendecomposition failed: {exc}") from exc
    tol = (rtol if rtol > 0 else arr.shape[0] * np.finfo(float).eps) * np.max(np.abs(w), initial=0.0)
    keep = np.abs(w) > tol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    out = (v * inv) @ v.T
    return (out + out.T) / 2.0


def sym_rank(mat, rtol: float = 0.0) -> int:
    """Numerical rank of a symmetric matrix (same tolerance as the pinv)."""
    arr = _check_square_symmetric(mat)
    try:
        w = np.linalg.eigvalsh(arr)
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(f"eigendecomposition failed: {exc}") from exc
    tol = (rtol if rtol > 0 else arr.shape[0] * np.finfo(float).eps) * np.max(np.abs(w), initial=0.0)
    return int(np.sum(np.abs(w) > tol))


def kronecker(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result equals ``a[i, j] * b``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DimensionMismatchError("kronecker factors must be finite")
    return np.kron(a, b)


def quantile_index(level: float, n: int) -> int:
    """0-based index of the ``ceil(level * n)``-th order statistic."""
    if not 0.0 < level <= 1.0:
        raise DimensionMismatchError(f"quantile level must be in (0, 1], got {level}")
    k = math.ceil(level * n - _LEVEL_GUARD)
    return min(n, max(1, k)) - 1


def empirical_quantile(values, level: float) -> float:
    """Left-continuous empirical quantile (inverse EDF, no interpolation).

    Returns the ``ceil(level * B)``-th order statistic of the ``B`` values
    sorted ascending; ``level = 1/B`` gives the minimum and ``level = 1`` the
    maximum.
    """
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInputError("empirical_quantile needs at least one value")
    idx = quantile_index(level, arr.size)
    return float(np.partition(arr, idx)[idx])
