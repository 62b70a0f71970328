"""Dense complex linear algebra kernels.

Every routine accepts anything ``numpy.asarray`` understands and works in
complex double precision. Tolerances are relative to the input scale.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

EPS = np.finfo(float).eps
DEFAULT_TOL = 1e-10


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when an LU pivot falls below the singularity threshold."""

    def __init__(self, pivot: float, threshold: float):
        self.pivot = float(pivot)
        self.threshold = float(threshold)
        super().__init__(
            f"matrix is singular to working precision: "
            f"|pivot| = {self.pivot:.3e} <= {self.threshold:.3e}"
        )


class SkewSymmetryError(ValueError):
    """Raised when a matrix handed to :func:`pfaffian` is not skew-symmetric."""

    def __init__(self, asymmetry: float):
        self.asymmetry = float(asymmetry)
        super().__init__(f"matrix is not skew-symmetric: max|S + S^T| = {self.asymmetry:.3e}")


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return `a` as a finite 2-D complex128 array (a fresh copy)."""
    arr = np.array(a, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _square(a, name="A") -> np.ndarray:
    arr = as_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def _lu(a: np.ndarray):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        return sla.lu_factor(a, check_finite=False)


def _check_pivots(lu: np.ndarray, a: np.ndarray) -> None:
    scale = np.abs(a).max()
    threshold = a.shape[0] * EPS * scale
    pivot = np.abs(np.diag(lu)).min()
    if scale == 0.0 or pivot <= threshold:
        raise SingularMatrixError(pivot, threshold)


def lu_solve(a, b) -> np.ndarray:
    """Solve ``A X = B`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If the smallest pivot is below ``N * eps * max|A|``.
    """
    a = _square(a)
    b_arr = np.asarray(b, dtype=np.complex128)
    vector = b_arr.ndim == 1
    b_mat = as_matrix(b_arr, "B")
    if b_mat.shape[0] != a.shape[0]:
        raise ValueError(f"B has {b_mat.shape[0]} rows, A has order {a.shape[0]}")
    lu, piv = _lu(a)
    _check_pivots(lu, a)
    x = sla.lu_solve((lu, piv), b_mat, check_finite=False)
    return x[:, 0] if vector else x


def inverse(a) -> np.ndarray:
    a = _square(a)
    return lu_solve(a, np.eye(a.shape[0], dtype=np.complex128))


def condition_estimate(a) -> float:
    """Estimate the 1-norm condition number of a square matrix.

    Uses the LAPACK ``gecon`` estimator on an LU factorization, so the result
    is within a small factor of the exact value. Returns ``inf`` when the
    matrix is exactly singular.
    """
    a = _square(a)
    anorm = np.abs(a).sum(axis=0).max()
    if anorm == 0.0:
        return float("inf")
    lu, _ = _lu(a)
    if np.any(np.diag(lu) == 0):
        return float("inf")
    gecon = lapack.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0.0:
        return float("inf")
    return float(1.0 / rcond)


def numerical_rank(a, tol: float = DEFAULT_TOL) -> int:
    """Count singular values above ``tol`` times the largest one."""
    arr = as_matrix(a)
    s = np.linalg.svd(arr, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def pfaffian(s, tol: float = 1e-12) -> complex:
    """Pfaffian of an even-order skew-symmetric matrix.

    Skew-symmetric Gauss elimination (Parlett-Reid) with partial pivoting:
    at step ``k`` the largest entry of column ``k`` below the diagonal is
    swapped into position ``k+1`` by a symmetric row/column interchange.
    Each interchange flips the sign; the pivot ``S[k, k+1]`` joins the
    product. Skewness is checked against the transpose, not the adjoint.

    Parameters
    ----------
    s : (N, N) array_like
        Skew-symmetric matrix, ``N`` even.
    tol : float
        Relative tolerance on ``max|S + S^T| / max|S|``.
    """
    a = _square(s, "S")
    n = a.shape[0]
    if n % 2:
        raise ValueError(f"Pfaffian needs an even order, got {n}")
    scale = np.abs(a).max()
    asym = np.abs(a + a.T).max()
    if asym > tol * scale:
        raise SkewSymmetryError(asym)
    if scale == 0.0:
        return 0j
    result = 1.0 + 0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(a[k + 1:, k]).argmax())
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            result = -result
        pivot = a[k, k + 1]
        if pivot == 0:
            return 0j
        result *= pivot
        if k + 2 < n:
            tau = a[k, k + 2:] / pivot
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return complex(result)
