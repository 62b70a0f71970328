"""The matrix function ``G(lambda)`` and the polynomial ``theta = sqrt(det G)``.

``G`` is built from a :class:`GPair`; multiplying it on the left by
``diag(J_{2m} U_{2m}, -J_{2n} U_{2n})`` gives a skew-symmetric matrix whose
Pfaffian is a polynomial square root of ``det G``. Sampling that Pfaffian
on a tensor grid and interpolating yields ``theta`` with its sign fixed by
the coefficient of ``lam1^n lam2^m`` being ``-1``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .extraction import GPair
from .linalg import condition_estimate, inverse, lu_solve, pfaffian
from .structured import (
    HALF_I,
    flip_signature,
    integration_matrix,
    resolvent_col,
    structured_set,
)
from .symbol import TbtSymbol

LEADING_TOL = 1e-6
SKEW_TOL = 1e-12
VANDERMONDE_MAX_COND = 1e10
MAX_NODE_RETRIES = 3


class IntegrityError(RuntimeError):
    """A GPair failed a structural check (skewness, leading coefficient, ...)."""


@dataclass(frozen=True, eq=False)
class BivarPoly:
    """``sum_{a,b} coeffs[a, b] lam1^a lam2^b``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 2:
            raise ValueError("coeffs must be 2-D")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def deg1(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def deg2(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, lam1, lam2):
        return P.polyval2d(lam1, lam2, self.coeffs)


def q_poly(m: int, n: int) -> BivarPoly:
    """``q(lam) = (lam1 - i/2)^n (lam2 - i/2)^m``."""
    c1 = P.polypow([-HALF_I, 1.0], n)
    c2 = P.polypow([-HALF_I, 1.0], m)
    return BivarPoly(np.outer(c1, c2))


@functools.lru_cache(maxsize=None)
def _g_constant(m: int, n: int) -> np.ndarray:
    """The lambda-free diagonal part ``diag(calA2, calA2, calA1, calA1)``."""
    out = np.zeros((2 * (m + n), 2 * (m + n)), dtype=np.complex128)
    for start, size in ((0, m), (m, m), (2 * m, n), (2 * m + n, n)):
        out[start:start + size, start:start + size] = integration_matrix(size)
    out.flags.writeable = False
    return out


def assemble_g(gp: GPair, lam1: complex, lam2: complex) -> np.ndarray:
    """``G(lam) = [[diag(calA2 - lam2, calA2 - lam2), g12], [g21, diag(calA1 - lam1, calA1 - lam1)]]``."""
    m, n = gp.m, gp.n
    g = _g_constant(m, n).copy()
    g[: 2 * m, 2 * m:] = gp.g12
    g[2 * m:, : 2 * m] = gp.g21
    idx = np.arange(2 * (m + n))
    g[idx[: 2 * m], idx[: 2 * m]] -= lam2
    g[idx[2 * m:], idx[2 * m:]] -= lam1
    return g


@functools.lru_cache(maxsize=None)
def _skew_prefactor(m: int, n: int) -> np.ndarray:
    out = np.zeros((2 * (m + n), 2 * (m + n)), dtype=np.complex128)
    out[: 2 * m, : 2 * m] = flip_signature(m)
    out[2 * m:, 2 * m:] = -flip_signature(n)
    out.flags.writeable = False
    return out


def skew_prefactor(m: int, n: int) -> np.ndarray:
    """``diag(J_{2m} U_{2m}, -J_{2n} U_{2n})``."""
    return _skew_prefactor(m, n).copy()


@functools.lru_cache(maxsize=None)
def _check_prefactor_det(m: int, n: int) -> None:
    # det(skew G) = det(G) needs a unit-determinant prefactor
    d = np.linalg.det(skew_prefactor(m, n))
    if abs(d - 1.0) > 1e-12:
        raise IntegrityError(f"skew prefactor has determinant {d} for m={m}, n={n}")


def skew(gp: GPair, lam1: complex, lam2: complex) -> np.ndarray:
    """The skew-symmetric form ``diag(J U, -J U) G(lam)``.

    Raises
    ------
    IntegrityError
        If ``max|S + S^T|`` exceeds ``1e-12`` relative to ``max|S|``.
    """
    _check_prefactor_det(gp.m, gp.n)
    s = _skew_prefactor(gp.m, gp.n) @ assemble_g(gp, lam1, lam2)
    asym = np.abs(s + s.T).max()
    if asym > SKEW_TOL * max(np.abs(s).max(), 1.0):
        raise IntegrityError(f"G(lambda) is not skew-symmetrizable: max|S + S^T| = {asym:.3e}")
    return s


def chebyshev_nodes(count: int) -> np.ndarray:
    k = np.arange(count)
    return np.cos(np.pi * (k + 0.5) / count)


def _interpolate(values: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    v1 = np.vander(x1, increasing=True)
    v2 = np.vander(x2, increasing=True)
    if max(np.linalg.cond(v1), np.linalg.cond(v2)) > VANDERMONDE_MAX_COND:
        raise np.linalg.LinAlgError("interpolation Vandermonde is ill-conditioned")
    c = lu_solve(v1, values)
    return lu_solve(v2, c.T).T


def theta_poly(gp: GPair, seed: int = 0) -> BivarPoly:
    """Interpolate ``theta(lam) = sqrt(det G(lam))`` from Pfaffian samples.

    The Pfaffian of the skew form is sampled on an ``(n+1) x (m+1)`` grid of
    Chebyshev nodes and interpolated with degrees ``(n, m)``. Its
    ``lam1^n lam2^m`` coefficient must be ``+-1``; the result is divided by
    minus that coefficient so the normalized one is exactly ``-1``.

    Raises
    ------
    IntegrityError
        If the leading coefficient is farther than ``1e-6`` from ``+-1``.
    np.linalg.LinAlgError
        If interpolation fails for every node set tried.
    """
    m, n = gp.m, gp.n
    _check_prefactor_det(m, n)
    x1, x2 = chebyshev_nodes(n + 1), chebyshev_nodes(m + 1)
    rng = np.random.default_rng(seed)
    last_error = None
    for _ in range(MAX_NODE_RETRIES + 1):
        try:
            values = np.array([[pfaffian(skew(gp, a, b)) for b in x2] for a in x1])
            if not np.all(np.isfinite(values)):
                raise np.linalg.LinAlgError("non-finite Pfaffian sample")
            coeffs = _interpolate(values, x1, x2)
            break
        except np.linalg.LinAlgError as exc:
            last_error = exc
            x1 = x1 + rng.uniform(-0.05, 0.05, x1.shape)
            x2 = x2 + rng.uniform(-0.05, 0.05, x2.shape)
    else:
        raise np.linalg.LinAlgError(f"theta interpolation failed after retries: {last_error}")

    lead = coeffs[n, m]
    if min(abs(lead - 1.0), abs(lead + 1.0)) > LEADING_TOL:
        raise IntegrityError(
            f"leading coefficient of the Pfaffian is {lead:.6g}, expected +-1; "
            "g12 is not realizable or numerically degenerate"
        )
    coeffs = -coeffs / lead
    coeffs[n, m] = -1.0
    return BivarPoly(coeffs)


def pfaffian_leading_coefficient(gp: GPair) -> complex:
    """Leading coefficient of the un-normalized Pfaffian polynomial (diagnostic)."""
    x1, x2 = chebyshev_nodes(gp.n + 1), chebyshev_nodes(gp.m + 1)
    values = np.array([[pfaffian(skew(gp, a, b)) for b in x2] for a in x1])
    return complex(_interpolate(values, x1, x2)[gp.n, gp.m])


def theta_tilde(sym: TbtSymbol, lam1: complex, lam2: complex, r: np.ndarray | None = None) -> complex:
    """``K R (A2 - lam2 I)^{-1} (A1 - lam1 I)^{-1} 1`` with ``R = T^{-1}``.

    `r` may carry a precomputed inverse to avoid refactoring ``T``.
    """
    ss = structured_set(sym)
    if r is None:
        r = inverse(ss.t)
    return complex((ss.kb.k @ r @ resolvent_col(lam1, lam2, sym.m, sym.n))[0])


def rhs_vector(m: int, n: int) -> np.ndarray:
    """``col[0, 1_m, 0, 1_n]``."""
    return np.r_[np.zeros(m), np.ones(m), np.zeros(n), np.ones(n)].astype(np.complex128)


def branch_scalar(gp: GPair, nu1: complex, nu2: complex) -> complex:
    """``e^T diag(-J U, J U) G(nu)^{-1} e`` with ``e = col[0, 1_m, 0, 1_n]``; zero for every admissible pair."""
    m, n = gp.m, gp.n
    e = rhs_vector(m, n)
    d = np.zeros((2 * (m + n), 2 * (m + n)), dtype=np.complex128)
    d[: 2 * m, : 2 * m] = -flip_signature(m)
    d[2 * m:, 2 * m:] = flip_signature(n)
    return complex(e @ d @ lu_solve(assemble_g(gp, nu1, nu2), e))


def g_condition(gp: GPair, lam1: complex, lam2: complex) -> float:
    return condition_estimate(assemble_g(gp, lam1, lam2))

