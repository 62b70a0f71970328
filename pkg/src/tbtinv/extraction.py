"""Minimal-information matrices ``g12`` / ``g21`` of an invertible TBT matrix."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, condition_estimate, inverse
from .structured import StructuredSet, flip, signature, structured_set
from .symbol import TbtSymbol


def g21_from_g12(g12, m: int, n: int) -> np.ndarray:
    """``g21 = -U_{2n} J_{2n} g12^T J_{2m} U_{2m}``."""
    g12 = as_matrix(g12, "g12")
    if g12.shape != (2 * m, 2 * n):
        raise ValueError(f"g12 must be {2 * m}x{2 * n}, got {g12.shape}")
    return -flip(2 * n) @ signature(n) @ g12.T @ signature(m) @ flip(2 * m)


def g12_from_g21(g21, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`g21_from_g12`."""
    g21 = as_matrix(g21, "g21")
    if g21.shape != (2 * n, 2 * m):
        raise ValueError(f"g21 must be {2 * n}x{2 * m}, got {g21.shape}")
    # U J = -J U, so the map is its own inverse pattern with (m, n) swapped
    return -flip(2 * m) @ signature(m) @ g21.T @ signature(n) @ flip(2 * n)


@dataclass(frozen=True, eq=False)
class GPair:
    """The pair ``(g12, g21)``; ``g21`` is always derived from ``g12``.

    `discrepancy` is set by :func:`extract_g` to the max-abs difference,
    relative to ``max|g21|``, between the directly computed ``g21`` and the
    transform of ``g12``. It is ``None`` for pairs built from ``g12`` alone.
    """

    m: int
    n: int
    g12: np.ndarray
    g21: np.ndarray = field(init=False)
    discrepancy: float | None = None

    def __post_init__(self):
        g12 = as_matrix(self.g12, "g12")
        g12.setflags(write=False)
        g21 = g21_from_g12(g12, self.m, self.n)
        g21.setflags(write=False)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "g12", g12)
        object.__setattr__(self, "g21", g21)


def _correction(rows_top: int, cols: int, lower: np.ndarray) -> np.ndarray:
    top = np.hstack([np.ones((rows_top, cols)), np.zeros((rows_top, cols))])
    bottom = np.hstack([lower, np.zeros_like(lower)])
    return np.vstack([top, bottom]).astype(np.complex128)


def extract_from_inverse(ss: StructuredSet, r: np.ndarray) -> GPair:
    m, n = ss.sym.m, ss.sym.n
    g12 = 1j * ss.pi_hat1 @ r @ ss.pi2 - 1j * _correction(m, n, ss.kb.k12)
    g21_direct = 1j * ss.pi_hat2 @ r @ ss.pi1 - 1j * _correction(n, m, ss.kb.k11)
    gp = GPair(m, n, g12)
    scale = max(np.abs(g21_direct).max(), np.finfo(float).tiny)
    disc = float(np.abs(gp.g21 - g21_direct).max() / scale)
    return GPair(m, n, g12, discrepancy=disc)


def extract_g(sym: TbtSymbol, max_condition: float = np.inf) -> GPair:
    """Compute ``g12 = i Pi_hat_1 T^{-1} Pi_2 - i [[1_m 1_n^*, 0], [K12, 0]]``.

    ``g21`` is also computed from its own definition and compared with the
    transform of ``g12``; the mismatch is stored in ``GPair.discrepancy``.

    Raises
    ------
    SingularMatrixError
        If ``T`` is singular to working precision.
    np.linalg.LinAlgError
        If the condition estimate of ``T`` exceeds `max_condition`.
    """
    ss = structured_set(sym)
    if np.isfinite(max_condition):
        kappa = condition_estimate(ss.t)
        if kappa > max_condition:
            raise np.linalg.LinAlgError(
                f"T is too ill-conditioned: cond_1 ~ {kappa:.3e} > {max_condition:.1e}"
            )
    return extract_from_inverse(ss, inverse(ss.t))


def gammas(sym: TbtSymbol):
    """Return ``(Gamma_1, Gamma_hat_1, Gamma_2, Gamma_hat_2)`` with ``Gamma_p = R Pi_p``."""
    ss = structured_set(sym)
    r = inverse(ss.t)
    return r @ ss.pi1, ss.pi_hat1 @ r, r @ ss.pi2, ss.pi_hat2 @ r
