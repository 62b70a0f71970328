"""Structural matrices attached to a TBT symbol and the operator identities.

For a TBT matrix ``T`` with ``n`` blocks of order ``m`` the two displacement
operators ``A_1`` (outer, block lower-triangular) and ``A_2`` (inner, block
diagonal) satisfy

    A_p T - T A_p^* = i Pi_p Pi_hat_p,   p = 1, 2,

with ``Pi_1 = [M11 M31]``, ``Pi_hat_1 = [M21; M41]`` of width ``2m`` and
``Pi_2 = [M12 M32]``, ``Pi_hat_2 = [M22; M42]`` of width ``2n``. The
row ``K`` and the blocks ``K11``, ``K12`` close the auxiliary identities
for ``M41`` and ``M42``. Everything is materialized densely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symbol import TbtSymbol, assemble

HALF_I = 0.5j
POLE_GUARD = 1e-8


class PoleError(ValueError):
    """Raised when a point lies within the pole guard of a rational map."""


def integration_matrix(k: int) -> np.ndarray:
    # i/2 on the diagonal, i strictly below, 0 above
    a = np.tril(np.full((k, k), 1j, dtype=np.complex128), -1)
    a[np.diag_indices(k)] = HALF_I
    return a


def build_a(m: int, n: int):
    """Return ``(A1, A2, calA1, calA2)``.

    ``calA1`` (order n) and ``calA2`` (order m) are the scalar integration
    matrices; ``A1 = calA1 (x) I_m`` and ``A2 = I_n (x) calA2``.
    """
    cal_a1 = integration_matrix(n)
    cal_a2 = integration_matrix(m)
    a1 = np.kron(cal_a1, np.eye(m))
    a2 = np.kron(np.eye(n), cal_a2)
    return a1, a2, cal_a1, cal_a2


def flip(r: int) -> np.ndarray:
    """The anti-identity ``U_r`` of order `r`."""
    if r < 1:
        raise ValueError("flip order must be positive")
    return np.eye(r, dtype=np.complex128)[::-1].copy()


def signature(r: int) -> np.ndarray:
    """``J_{2r} = diag(I_r, -I_r)``, of order ``2r``."""
    if r < 1:
        raise ValueError("signature half-order must be positive")
    return np.diag(np.r_[np.ones(r), -np.ones(r)]).astype(np.complex128)


def flip_signature(r: int) -> np.ndarray:
    """``J_{2r} U_{2r}``, the factor shared by the g-transform and skew form."""
    return signature(r) @ flip(2 * r)


def projectors(m: int, n: int):
    """``P1`` onto the first ``2m`` coordinates of ``C^{2(m+n)}``, and ``P2 = I - P1``."""
    d = np.r_[np.ones(2 * m), np.zeros(2 * n)]
    return np.diag(d).astype(np.complex128), np.diag(1.0 - d).astype(np.complex128)


@dataclass(frozen=True)
class MBlocks:
    m11: np.ndarray  # mn x m
    m21: np.ndarray  # m x mn
    m31: np.ndarray  # mn x m
    m41: np.ndarray  # m x mn
    m12: np.ndarray  # mn x n
    m22: np.ndarray  # n x mn
    m32: np.ndarray  # mn x n
    m42: np.ndarray  # n x mn


@dataclass(frozen=True)
class KBlocks:
    k: np.ndarray  # 1 x mn
    k11: np.ndarray  # n x m
    k12: np.ndarray  # m x n


def _half_cumsum(first: np.ndarray, steps: np.ndarray, axis: int) -> np.ndarray:
    """``first/2``, ``first/2 + steps[0]``, ``first/2 + steps[0] + steps[1]``, ...

    `steps` holds the increments along `axis`; the result has one more slice.
    """
    shape = list(steps.shape)
    shape[axis] = 1
    zero = np.zeros(shape, dtype=np.complex128)
    return 0.5 * np.expand_dims(first, axis) + np.concatenate(
        [zero, np.cumsum(steps, axis=axis)], axis=axis
    )


def _m12_col(sym: TbtSymbol, r: int) -> np.ndarray:
    """``M12^(r)``: column with entries ``t_r^(0)/2 + sum_{s=1}^{j-1} t_r^(s)``."""
    row = sym.coeffs[r + sym.n - 1]
    return _half_cumsum(row[sym.m - 1], row[sym.m:], 0).reshape(sym.m, 1)


def _m42_row(sym: TbtSymbol, r: int) -> np.ndarray:
    """``M42^(r)``: row with entries ``t_r^(0)/2 + sum_{s=1}^{l-1} t_r^(-s)``."""
    row = sym.coeffs[r + sym.n - 1]
    return _half_cumsum(row[sym.m - 1], row[: sym.m - 1][::-1], 0).reshape(1, sym.m)


def build_m_blocks(sym: TbtSymbol) -> MBlocks:
    m, n = sym.m, sym.n
    blocks = np.stack([sym.block(r) for r in range(-(n - 1), n)])  # index r + n - 1
    t0 = blocks[n - 1]
    m11 = _half_cumsum(t0, blocks[n:], 0).reshape(m * n, m)
    m41 = np.hstack(list(_half_cumsum(t0, blocks[: n - 1][::-1], 0)))
    m21 = np.tile(np.eye(m, dtype=np.complex128), (1, n))

    cols = {r: _m12_col(sym, r) for r in range(-(n - 1), n)}
    rows = {r: _m42_row(sym, r) for r in range(-(n - 1), n)}
    m12 = np.block([[cols[i - k] for k in range(n)] for i in range(n)])
    m42 = np.block([[rows[i - k] for k in range(n)] for i in range(n)])
    m22 = np.kron(np.eye(n), np.ones((1, m))).astype(np.complex128)
    return MBlocks(m11, m21, m21.conj().T, m41, m12, m22, m22.conj().T, m42)


def build_k_blocks(sym: TbtSymbol) -> KBlocks:
    n = sym.n
    rows = np.stack([_m42_row(sym, r)[0] for r in range(-(n - 1), n)])  # (2n-1, m)
    cols = np.stack([_m12_col(sym, r)[:, 0] for r in range(-(n - 1), n)])  # (2n-1, m)
    k = _half_cumsum(rows[n - 1], rows[: n - 1][::-1], 0).reshape(1, -1)
    k11 = _half_cumsum(rows[n - 1], rows[n:], 0)
    k12 = _half_cumsum(cols[n - 1], cols[: n - 1][::-1], 0).T
    return KBlocks(k, k11, k12)


def _check_p(p: int) -> None:
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p!r}")


def pi_from_blocks(mb: MBlocks, p: int):
    _check_p(p)
    if p == 1:
        return np.hstack([mb.m11, mb.m31]), np.vstack([mb.m21, mb.m41])
    return np.hstack([mb.m12, mb.m32]), np.vstack([mb.m22, mb.m42])


def build_pi(sym: TbtSymbol, p: int):
    """Return ``(Pi_p, Pi_hat_p)`` for ``p`` in {1, 2}."""
    _check_p(p)
    return pi_from_blocks(build_m_blocks(sym), p)


@dataclass(frozen=True)
class StructuredSet:
    """All structural matrices of one symbol, built once."""

    sym: TbtSymbol
    t: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    cal_a1: np.ndarray
    cal_a2: np.ndarray
    mb: MBlocks
    kb: KBlocks
    pi1: np.ndarray
    pi_hat1: np.ndarray
    pi2: np.ndarray
    pi_hat2: np.ndarray
    q1: np.ndarray  # n x mn, K11 M21 + 1_n K
    q2: np.ndarray  # m x mn, K12 M22 + 1_m K
    p1: np.ndarray
    p2: np.ndarray

    def a(self, p: int) -> np.ndarray:
        _check_p(p)
        return self.a1 if p == 1 else self.a2

    def pi(self, p: int):
        _check_p(p)
        return (self.pi1, self.pi_hat1) if p == 1 else (self.pi2, self.pi_hat2)


def structured_set(sym: TbtSymbol) -> StructuredSet:
    m, n = sym.m, sym.n
    a1, a2, cal_a1, cal_a2 = build_a(m, n)
    mb = build_m_blocks(sym)
    kb = build_k_blocks(sym)
    pi1, pi_hat1 = pi_from_blocks(mb, 1)
    pi2, pi_hat2 = pi_from_blocks(mb, 2)
    q1 = kb.k11 @ mb.m21 + np.ones((n, 1)) @ kb.k
    q2 = kb.k12 @ mb.m22 + np.ones((m, 1)) @ kb.k
    p1, p2 = projectors(m, n)
    return StructuredSet(
        sym, assemble(sym), a1, a2, cal_a1, cal_a2, mb, kb,
        pi1, pi_hat1, pi2, pi_hat2, q1, q2, p1, p2,
    )


def displacement(sym: TbtSymbol, p: int) -> np.ndarray:
    """``A_p T - T A_p^*``."""
    _check_p(p)
    a1, a2, _, _ = build_a(sym.m, sym.n)
    a = a1 if p == 1 else a2
    t = assemble(sym)
    return a @ t - t @ a.conj().T


def verify_identity(sym: TbtSymbol, p: int) -> float:
    """Relative Frobenius residual of ``A_p T - T A_p^* = i Pi_p Pi_hat_p``."""
    _check_p(p)
    pi, pi_hat = build_pi(sym, p)
    t = assemble(sym)
    res = displacement(sym, p) - 1j * pi @ pi_hat
    return float(np.linalg.norm(res) / np.linalg.norm(t))


def verify_aux_identity(sym: TbtSymbol, s: int, p: int) -> float:
    """Relative residual of ``calA_s M4p - M4p A_s^* = i Q_s``, (s, p) in {(1, 2), (2, 1)}."""
    if (s, p) not in ((1, 2), (2, 1)):
        raise ValueError(f"(s, p) must be (1, 2) or (2, 1), got {(s, p)!r}")
    ss = structured_set(sym)
    if s == 1:
        lhs = ss.cal_a1 @ ss.mb.m42 - ss.mb.m42 @ ss.a1.conj().T
        res, ref = lhs - 1j * ss.q1, ss.mb.m42
    else:
        lhs = ss.cal_a2 @ ss.mb.m41 - ss.mb.m41 @ ss.a2.conj().T
        res, ref = lhs - 1j * ss.q2, ss.mb.m41
    return float(np.linalg.norm(res) / np.linalg.norm(ref))


def mobius_psi(lam: complex) -> complex:
    """``(lam + i/2) / (lam - i/2)``."""
    lam = complex(lam)
    if abs(lam - HALF_I) <= POLE_GUARD:
        raise PoleError(f"psi has a pole at i/2, got {lam}")
    return (lam + HALF_I) / (lam - HALF_I)


def mobius_phi(xi: complex) -> complex:
    """Inverse of :func:`mobius_psi`: ``(i/2) (xi + 1) / (xi - 1)``."""
    xi = complex(xi)
    if abs(xi - 1.0) <= POLE_GUARD:
        raise PoleError(f"phi has a pole at 1, got {xi}")
    return HALF_I * (xi + 1.0) / (xi - 1.0)


def monomials(y1: complex, y2: complex, m: int, n: int) -> np.ndarray:
    """``h(y)``: entry ``m(i-1)+j`` is ``y1^(i-1) y2^(j-1)``."""
    return np.kron(complex(y1) ** np.arange(n), complex(y2) ** np.arange(m))


def resolvent_col(lam1: complex, lam2: complex, m: int, n: int) -> np.ndarray:
    """Closed form of ``(A2 - lam2 I)^{-1} (A1 - lam1 I)^{-1} 1``."""
    for lam in (lam1, lam2):
        if abs(complex(lam) - HALF_I) <= POLE_GUARD:
            raise PoleError(f"column resolvent has a pole at i/2, got {lam}")
    scale = 1.0 / ((HALF_I - complex(lam1)) * (HALF_I - complex(lam2)))
    return scale * monomials(mobius_psi(lam1), mobius_psi(lam2), m, n)


def resolvent_row(mu1: complex, mu2: complex, m: int, n: int) -> np.ndarray:
    """Closed form of ``1^* (A1^* - mu1 I)^{-1} (A2^* - mu2 I)^{-1}``."""
    mu1, mu2 = complex(mu1), complex(mu2)
    for mu in (mu1, mu2):
        if abs(mu + HALF_I) <= POLE_GUARD:
            raise PoleError(f"row resolvent has a pole at -i/2, got {mu}")
    # (mu - i/2)/(mu + i/2) = psi(-mu)
    scale = 1.0 / ((mu1 + HALF_I) * (mu2 + HALF_I))
    return scale * monomials(mobius_psi(-mu1), mobius_psi(-mu2), m, n)
