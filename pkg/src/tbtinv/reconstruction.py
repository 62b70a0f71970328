"""Recovery of ``omega``, ``rho`` and the full inverse ``R`` from a GPair.

``omega(lam, mu) = 1^* (A1^* - mu1)^{-1} (A2^* - mu2)^{-1} R (A2 - lam2)^{-1} (A1 - lam1)^{-1} 1``
is available from ``g12`` alone through ``u_hat`` / ``u_row``. Sampling it on
tensor grids in ``lam`` and ``mu`` and undoing the two resolvent
(Vandermonde-type) factors returns ``R`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extraction import GPair
from .linalg import condition_estimate, inverse, lu_solve
from .structured import (
    HALF_I,
    PoleError,
    flip_signature,
    mobius_phi,
    mobius_psi,
    monomials,
    projectors,
    resolvent_col,
    resolvent_row,
    structured_set,
)
from .symbol import TbtSymbol
from .theta import BivarPoly, assemble_g, rhs_vector

BRANCH_POLE_TOL = 1e-10


def _check_off(value: complex, pole: complex, what: str, guard: float = 1e-8) -> None:
    if abs(complex(value) - pole) <= guard:
        raise PoleError(f"{what} = {value} is at the pole {pole}")


def _scalar_col(lam: complex, k: int) -> np.ndarray:
    """``(calA - lam I_k)^{-1} 1_k`` for the order-k integration matrix."""
    return mobius_psi(lam) ** np.arange(k) / (HALF_I - lam)


def _scalar_row(mu: complex, k: int) -> np.ndarray:
    """``1_k^* (calA^* - mu I_k)^{-1}``."""
    _check_off(mu, -HALF_I, "mu")
    return -(mobius_psi(-mu) ** np.arange(k)) / (mu + HALF_I)


def _sign_block(m: int, n: int) -> np.ndarray:
    d = np.zeros((2 * (m + n), 2 * (m + n)), dtype=np.complex128)
    d[: 2 * m, : 2 * m] = flip_signature(m)
    d[2 * m:, 2 * m:] = flip_signature(n)
    return d


def u_hat(gp: GPair, theta: BivarPoly, lam1: complex, lam2: complex) -> np.ndarray:
    """``-i (lam1 - i/2)^{-n} (lam2 - i/2)^{-m} theta(lam) G(lam)^{-1} col[0, 1_m, 0, 1_n]``."""
    m, n = gp.m, gp.n
    _check_off(lam1, HALF_I, "lam1")
    _check_off(lam2, HALF_I, "lam2")
    scale = -1j * theta(lam1, lam2) / ((lam1 - HALF_I) ** n * (lam2 - HALF_I) ** m)
    return scale * lu_solve(assemble_g(gp, lam1, lam2), rhs_vector(m, n))


def u_row(gp: GPair, theta: BivarPoly, mu1: complex, mu2: complex) -> np.ndarray:
    """``u(mu)``: the row partner of :func:`u_hat`, obtained by the flip/signature symmetry."""
    m, n = gp.m, gp.n
    _check_off(mu1, -HALF_I, "mu1")
    _check_off(mu2, -HALF_I, "mu2")
    scale = mobius_psi(-mu1) ** n * mobius_psi(-mu2) ** m
    return scale * (u_hat(gp, theta, mu1, mu2) @ _sign_block(m, n))


def u_hat_direct(sym: TbtSymbol, lam1: complex, lam2: complex, r: np.ndarray | None = None) -> np.ndarray:
    """``u_hat`` from its definition through ``Gamma_hat = Pi_hat R``.

    Needs the symbol, so it serves as an oracle for :func:`u_hat`.
    """
    ss = structured_set(sym)
    m, n = sym.m, sym.n
    if r is None:
        r = inverse(ss.t)
    gamma_hat = np.vstack([ss.pi_hat1, ss.pi_hat2]) @ r
    corr = np.concatenate([np.zeros(m), _scalar_col(lam2, m), np.zeros(n), _scalar_col(lam1, n)])
    return gamma_hat @ resolvent_col(lam1, lam2, m, n) + 1j * corr


def u_direct(sym: TbtSymbol, mu1: complex, mu2: complex, r: np.ndarray | None = None) -> np.ndarray:
    """``u`` from its definition through ``Gamma = R Pi``."""
    ss = structured_set(sym)
    m, n = sym.m, sym.n
    if r is None:
        r = inverse(ss.t)
    gamma = r @ np.hstack([ss.pi1, ss.pi2])
    corr = np.concatenate([_scalar_row(mu2, m), np.zeros(m), _scalar_row(mu1, n), np.zeros(n)])
    return resolvent_row(mu1, mu2, m, n) @ gamma - 1j * corr


def omega(gp: GPair, theta: BivarPoly, lam, mu, p: int = 1) -> complex:
    """``i (lam_p - mu_p)^{-1} u(mu) P_p u_hat(lam)``."""
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p!r}")
    gap = complex(lam[p - 1]) - complex(mu[p - 1])
    if abs(gap) <= BRANCH_POLE_TOL:
        raise PoleError(f"lam_{p} == mu_{p}; use the other branch or move the point")
    proj = projectors(gp.m, gp.n)[p - 1]
    return complex(1j / gap * (u_row(gp, theta, *mu) @ proj @ u_hat(gp, theta, *lam)))


@dataclass(frozen=True)
class OmegaEval:
    lam: tuple[complex, complex]
    mu: tuple[complex, complex]
    value: complex
    p_used: int


def omega_eval(gp: GPair, theta: BivarPoly, lam, mu, min_gap: float = 0.05) -> OmegaEval:
    """Evaluate ``omega`` on branch 1, falling back to branch 2 near ``lam1 = mu1``."""
    lam = (complex(lam[0]), complex(lam[1]))
    mu = (complex(mu[0]), complex(mu[1]))
    p = 1 if abs(lam[0] - mu[0]) > min_gap else 2
    return OmegaEval(lam, mu, omega(gp, theta, lam, mu, p), p)


@dataclass(frozen=True)
class GridConfig:
    """Node placement for :func:`recover_r`.

    ``lam`` nodes are the preimages under ``psi`` of points on the circle of
    radius `radius_lambda`; ``mu`` nodes those of the row variable
    ``(mu - i/2)/(mu + i/2)`` on radius `radius_mu`.
    """

    radius_lambda: float = 0.9
    radius_mu: float = 1.1
    collision: float = 0.05
    pole_distance: float = 1e-6
    max_g_condition: float = 1e10
    max_vandermonde_condition: float = 1e10
    max_redraws: int = 8
    extra_nodes: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.radius_lambda <= 0 or self.radius_mu <= 0:
            raise ValueError("grid radii must be positive")
        if self.radius_lambda == self.radius_mu:
            raise ValueError("grid radii must be distinct")
        if self.radius_lambda == 1.0 or self.radius_mu == 1.0:
            raise ValueError("a unit radius maps nodes to infinity")
        if self.extra_nodes < 0 or self.max_redraws < 0:
            raise ValueError("extra_nodes and max_redraws must be nonnegative")


class GridError(np.linalg.LinAlgError):
    """No admissible sampling grid was found within the re-draw budget."""

    def __init__(self, message: str, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__(message + ("\n  " + "\n  ".join(diagnostics) if diagnostics else ""))


@dataclass(frozen=True, eq=False)
class Recovery:
    r: np.ndarray
    p: int
    attempts: int
    lam_nodes: tuple[np.ndarray, np.ndarray]
    mu_nodes: tuple[np.ndarray, np.ndarray]
    cond_v: float
    cond_w: float


def _circle(count: int, radius: float, offset: float) -> np.ndarray:
    return radius * np.exp(2j * np.pi * (np.arange(count) + offset) / count)


def _tensor(a: np.ndarray, b: np.ndarray) -> list[tuple[complex, complex]]:
    return [(complex(x), complex(y)) for x in a for y in b]


def _attempt(gp: GPair, theta: BivarPoly, cfg: GridConfig, offsets):
    m, n = gp.m, gp.n
    e = cfg.extra_nodes
    lam1 = np.array([mobius_phi(x) for x in _circle(n + e, cfg.radius_lambda, offsets[0])])
    lam2 = np.array([mobius_phi(x) for x in _circle(m + e, cfg.radius_lambda, offsets[1])])
    mu1 = np.array([-mobius_phi(x) for x in _circle(n + e, cfg.radius_mu, offsets[2])])
    mu2 = np.array([-mobius_phi(x) for x in _circle(m + e, cfg.radius_mu, offsets[3])])

    for name, nodes in (("lam1", lam1), ("lam2", lam2), ("mu1", mu1), ("mu2", mu2)):
        d = min(np.abs(nodes - HALF_I).min(), np.abs(nodes + HALF_I).min())
        if d <= cfg.pole_distance:
            return None, f"{name} node within {d:.1e} of +-i/2"

    gap1 = np.abs(lam1[:, None] - mu1[None, :]).min()
    gap2 = np.abs(lam2[:, None] - mu2[None, :]).min()
    if gap1 > cfg.collision:
        p = 1
    elif gap2 > cfg.collision:
        p = 2
    else:
        return None, f"lam/mu grids collide on both axes (gaps {gap1:.2e}, {gap2:.2e})"

    lam_pts, mu_pts = _tensor(lam1, lam2), _tensor(mu1, mu2)
    for pt in lam_pts + mu_pts:
        kappa = condition_estimate(assemble_g(gp, *pt))
        if not kappa < cfg.max_g_condition:
            return None, f"G{pt} has condition {kappa:.2e}"

    v = np.array([resolvent_col(*pt, m, n) for pt in lam_pts]).T
    w = np.array([resolvent_row(*pt, m, n) for pt in mu_pts])
    cond_v, cond_w = np.linalg.cond(v), np.linalg.cond(w)
    if max(cond_v, cond_w) > cfg.max_vandermonde_condition:
        return None, f"resolvent Vandermonde conditions {cond_v:.2e}, {cond_w:.2e}"

    u_hats = np.array([u_hat(gp, theta, *pt) for pt in lam_pts]).T
    u_rows = np.array([u_row(gp, theta, *pt) for pt in mu_pts])
    proj = projectors(m, n)[p - 1]
    lam_p = np.array([pt[p - 1] for pt in lam_pts])
    mu_p = np.array([pt[p - 1] for pt in mu_pts])
    omega_mat = 1j * (u_rows @ proj @ u_hats) / (lam_p[None, :] - mu_p[:, None])

    if e == 0:
        r = lu_solve(v.T, lu_solve(w, omega_mat).T).T
    else:
        x = np.linalg.lstsq(w, omega_mat, rcond=None)[0]
        r = np.linalg.lstsq(v.T, x.T, rcond=None)[0].T
    return Recovery(r, p, 0, (lam1, lam2), (mu1, mu2), float(cond_v), float(cond_w)), ""


def recover_r_detailed(gp: GPair, theta: BivarPoly, config: GridConfig | None = None) -> Recovery:
    """Like :func:`recover_r` but also returns grid diagnostics."""
    cfg = config or GridConfig()
    rng = np.random.default_rng(cfg.seed)
    offsets = (0.25, 0.25, 0.6, 0.6)
    diagnostics = []
    for attempt in range(cfg.max_redraws + 1):
        try:
            rec, why = _attempt(gp, theta, cfg, offsets)
        except np.linalg.LinAlgError as exc:
            rec, why = None, f"linear algebra failure: {exc}"
        if rec is not None:
            return Recovery(rec.r, rec.p, attempt + 1, rec.lam_nodes, rec.mu_nodes, rec.cond_v, rec.cond_w)
        diagnostics.append(f"attempt {attempt + 1}: {why}")
        offsets = tuple(rng.uniform(0.0, 1.0, 4))
    raise GridError("no admissible sampling grid found", diagnostics)


def recover_r(gp: GPair, theta: BivarPoly, config: GridConfig | None = None) -> np.ndarray:
    """Recover the ``mn x mn`` matrix ``R`` determined by ``g12``.

    ``omega`` is sampled at every pair of an ``n x m`` tensor grid in ``lam``
    and one in ``mu``; since ``omega = row(mu) R col(lam)`` with row and
    column both Kronecker products of Vandermonde vectors in Moebius
    variables, ``R = W^{-1} Omega V^{-1}``. Grids failing the pole,
    collision or conditioning screens are re-drawn deterministically.

    Raises
    ------
    GridError
        When every grid within ``config.max_redraws`` re-draws is rejected.
    """
    return recover_r_detailed(gp, theta, config).r


def rho_eval(r, y, z, m: int, n: int) -> complex:
    """``rho(y, z) = h(conj z)^* R h(y)``."""
    r = np.asarray(r, dtype=np.complex128)
    return complex(monomials(z[0], z[1], m, n) @ r @ monomials(y[0], y[1], m, n))


def rho_from_omega(gp: GPair, theta: BivarPoly, y, z, p: int | None = None) -> complex:
    """``rho(y, z)`` via ``omega`` at ``lam = phi(y)``, ``mu = -phi(z)``."""
    lam = (mobius_phi(y[0]), mobius_phi(y[1]))
    mu = (-mobius_phi(z[0]), -mobius_phi(z[1]))
    pref = (HALF_I + mu[1]) * (HALF_I + mu[0]) * (HALF_I - lam[1]) * (HALF_I - lam[0])
    if p is None:
        val = omega_eval(gp, theta, lam, mu).value
    else:
        val = omega(gp, theta, lam, mu, p)
    return complex(pref * val)
