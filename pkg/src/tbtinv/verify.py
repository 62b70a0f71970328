"""End-to-end workflows producing :class:`ReconstructionReport` records.

* :func:`roundtrip` -- symbol -> g12 -> theta -> R, compared with ``T^{-1}``.
* :func:`characterize` -- arbitrary g12 -> R; if R is well conditioned,
  measure how far ``R^{-1}`` is from TBT structure.
* :func:`invariant_suite` -- the individual structural identities.

Reports are plain data. Failures inside a workflow either raise
:class:`StageError` (roundtrip) or are recorded with ``status`` and
``stage`` (characterize); numeric fields past a failed gate stay ``None``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .extraction import GPair, extract_from_inverse
from .linalg import condition_estimate, inverse, numerical_rank, pfaffian
from .reconstruction import (
    GridConfig,
    GridError,
    omega,
    recover_r_detailed,
    u_direct,
    u_hat,
    u_hat_direct,
    u_row,
)
from .structured import (
    HALF_I,
    displacement,
    resolvent_col,
    resolvent_row,
    structured_set,
    verify_aux_identity,
    verify_identity,
)
from .symbol import TbtSymbol, project_tbt
from .theta import (
    IntegrityError,
    assemble_g,
    pfaffian_leading_coefficient,
    q_poly,
    branch_scalar,
    skew,
    theta_poly,
    theta_tilde,
)

CHECKS = (
    "identities",
    "ranks",
    "g21",
    "skew",
    "pfaffian",
    "theta",
    "theta_factor",
    "uhat",
    "annihilation",
    "branch",
    "branch_scalar",
    "omega",
    "roundtrip",
)
SYMBOL_CHECKS = {"identities", "ranks", "g21", "theta_factor", "uhat", "omega", "roundtrip"}


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-13
    rank: float = 1e-10
    g21: float = 1e-12
    skew: float = 1e-12
    pfaffian: float = 1e-10
    theta_leading: float = 1e-6
    theta_factor: float = 1e-9
    uhat: float = 1e-8
    annihilation: float = 1e-10
    branch: float = 1e-9
    branch_scalar: float = 1e-9
    omega: float = 1e-8
    roundtrip: float = 1e-7
    tbt_deviation: float = 1e-6
    max_condition_t: float = 1e10
    max_condition_r: float = 1e6
    samples: int = 10
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            if f.name in ("samples", "seed"):
                continue
            if not getattr(self, f.name) > 0:
                raise ValueError(f"tolerance {f.name} must be positive")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")

    def scaled(self, factor: float) -> "Tolerances":
        """Multiply every accuracy tolerance (not the condition gates) by `factor`."""
        skip = {"max_condition_t", "max_condition_r", "samples", "seed"}
        kw = {f.name: getattr(self, f.name) * (1 if f.name in skip else factor) for f in fields(self)}
        return Tolerances(**kw)


class StageError(RuntimeError):
    """A workflow stage failed; `stage` names it and `__cause__` holds the error."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


@dataclass
class ReconstructionReport:
    workflow: str
    m: int
    n: int
    status: str = "ok"
    stage: str | None = None
    message: str | None = None
    identity_residual_p1: float | None = None
    identity_residual_p2: float | None = None
    aux_residual_12: float | None = None
    aux_residual_21: float | None = None
    displacement_rank_1: int | None = None
    displacement_rank_2: int | None = None
    g21_discrepancy: float | None = None
    skew_asymmetry: float | None = None
    pfaffian_det_gap: float | None = None
    theta_leading_coeff: complex | None = None
    theta_factor_residual: float | None = None
    uhat_gap: float | None = None
    u_gap: float | None = None
    annihilation_residual: float | None = None
    omega_branch_gap: float | None = None
    branch_scalar_residual: float | None = None
    omega_dense_gap: float | None = None
    roundtrip_error: float | None = None
    condition_t: float | None = None
    condition_r: float | None = None
    tbt_deviation: float | None = None
    branch_used: int | None = None
    grid_attempts: int | None = None
    passes: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok" and bool(self.passes) and all(self.passes.values())

    def to_dict(self) -> dict:
        """Flat JSON-ready dict; non-finite floats and ``None`` become sentinel strings."""
        out = {}
        for key, value in asdict(self).items():
            if key == "passes":
                continue
            out[key] = _json_value(value)
        for name, flag in self.passes.items():
            out[f"pass_{name}"] = bool(flag)
        out["pass"] = self.ok
        return out


def _json_value(value):
    if value is None:
        return "n/a"
    if isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_json_value(float(value.real)), _json_value(float(value.imag))]
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _sample_points(rng: np.random.Generator, count: int) -> list[tuple[complex, complex]]:
    """Random complex pairs kept away from the resolvent poles ``+-i/2``."""
    pts = []
    while len(pts) < count:
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        if min(abs(z - HALF_I).min(), abs(z + HALF_I).min()) > 0.1:
            pts.append((complex(z[0]), complex(z[1])))
    return pts


def roundtrip(
    sym: TbtSymbol, tolerances: Tolerances | None = None, grid: GridConfig | None = None
) -> ReconstructionReport:
    """Extract ``g12`` from `sym`, rebuild ``R`` from it, compare with ``T^{-1}``.

    Raises
    ------
    StageError
        With stage ``inverse``, ``theta`` or ``recover``.
    """
    tol = tolerances or Tolerances()
    rep = ReconstructionReport("roundtrip", sym.m, sym.n)
    ss = structured_set(sym)
    try:
        rep.condition_t = condition_estimate(ss.t)
        if not rep.condition_t <= tol.max_condition_t:
            raise np.linalg.LinAlgError(
                f"cond_1(T) ~ {rep.condition_t:.3e} exceeds {tol.max_condition_t:.1e}"
            )
        r_true = inverse(ss.t)
        gp = extract_from_inverse(ss, r_true)
    except np.linalg.LinAlgError as exc:
        raise StageError("inverse", exc) from exc
    rep.g21_discrepancy = gp.discrepancy
    try:
        theta = theta_poly(gp)
    except (IntegrityError, np.linalg.LinAlgError) as exc:
        raise StageError("theta", exc) from exc
    rep.theta_leading_coeff = pfaffian_leading_coefficient(gp)
    try:
        rec = recover_r_detailed(gp, theta, grid)
    except np.linalg.LinAlgError as exc:
        raise StageError("recover", exc) from exc
    rep.branch_used, rep.grid_attempts = rec.p, rec.attempts
    rep.condition_r = condition_estimate(rec.r)
    rep.roundtrip_error = float(np.linalg.norm(rec.r - r_true) / np.linalg.norm(r_true))
    rep.passes = {
        "g21": rep.g21_discrepancy <= tol.g21,
        "roundtrip": rep.roundtrip_error <= tol.roundtrip,
    }
    return rep


def characterize(
    g12, m: int, n: int, tolerances: Tolerances | None = None, grid: GridConfig | None = None
) -> ReconstructionReport:
    """Recover ``R`` from an arbitrary ``g12`` and test that ``R^{-1}`` is TBT.

    Never raises for mathematical failures: a non-realizable ``g12`` gives
    ``status="rejected", stage="theta"``; a failed grid search gives
    ``stage="recover"``; ``cond(R)`` above ``max_condition_r`` gives
    ``stage="gate"``. Rejected reports carry no pass flags.
    """
    tol = tolerances or Tolerances()
    gp = GPair(m, n, g12)
    rep = ReconstructionReport("characterize", m, n)

    def reject(stage, exc):
        rep.status, rep.stage, rep.message = "rejected", stage, f"{type(exc).__name__}: {exc}"
        return rep

    try:
        theta = theta_poly(gp)
        rep.theta_leading_coeff = pfaffian_leading_coefficient(gp)
    except (IntegrityError, np.linalg.LinAlgError) as exc:
        return reject("theta", exc)
    try:
        rec = recover_r_detailed(gp, theta, grid)
    except np.linalg.LinAlgError as exc:
        return reject("recover", exc)
    rep.branch_used, rep.grid_attempts = rec.p, rec.attempts
    rep.condition_r = condition_estimate(rec.r)
    if not rep.condition_r <= tol.max_condition_r:
        return reject(
            "gate",
            np.linalg.LinAlgError(
                f"cond_1(R) ~ {rep.condition_r:.3e} exceeds {tol.max_condition_r:.1e}; "
                "the invertibility precondition is not met"
            ),
        )
    t = inverse(rec.r)
    rep.condition_t = condition_estimate(t)
    _, rep.tbt_deviation = project_tbt(t, m, n)
    rep.passes = {"tbt_deviation": rep.tbt_deviation <= tol.tbt_deviation}
    return rep


def random_g12(m: int, n: int, seed: int = 0) -> np.ndarray:
    """2m x 2n matrix with entries uniform in the closed unit disc."""
    rng = np.random.default_rng(seed)
    radius = np.sqrt(rng.uniform(size=(2 * m, 2 * n)))
    angle = rng.uniform(0, 2 * np.pi, size=(2 * m, 2 * n))
    return radius * np.exp(1j * angle)


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), np.finfo(float).tiny))


def invariant_suite(
    sym: TbtSymbol | None = None,
    gpair: GPair | None = None,
    selection=None,
    tolerances: Tolerances | None = None,
    grid: GridConfig | None = None,
) -> ReconstructionReport:
    """Run the selected structural checks and collect their metrics.

    With only `sym`, the GPair is extracted from it. With both, the given
    GPair is checked against the symbol, which localizes corruption of
    ``g12``. With only `gpair`, checks needing the symbol are skipped.
    Failures are report entries, never exceptions.
    """
    if sym is None and gpair is None:
        raise ValueError("need a symbol, a GPair, or both")
    tol = tolerances or Tolerances()
    selected = list(CHECKS) if selection is None else list(selection)
    unknown = set(selected) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    if sym is None:
        selected = [c for c in selected if c not in SYMBOL_CHECKS]
    if gpair is not None and "g21" in selected and gpair.discrepancy is None:
        selected.remove("g21")

    m, n = (sym.m, sym.n) if sym is not None else (gpair.m, gpair.n)
    rep = ReconstructionReport("verify", m, n)
    rng = np.random.default_rng(tol.seed)
    passes = {}

    r_true = None
    try:
        if sym is not None:
            ss = structured_set(sym)
            rep.condition_t = condition_estimate(ss.t)
            r_true = inverse(ss.t)
            if gpair is None:
                gpair = extract_from_inverse(ss, r_true)
    except np.linalg.LinAlgError as exc:
        rep.status, rep.stage, rep.message = "failed", "inverse", str(exc)
        return rep

    theta = None
    if any(c in selected for c in ("theta", "theta_factor", "uhat", "annihilation", "branch", "omega", "roundtrip")):
        try:
            theta = theta_poly(gpair)
        except (IntegrityError, np.linalg.LinAlgError) as exc:
            rep.status, rep.stage, rep.message = "failed", "theta", str(exc)
            passes["theta"] = False
            selected = [c for c in selected if c in ("identities", "ranks", "g21", "skew", "pfaffian", "branch_scalar")]

    lam_pts = _sample_points(rng, tol.samples)
    mu_pts = _sample_points(rng, tol.samples)

    if "identities" in selected:
        rep.identity_residual_p1 = verify_identity(sym, 1)
        rep.identity_residual_p2 = verify_identity(sym, 2)
        rep.aux_residual_12 = verify_aux_identity(sym, 1, 2)
        rep.aux_residual_21 = verify_aux_identity(sym, 2, 1)
        passes["identities"] = max(
            rep.identity_residual_p1, rep.identity_residual_p2, rep.aux_residual_12, rep.aux_residual_21
        ) <= tol.identity
    if "ranks" in selected:
        rep.displacement_rank_1 = numerical_rank(displacement(sym, 1), tol.rank)
        rep.displacement_rank_2 = numerical_rank(displacement(sym, 2), tol.rank)
        passes["ranks"] = rep.displacement_rank_1 <= 2 * m and rep.displacement_rank_2 <= 2 * n
    if "g21" in selected:
        rep.g21_discrepancy = gpair.discrepancy
        passes["g21"] = gpair.discrepancy <= tol.g21
    if "skew" in selected:
        try:
            rep.skew_asymmetry = max(float(np.abs(s + s.T).max()) for s in (skew(gpair, *pt) for pt in lam_pts))
            passes["skew"] = rep.skew_asymmetry <= tol.skew
        except IntegrityError as exc:
            rep.message = str(exc)
            passes["skew"] = False
    if "pfaffian" in selected:
        gaps = []
        for pt in lam_pts:
            try:
                s = skew(gpair, *pt)
            except IntegrityError:
                gaps.append(np.inf)
                continue
            d = np.linalg.det(assemble_g(gpair, *pt))
            gaps.append(abs(pfaffian(s) ** 2 - d) / abs(d))
        rep.pfaffian_det_gap = max(gaps)
        passes["pfaffian"] = rep.pfaffian_det_gap <= tol.pfaffian
    if "theta" in selected:
        rep.theta_leading_coeff = pfaffian_leading_coefficient(gpair)
        lead = rep.theta_leading_coeff
        passes["theta"] = (
            min(abs(lead - 1), abs(lead + 1)) <= tol.theta_leading and theta.coeffs[n, m] == -1
        )
    if "theta_factor" in selected:
        q = q_poly(m, n)
        rep.theta_factor_residual = max(
            abs(theta(*pt) + q(*pt) * (1 + theta_tilde(sym, *pt, r=r_true))) / (1 + abs(q(*pt)))
            for pt in lam_pts
        )
        passes["theta_factor"] = rep.theta_factor_residual <= tol.theta_factor
    if "uhat" in selected:
        rep.uhat_gap = max(_rel(u_hat(gpair, theta, *pt), u_hat_direct(sym, *pt, r=r_true)) for pt in lam_pts)
        rep.u_gap = max(_rel(u_row(gpair, theta, *pt), u_direct(sym, *pt, r=r_true)) for pt in mu_pts)
        passes["uhat"] = max(rep.uhat_gap, rep.u_gap) <= tol.uhat
    if "annihilation" in selected:
        ell = np.r_[np.ones(m), np.zeros(m), -np.ones(n), np.zeros(n)]
        vals = [abs(ell @ u_hat(gpair, theta, *pt)) for pt in lam_pts]
        rep.annihilation_residual = max(vals)
        passes["annihilation"] = rep.annihilation_residual <= tol.annihilation
    if "branch" in selected:
        gaps = []
        for lam, mu in zip(lam_pts, mu_pts):
            w1 = omega(gpair, theta, lam, mu, 1)
            w2 = omega(gpair, theta, lam, mu, 2)
            gaps.append(abs(w1 - w2) / (1 + abs(w1)))
        rep.omega_branch_gap = max(gaps)
        passes["branch"] = rep.omega_branch_gap <= tol.branch
    if "branch_scalar" in selected:
        vals = [abs(branch_scalar(gpair, *pt)) for pt in lam_pts]
        rep.branch_scalar_residual = max(vals)
        passes["branch_scalar"] = rep.branch_scalar_residual <= tol.branch_scalar
    if "omega" in selected:
        gaps = []
        for lam, mu in zip(lam_pts, mu_pts):
            dense = resolvent_row(*mu, m, n) @ r_true @ resolvent_col(*lam, m, n)
            gaps.append(abs(omega(gpair, theta, lam, mu, 1) - dense) / abs(dense))
        rep.omega_dense_gap = max(gaps)
        passes["omega"] = rep.omega_dense_gap <= tol.omega
    if "roundtrip" in selected:
        try:
            rec = recover_r_detailed(gpair, theta, grid)
            rep.branch_used, rep.grid_attempts = rec.p, rec.attempts
            rep.condition_r = condition_estimate(rec.r)
            rep.roundtrip_error = float(np.linalg.norm(rec.r - r_true) / np.linalg.norm(r_true))
            passes["roundtrip"] = rep.roundtrip_error <= tol.roundtrip
        except GridError as exc:
            rep.message = str(exc)
            passes["roundtrip"] = False

    rep.passes = {k: bool(v) for k, v in passes.items()}
    return rep
