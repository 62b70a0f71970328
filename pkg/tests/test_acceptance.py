"""Acceptance criteria, one test each.

Every test prints (and records for the terminal summary) a single
``criterion N: PASS|FAIL`` line with the worst observed metric.
"""

import time

import numpy as np

from conftest import ACCEPTANCE_LINES, SIZES, random_points
from tbtinv.extraction import extract_g, gammas
from tbtinv.linalg import inverse, numerical_rank, pfaffian
from tbtinv.reconstruction import omega, recover_r, u_direct, u_hat, u_hat_direct, u_row
from tbtinv.structured import displacement, verify_aux_identity, verify_identity
from tbtinv.symbol import TbtSymbol, assemble, random_symbol
from tbtinv.theta import assemble_g, q_poly, branch_scalar, skew, theta_poly, theta_tilde
from tbtinv.verify import characterize, random_g12

I = 1j


def record(number, ok, detail, started):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}  ({time.perf_counter() - started:.2f}s)"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


def hundred_symbols(dominance=0.0):
    for seed in range(100):
        m, n = 1 + seed % 4, 1 + (seed // 4) % 4
        yield random_symbol(m, n, seed=seed, dominance=dominance)


def instances():
    """Two dominance-4 symbols per size, with their GPair and theta."""
    for k, (m, n) in enumerate(SIZES):
        for seed in (k, 100 + k):
            sym = random_symbol(m, n, seed=seed, dominance=4)
            gp = extract_g(sym)
            yield sym, gp, theta_poly(gp)


def rel(a, b):
    return float(np.abs(np.asarray(a) - b).max() / np.abs(b).max())


def test_criterion_01_displacement_identities():
    t0 = time.perf_counter()
    worst = 0.0
    for sym in hundred_symbols():
        worst = max(
            worst,
            verify_identity(sym, 1),
            verify_identity(sym, 2),
            verify_aux_identity(sym, 1, 2),
            verify_aux_identity(sym, 2, 1),
        )
    record(1, worst <= 1e-13, f"max relative residual {worst:.2e} (<= 1e-13) over 100 symbols", t0)


def test_criterion_02_rank_bounds():
    t0 = time.perf_counter()
    bad = []
    for sym in hundred_symbols():
        r1 = numerical_rank(displacement(sym, 1), 1e-10)
        r2 = numerical_rank(displacement(sym, 2), 1e-10)
        if r1 > 2 * sym.m or r2 > 2 * sym.n:
            bad.append((sym.m, sym.n, r1, r2))
    record(2, not bad, f"{100 - len(bad)}/100 within (2m, 2n)", t0)


def test_criterion_03_g21_symmetry():
    t0 = time.perf_counter()
    worst = max(extract_g(sym).discrepancy for sym in hundred_symbols(dominance=4))
    record(3, worst <= 1e-12, f"max discrepancy {worst:.2e} (<= 1e-12) over 100 extractions", t0)


def test_criterion_04_pfaffian():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_skew = 0.0
    for k in range(50):
        order = 2 * (1 + k % 6)
        a = rng.normal(size=(order, order)) + 1j * rng.normal(size=(order, order))
        s = a - a.T
        d = np.linalg.det(s)
        worst_skew = max(worst_skew, abs(pfaffian(s) ** 2 - d) / abs(d))
    worst_g = 0.0
    for _, gp, _ in instances():
        for pt in random_points(rng, 20):
            d = np.linalg.det(assemble_g(gp, *pt))
            worst_g = max(worst_g, abs(pfaffian(skew(gp, *pt)) ** 2 - d) / abs(d))
    worst = max(worst_skew, worst_g)
    record(4, worst <= 1e-10, f"random skew {worst_skew:.2e}, G(lambda) {worst_g:.2e} (<= 1e-10)", t0)


def test_criterion_05_theta_normalization_and_factorization():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    exact = True
    worst = 0.0
    for sym, gp, th in instances():
        exact &= th.coeffs[sym.n, sym.m] == -1
        q = q_poly(sym.m, sym.n)
        r = inverse(assemble(sym))
        for pt in random_points(rng, 10):
            res = abs(th(*pt) + q(*pt) * (1 + theta_tilde(sym, *pt, r=r))) / (1 + abs(q(*pt)))
            worst = max(worst, res)
    ok = exact and worst <= 1e-9
    record(5, ok, f"leading coeff exactly -1: {exact}; factorization residual {worst:.2e} (<= 1e-9)", t0)


def test_criterion_06_recovery_formulas():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst_uh = worst_u = worst_ann = 0.0
    for sym, gp, th in instances():
        m, n = sym.m, sym.n
        r = inverse(assemble(sym))
        ell = np.r_[np.ones(m), np.zeros(m), -np.ones(n), np.zeros(n)]
        for pt in random_points(rng, 10):
            uh = u_hat(gp, th, *pt)
            worst_uh = max(worst_uh, rel(uh, u_hat_direct(sym, *pt, r=r)))
            worst_u = max(worst_u, rel(u_row(gp, th, *pt), u_direct(sym, *pt, r=r)))
            worst_ann = max(worst_ann, abs(ell @ uh))
    ok = worst_uh <= 1e-8 and worst_u <= 1e-8 and worst_ann <= 1e-10
    record(6, ok, f"u_hat {worst_uh:.2e}, u {worst_u:.2e} (<= 1e-8); annihilation {worst_ann:.2e} (<= 1e-10)", t0)


def test_criterion_07_branch_agreement():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_b = worst_s = 0.0
    for _, gp, th in instances():
        pts = random_points(rng, 40)
        for lam, mu in zip(pts[:20], pts[20:]):
            w1, w2 = omega(gp, th, lam, mu, 1), omega(gp, th, lam, mu, 2)
            worst_b = max(worst_b, abs(w1 - w2) / (1 + abs(w1)))
        for pt in pts[:10]:
            worst_s = max(worst_s, abs(branch_scalar(gp, *pt)))
    ok = worst_b <= 1e-9 and worst_s <= 1e-9
    record(7, ok, f"branch gap {worst_b:.2e}, branch scalar {worst_s:.2e} (<= 1e-9)", t0)


def test_criterion_08_roundtrip():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for m, n in SIZES:
        for seed in range(50):
            sym = random_symbol(m, n, seed=seed, dominance=4)
            gp = extract_g(sym)
            r = inverse(assemble(sym))
            err = np.linalg.norm(recover_r(gp, theta_poly(gp)) - r) / np.linalg.norm(r)
            worst = max(worst, err)
            count += 1
    record(8, worst <= 1e-7, f"max relative error {worst:.2e} (<= 1e-7) over {count} symbols", t0)


def test_criterion_09_characterization():
    t0 = time.perf_counter()
    sizes = [(m, n) for m in range(1, 4) for n in range(1, 4)]
    admitted, rejected, worst, seed = 0, {}, 0.0, 0
    while admitted < 50 and seed < 1000:
        m, n = sizes[seed % len(sizes)]
        rep = characterize(random_g12(m, n, seed), m, n)
        seed += 1
        if rep.status != "ok":
            assert not rep.passes and not rep.ok
            rejected[rep.stage] = rejected.get(rep.stage, 0) + 1
            continue
        admitted += 1
        worst = max(worst, rep.tbt_deviation)
    ok = admitted == 50 and worst <= 1e-6
    record(9, ok, f"{admitted} admitted, rejections {rejected or 'none'}; max TBT deviation {worst:.2e} (<= 1e-6)", t0)


def test_criterion_10_scalar_ground_truth():
    t0 = time.perf_counter()
    sym = TbtSymbol(1, 1, np.array([[5.0]]))
    gp = extract_g(sym)
    g1, gh1, g2, gh2 = gammas(sym)
    r = recover_r(gp, theta_poly(gp))
    checks = {
        "g12": rel(gp.g12, I * np.array([[-0.5, 0.2], [0.0, 0.5]])),
        "gamma1": rel(g1, [[0.5, 0.2]]),
        "gamma_hat1": rel(gh1, [[0.2], [0.5]]),
        "gamma2": rel(g2, [[0.5, 0.2]]),
        "gamma_hat2": rel(gh2, [[0.2], [0.5]]),
        "theta_tilde(0,0)": abs(theta_tilde(sym, 0, 0) + 1),
        "R": abs(r[0, 0] - 0.2),
    }
    worst = max(checks.values())
    record(10, worst <= 1e-12, f"max deviation {worst:.2e} (<= 1e-12) over {', '.join(checks)}", t0)
