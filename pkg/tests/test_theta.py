from types import SimpleNamespace

import numpy as np
import pytest

from conftest import SIZES, random_points
from tbtinv.extraction import GPair, extract_g
from tbtinv.linalg import pfaffian
from tbtinv.structured import integration_matrix
from tbtinv.theta import (
    BivarPoly,
    IntegrityError,
    assemble_g,
    pfaffian_leading_coefficient,
    q_poly,
    branch_scalar,
    skew,
    theta_poly,
    theta_tilde,
)
from tbtinv.symbol import random_symbol

I = 1j


def sample(m, n, seed=0):
    sym = random_symbol(m, n, seed=seed, dominance=4)
    return sym, extract_g(sym)


class TestAssemble:
    def test_zero_coupling(self):
        gp = GPair(2, 3, np.zeros((4, 6)))
        g = assemble_g(gp, 0, 0)
        a2, a1 = integration_matrix(2), integration_matrix(3)
        expected = np.zeros((10, 10), dtype=complex)
        for k, blk in enumerate([a2, a2]):
            expected[2 * k:2 * k + 2, 2 * k:2 * k + 2] = blk
        for k, blk in enumerate([a1, a1]):
            expected[4 + 3 * k:7 + 3 * k, 4 + 3 * k:7 + 3 * k] = blk
        np.testing.assert_array_equal(g, expected)

    def test_affine_in_lambda(self, rng):
        _, gp = sample(2, 3)
        (l1, l2), (k1, k2) = random_points(rng, 2)
        diff = assemble_g(gp, l1, l2) - assemble_g(gp, k1, k2)
        expected = np.diag(np.r_[np.full(4, k2 - l2), np.full(6, k1 - l1)])
        np.testing.assert_allclose(diff, expected, atol=1e-14)

    def test_scalar_hand(self, scalar5):
        g = assemble_g(extract_g(scalar5), 0, 0)
        expected = np.array([
            [I / 2, 0, -I / 2, I / 5],
            [0, I / 2, 0, I / 2],
            [-I / 2, I / 5, I / 2, 0],
            [0, I / 2, 0, I / 2],
        ])
        np.testing.assert_allclose(g, expected, atol=1e-15)


class TestSkew:
    @pytest.mark.parametrize("m,n", SIZES)
    def test_exactly_skew(self, m, n, rng):
        _, gp = sample(m, n)
        for pt in random_points(rng, 3):
            s = skew(gp, *pt)
            assert np.abs(s + s.T).max() <= 1e-15 * max(1, np.abs(s).max())

    @pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (4, 4)])
    def test_same_determinant(self, m, n, rng):
        _, gp = sample(m, n)
        for pt in random_points(rng, 3):
            d1 = np.linalg.det(skew(gp, *pt))
            d2 = np.linalg.det(assemble_g(gp, *pt))
            assert abs(d1 - d2) <= 1e-12 * abs(d2)

    def test_scalar_hand(self, scalar5):
        s = skew(extract_g(scalar5), 0, 0)
        expected = np.array([
            [0, I / 2, 0, I / 2],
            [-I / 2, 0, I / 2, -I / 5],
            [0, -I / 2, 0, -I / 2],
            [-I / 2, I / 5, I / 2, 0],
        ])
        np.testing.assert_allclose(s, expected, atol=1e-15)
        assert pfaffian(s) == pytest.approx(0, abs=1e-15)

    def test_inconsistent_pair_rejected(self):
        g12 = np.ones((2, 2), dtype=complex)
        bad = SimpleNamespace(m=1, n=1, g12=g12, g21=np.ones((2, 2), dtype=complex))
        with pytest.raises(IntegrityError):
            skew(bad, 0.3, 0.7)


class TestTheta:
    def test_scalar_closed_form(self, scalar5):
        th = theta_poly(extract_g(scalar5))
        np.testing.assert_allclose(th.coeffs, [[0, I / 2], [I / 2, -1]], atol=1e-12)

    def test_scalar_factorization(self, scalar5, rng):
        th = theta_poly(extract_g(scalar5))
        for l1, l2 in random_points(rng, 10):
            expected = -(l1 - I / 2) * (l2 - I / 2) * (1 + theta_tilde(scalar5, l1, l2))
            assert abs(th(l1, l2) - expected) <= 1e-9 * (1 + abs(expected))

    @pytest.mark.parametrize("m,n", SIZES)
    def test_leading_minus_one(self, m, n):
        th = theta_poly(sample(m, n)[1])
        assert (th.deg1, th.deg2) == (n, m)
        assert th.coeffs[n, m] == -1

    @pytest.mark.parametrize("m,n", [(1, 2), (3, 2), (4, 4)])
    def test_square_is_det(self, m, n, rng):
        _, gp = sample(m, n)
        th = theta_poly(gp)
        for pt in random_points(rng, 20):
            d = np.linalg.det(assemble_g(gp, *pt))
            assert abs(th(*pt) ** 2 - d) <= 1e-9 * abs(d)

    @pytest.mark.parametrize("m,n", [(2, 2), (4, 3)])
    def test_off_grid_matches_pfaffian(self, m, n, rng):
        _, gp = sample(m, n)
        th = theta_poly(gp)
        lead = pfaffian_leading_coefficient(gp)
        for pt in random_points(rng, 10):
            pf = pfaffian(skew(gp, *pt))
            assert abs(th(*pt) + pf / lead) <= 1e-9 * abs(pf)

    @pytest.mark.parametrize("m,n", SIZES)
    def test_factorization_random(self, m, n, rng):
        sym, gp = sample(m, n, seed=3)
        th, q = theta_poly(gp), q_poly(m, n)
        for pt in random_points(rng, 5):
            res = abs(th(*pt) + q(*pt) * (1 + theta_tilde(sym, *pt)))
            assert res <= 1e-9 * (1 + abs(q(*pt)))

    @pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (3, 3)])
    def test_asymptotic(self, m, n):
        sym, gp = sample(m, n, seed=5)
        th, q = theta_poly(gp), q_poly(m, n)
        for l2 in (0.3, -1 + 2j):
            ratio = th(1e6, l2) / (-q(1e6, l2))
            assert abs(ratio - 1) <= 1e-4

    def test_theta_tilde_scalar(self, scalar5):
        assert theta_tilde(scalar5, 0, 0) == pytest.approx(-1, abs=1e-12)

    def test_deterministic(self):
        _, gp = sample(3, 2)
        np.testing.assert_array_equal(theta_poly(gp).coeffs, theta_poly(gp).coeffs)

    def test_arbitrary_g12_normalizes(self, rng):
        g12 = rng.normal(size=(4, 6)) + 1j * rng.normal(size=(4, 6))
        gp = GPair(2, 3, g12)
        lead = pfaffian_leading_coefficient(gp)
        assert min(abs(lead - 1), abs(lead + 1)) <= 1e-6
        assert theta_poly(gp).coeffs[3, 2] == -1


class TestBranchScalar:
    @pytest.mark.parametrize("m,n", SIZES)
    def test_vanishes(self, m, n, rng):
        _, gp = sample(m, n, seed=2)
        for pt in random_points(rng, 5):
            assert abs(branch_scalar(gp, *pt)) <= 1e-9


class TestPolys:
    def test_q(self):
        q = q_poly(2, 1)
        l1, l2 = 0.7 - 0.2j, 1.3
        assert q(l1, l2) == pytest.approx((l1 - I / 2) * (l2 - I / 2) ** 2)

    def test_bivar_eval(self):
        p = BivarPoly(np.array([[1, 2], [3, 4]], dtype=complex))
        assert p(2.0, 3.0) == 1 + 2 * 3 + 3 * 2 + 4 * 6
