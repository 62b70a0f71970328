import json

import numpy as np
import pytest

from tbtinv.extraction import GPair, extract_g
from tbtinv.linalg import inverse
from tbtinv.reconstruction import recover_r
from tbtinv.symbol import TbtSymbol, assemble, project_tbt, random_symbol
from tbtinv.theta import theta_poly
from tbtinv.verify import (
    CHECKS,
    ReconstructionReport,
    StageError,
    Tolerances,
    characterize,
    invariant_suite,
    random_g12,
    roundtrip,
)


def near_singular(m, n, seed=0):
    """Shift t_0^(0) by an eigenvalue of T, leaving T singular up to rounding."""
    sym = random_symbol(m, n, seed=seed)
    ev = np.linalg.eigvals(assemble(sym))
    coeffs = sym.coeffs.copy()
    coeffs[n - 1, m - 1] -= ev[np.argmin(np.abs(ev))]
    return TbtSymbol(m, n, coeffs)


class TestRoundtrip:
    def test_scalar(self, scalar5):
        rep = roundtrip(scalar5)
        assert rep.roundtrip_error <= 1e-12
        assert rep.ok

    @pytest.mark.parametrize("seed", range(5))
    def test_random(self, seed):
        rep = roundtrip(random_symbol(4, 3, seed=seed, dominance=4))
        assert rep.ok and rep.roundtrip_error <= 1e-7

    def test_near_singular_fails_loudly(self):
        sym = near_singular(3, 3)
        with pytest.raises(StageError) as info:
            roundtrip(sym)
        assert info.value.stage == "inverse"
        assert isinstance(info.value.__cause__, np.linalg.LinAlgError)


class TestCharacterize:
    def test_closed_loop(self):
        sym = random_symbol(2, 3, seed=1, dominance=4)
        gp = extract_g(sym)
        rep = characterize(gp.g12, 2, 3)
        assert rep.ok and rep.tbt_deviation <= 1e-10
        t = inverse(recover_r(gp, theta_poly(gp)))
        proj, _ = project_tbt(t, 2, 3)
        assert np.abs(proj.coeffs - sym.coeffs).max() <= 1e-8

    def test_random_unit_disc(self):
        admitted = 0
        for seed in range(30):
            rep = characterize(random_g12(2, 2, seed), 2, 2)
            if rep.status == "rejected":
                assert rep.passes == {} and not rep.ok
                continue
            admitted += 1
            assert rep.condition_r <= 1e6
            assert rep.tbt_deviation <= 1e-6
        assert admitted > 0

    def test_zero_g12(self):
        rep = characterize(np.zeros((4, 4)), 2, 2)
        assert rep.status == "rejected" and rep.stage in ("theta", "recover", "gate")
        assert rep.tbt_deviation is None
        assert rep.to_dict()["pass"] is False

    def test_random_g12_in_disc(self):
        g = random_g12(3, 2, seed=4)
        assert g.shape == (6, 4) and np.abs(g).max() <= 1


class TestSuite:
    def test_scalar(self, scalar5):
        rep = invariant_suite(scalar5)
        assert set(rep.passes) == set(CHECKS)
        assert rep.ok

    @pytest.mark.parametrize("seed", range(20))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        m, n = rng.integers(1, 5, size=2)
        rep = invariant_suite(random_symbol(int(m), int(n), seed=seed, dominance=4))
        assert rep.ok, rep.passes

    def test_fault_injection(self):
        sym = random_symbol(3, 2, seed=1, dominance=4)
        g12 = extract_g(sym).g12.copy()
        g12[1, 2] += 0.1
        rep = invariant_suite(sym, GPair(3, 2, g12))
        assert not rep.ok
        assert not rep.passes["theta_factor"]
        # the structural checks on the symbol alone still pass
        assert rep.passes["identities"] and rep.passes["ranks"]

    def test_gpair_only(self):
        gp = extract_g(random_symbol(2, 2, seed=3, dominance=4))
        rep = invariant_suite(gpair=gp)
        assert rep.ok
        assert rep.identity_residual_p1 is None and rep.roundtrip_error is None

    def test_selection(self, scalar5):
        rep = invariant_suite(scalar5, selection=["pfaffian", "branch_scalar"])
        assert set(rep.passes) == {"pfaffian", "branch_scalar"}
        assert rep.theta_factor_residual is None

    def test_unknown_check(self, scalar5):
        with pytest.raises(ValueError):
            invariant_suite(scalar5, selection=["nope"])

    def test_needs_input(self):
        with pytest.raises(ValueError):
            invariant_suite()


class TestReport:
    def test_sentinels(self):
        rep = ReconstructionReport("verify", 1, 1, condition_r=float("inf"), tbt_deviation=float("nan"))
        d = rep.to_dict()
        assert d["condition_r"] == "inf" and d["tbt_deviation"] == "nan" and d["g21_discrepancy"] == "n/a"
        json.dumps(d, allow_nan=False)

    def test_no_pass_without_flags(self):
        assert not ReconstructionReport("verify", 1, 1).ok

    def test_flat_pass_keys(self, scalar5):
        d = roundtrip(scalar5).to_dict()
        assert d["pass_g21"] is True and d["pass_roundtrip"] is True and d["pass"] is True
        assert all(not isinstance(v, dict) for v in d.values())

    def test_every_field_present(self, scalar5):
        d = invariant_suite(scalar5).to_dict()
        for name in ReconstructionReport.__dataclass_fields__:
            if name != "passes":
                assert name in d

    def test_tolerances_validated(self):
        with pytest.raises(ValueError):
            Tolerances(roundtrip=0)
        assert Tolerances().scaled(10).roundtrip == pytest.approx(1e-6)
        assert Tolerances().scaled(10).max_condition_r == 1e6
