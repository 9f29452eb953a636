import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hkcheck.cmatrix import solve, spectral_norm
from hkcheck.errors import (
    AlphaOutOfRange, ExponentNotNegative, NonDiagonalizable,
    RegularizerOrderTooLow, SpectrumOnCut,
)
from hkcheck.gen import InstanceSpec, gen_operator
from hkcheck.powers import (
    Method, balakrishnan_neg_power, dunford_power, extended_power_q,
    general_power, imaginary_power, oracle_power, pos_power, power,
)
from hkcheck.quadrature import QuadratureConfig
from hkcheck.sectorial import certify_invertible_sectorial

from conftest import crandn


def q_closed_form(d, eta, m, k):
    """Q(eta, m, k) on a diagonal: psi_k(d)^m d^eta, psi_k(x) = k/(k+x) - 1/(1+kx)."""
    psi = k / (k + d) - 1 / (1 + k * d)
    return np.diag(psi ** m * d ** eta)


def op(seed, cls, n, **kw):
    return gen_operator(InstanceSpec(seed, cls, (n, n), **kw))[0]


class TestOracle:
    def test_square_root_of_diagonal(self):
        r = oracle_power(np.diag([1.0, 4.0]), 0.5)
        np.testing.assert_allclose(r.value, np.diag([1.0, 2.0]), atol=1e-15)
        assert r.method is Method.ORACLE

    def test_zero_exponent(self, rng):
        a = op(1, "SimilarityPerturbed", 4)
        np.testing.assert_array_equal(oracle_power(a, 0).value, np.eye(4))

    def test_inverse_cross_check(self):
        a = np.array([[2.0, 1.0], [0.0, 3.0]])
        np.testing.assert_allclose(oracle_power(a, -1).value, solve(a, np.eye(2)), atol=1e-12)

    def test_rejects_cut(self):
        with pytest.raises(SpectrumOnCut):
            oracle_power(np.diag([-1.0, 2.0]), 0.5)

    def test_rejects_defective(self):
        with pytest.raises(NonDiagonalizable):
            oracle_power(np.array([[1.0, 1.0], [0.0, 1.0]]), 0.5)


class TestBalakrishnan:
    def test_diag(self):
        r = balakrishnan_neg_power(np.diag([1.0, 4.0]), 0.5)
        np.testing.assert_allclose(r.value, np.diag([1.0, 0.5]), atol=1e-8)

    @pytest.mark.parametrize("alpha", [0.05, 0.3, 0.5, 0.95])
    def test_identity(self, alpha):
        r = balakrishnan_neg_power(np.eye(3), alpha)
        assert spectral_norm(r.value - np.eye(3)) <= max(r.error_estimate, 1e-12)

    def test_nilpotent_binomial(self):
        # (I + N)^{-1/2} = I - N/2 exactly, N^2 = 0
        r = balakrishnan_neg_power(np.array([[1.0, 1.0], [0.0, 1.0]]), 0.5)
        np.testing.assert_allclose(r.value, [[1.0, -0.5], [0.0, 1.0]], atol=1e-10)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(AlphaOutOfRange):
            balakrishnan_neg_power(np.eye(2), alpha)

    def test_jordan_block_binomial_series(self):
        # (lam I + N)^{-a} = lam^{-a} sum_j binom(-a, j) (N/lam)^j, N nilpotent
        lam, n, a = 2.5, 5, 0.35
        nil = np.eye(n, k=1)
        ref = np.zeros((n, n))
        coef = 1.0
        for j in range(n):
            ref += coef * np.linalg.matrix_power(nil / lam, j)
            coef *= (-a - j) / (j + 1)
        ref *= lam ** -a
        r = balakrishnan_neg_power(lam * np.eye(n) + nil, a)
        assert spectral_norm(r.value - ref) <= 10 * r.error_estimate
        assert spectral_norm(r.value - ref) <= 1e-9

    def test_truncation_extends_for_extreme_alpha(self):
        r = balakrishnan_neg_power(np.diag([1.0, 2.0]), 0.95)
        assert r.truncation[0] < -40.0

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10**6), c=st.floats(0.01, 100.0), alpha=st.floats(0.05, 0.95))
    def test_scaling(self, seed, c, alpha):
        a = op(seed, "SimilarityPerturbed", 4)
        lhs = balakrishnan_neg_power(c * a, alpha)
        rhs = balakrishnan_neg_power(a, alpha)
        diff = spectral_norm(lhs.value - c ** -alpha * rhs.value)
        assert diff <= lhs.error_estimate + c ** -alpha * rhs.error_estimate + 1e-9 * spectral_norm(lhs.value)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10**6),
           cls=st.sampled_from(["NormalSector", "SimilarityPerturbed", "JordanBlock"]),
           a_=st.floats(0.05, 0.5), b_=st.floats(0.05, 0.45))
    def test_semigroup(self, seed, cls, a_, b_):
        a = op(seed, cls, 5)
        pa, pb = balakrishnan_neg_power(a, a_), balakrishnan_neg_power(a, b_)
        pab = balakrishnan_neg_power(a, a_ + b_)
        err = (pa.error_estimate * spectral_norm(pb.value) + pb.error_estimate * spectral_norm(pa.value)
               + pab.error_estimate)
        assert spectral_norm(pa.value @ pb.value - pab.value) <= err + 1e-6 * spectral_norm(pab.value)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 10**6), alpha=st.floats(0.1, 0.9), s=st.floats(0.0, 50.0))
    def test_resolvent_commutation(self, seed, alpha, s):
        a = op(seed, "SimilarityPerturbed", 5)
        p = balakrishnan_neg_power(a, alpha).value
        r = np.linalg.inv(a + s * np.eye(5))
        assert spectral_norm(p @ r - r @ p) <= 1e-8 * spectral_norm(p) * spectral_norm(r)


class TestPosPower:
    def test_diag(self):
        r = pos_power(np.diag([1.0, 4.0]), 0.5)
        np.testing.assert_allclose(r.value, np.diag([1.0, 2.0]), atol=1e-8)

    def test_identity(self):
        np.testing.assert_allclose(pos_power(np.eye(2), 0.3).value, np.eye(2), atol=1e-10)

    @pytest.mark.parametrize("seed", range(3))
    def test_composition_is_identity(self, seed):
        a = op(seed, "SimilarityPerturbed", 4)
        p, q = pos_power(a, 0.4), balakrishnan_neg_power(a, 0.4)
        err = p.error_estimate * spectral_norm(q.value) + q.error_estimate * spectral_norm(p.value)
        assert spectral_norm(p.value @ q.value - np.eye(4)) <= 2 * err + 1e-12


class TestDunford:
    def test_diag_square_root(self):
        r = dunford_power(np.diag([1.0, 4.0]), -0.5)
        np.testing.assert_allclose(r.value, np.diag([1.0, 0.5]), atol=1e-7)

    def test_inverse(self):
        a = np.diag([1.0, 4.0])
        np.testing.assert_allclose(dunford_power(a, -1).value, solve(a, np.eye(2)), atol=1e-7)

    def test_complex_exponent_normal(self):
        a = op(3, "NormalSector", 4)
        z = -0.3 - 0.2j
        r = dunford_power(a, z)
        diff = spectral_norm(r.value - oracle_power(a, z).value)
        assert diff <= 1e-6
        assert diff <= 10 * r.error_estimate

    def test_defective_input_accepted(self):
        a = np.array([[2.0, 1.0], [0.0, 2.0]])
        r = dunford_power(a, -0.5)
        ref = 2 ** -0.5 * np.array([[1.0, -0.25], [0.0, 1.0]])
        np.testing.assert_allclose(r.value, ref, atol=1e-9)

    @pytest.mark.parametrize("z", [0.0, 0.5, 0.1j])
    def test_nonnegative_rejected(self, z):
        with pytest.raises(ExponentNotNegative):
            dunford_power(np.eye(2), z)

    @pytest.mark.parametrize("seed", range(4))
    def test_agrees_with_balakrishnan(self, seed):
        a = op(seed, "SimilarityPerturbed", 5)
        d, b = dunford_power(a, -0.4), balakrishnan_neg_power(a, 0.4)
        assert spectral_norm(d.value - b.value) <= d.error_estimate + b.error_estimate


class TestImaginary:
    def test_zero(self):
        r = imaginary_power(np.diag([1.0, 3.0]), 0.0)
        np.testing.assert_array_equal(r.value, np.eye(2))

    def test_periodicity(self):
        r = imaginary_power(np.diag([1.0, math.exp(2 * math.pi)]), 1.0)
        np.testing.assert_allclose(r.value, np.eye(2), atol=1e-5)

    def test_nonnormal(self):
        a = np.array([[1.0, 5.0], [0.0, 3.0]])
        r = imaginary_power(a, 0.7)
        diff = np.max(np.abs(r.value - oracle_power(a, 0.7j).value))
        assert diff <= 1e-4
        assert diff <= 10 * r.error_estimate

    def test_panel_width_respects_oscillation(self):
        r = imaginary_power(np.diag([1.0, 2.0]), 3.0)
        lo, hi = r.truncation
        panels = r.nodes / 20
        assert (hi - lo) / panels <= math.pi / 12 + 1e-12

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 10**6), t=st.floats(-3.0, 3.0))
    def test_unitary_on_normal_positive(self, seed, t):
        a = op(seed, "NormalSector", 4, sector_angle=0.0)
        assert spectral_norm(imaginary_power(a, t).value) == pytest.approx(1.0, abs=1e-6)


class TestExtendedQ:
    def test_matches_closed_form(self):
        d = np.array([1.0, 3.0])
        for k in (10.0, 100.0, 1000.0):
            r = extended_power_q(np.diag(d), 0.5, 2, k)
            ref = q_closed_form(d, 0.5, 2, k)
            assert spectral_norm(r.value - ref) <= 10 * r.error_estimate
            assert spectral_norm(r.value - ref) <= 1e-9

    def test_error_decreases_in_k(self):
        d = np.array([1.0, 3.0])
        target = np.diag(np.sqrt(d))
        errs = [spectral_norm(extended_power_q(np.diag(d), 0.5, 2, k).value - target)
                for k in (10.0, 100.0, 1000.0)]
        assert errs[0] > errs[1] > errs[2]

    def test_zero_exponent_tends_to_identity(self):
        b = op(4, "NormalSector", 3)
        errs = [spectral_norm(extended_power_q(b, 0.0, 1, k).value - np.eye(3))
                for k in (1e2, 1e4, 1e6)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] <= 1e-4

    def test_independent_of_order_in_the_limit(self):
        # invertible instance; error in k is O(m / k) so orders agree to ~1e-5
        b = op(8, "SimilarityPerturbed", 3, spectrum=(1.0, 4.0), cond_target=3.0)
        vals = [extended_power_q(b, 0.4, m, 1e6).value for m in (1, 2, 3)]
        ref = oracle_power(b, 0.4).value
        for v in vals:
            assert spectral_norm(v - ref) <= 1e-4 * spectral_norm(ref)

    def test_complex_exponent(self):
        d = np.array([0.5, 2.0, 5.0])
        eta = 0.3 + 0.4j
        r = extended_power_q(np.diag(d), eta, 2, 50.0)
        ref = q_closed_form(d.astype(complex), eta, 2, 50.0)
        assert spectral_norm(r.value - ref) <= 1e-8

    def test_order_too_low(self):
        with pytest.raises(RegularizerOrderTooLow):
            extended_power_q(np.eye(2), 1.5, 1, 10.0)


class TestErrorEstimateHonesty:
    @pytest.mark.parametrize("seed", range(6))
    def test_true_error_within_ten_times_estimate(self, seed):
        cls = ["HermitianDiag", "NormalSector", "SimilarityPerturbed"][seed % 3]
        a = op(seed, cls, 6)
        ref = oracle_power
        for alpha in (0.1, 0.5, 0.9):
            r = balakrishnan_neg_power(a, alpha)
            assert spectral_norm(r.value - ref(a, -alpha).value) <= 10 * r.error_estimate
            r = pos_power(a, alpha)
            assert spectral_norm(r.value - ref(a, alpha).value) <= 10 * r.error_estimate
        for z in (-0.5, -0.2 + 0.3j):
            r = dunford_power(a, z)
            assert spectral_norm(r.value - ref(a, z).value) <= 10 * r.error_estimate
        for t in (-1.5, 0.5):
            r = imaginary_power(a, t)
            assert spectral_norm(r.value - ref(a, 1j * t).value) <= 10 * r.error_estimate


class TestDispatch:
    def test_auto_uses_oracle(self):
        assert power(np.diag([1.0, 2.0]), 0.5).method is Method.ORACLE

    def test_auto_falls_back_to_quadrature(self):
        j = np.array([[1.0, 1.0], [0.0, 1.0]])
        r = power(j, -0.5)
        assert r.method is Method.BALAKRISHNAN
        np.testing.assert_allclose(r.value, [[1.0, -0.5], [0.0, 1.0]], atol=1e-9)

    def test_zero_short_circuits(self):
        r = power(np.diag([1.0, 2.0]), 0, method="dunford")
        assert r.method is Method.IDENTITY

    def test_general_power_on_jordan(self):
        lam = 2.0
        j = np.array([[lam, 1.0], [0.0, lam]])
        w = 0.6 + 0.8j
        ref = lam ** w * np.array([[1.0, w / lam], [0.0, 1.0]])
        r = general_power(j, w)
        assert spectral_norm(r.value - ref) <= 1e-8

    def test_custom_config(self):
        cfg = QuadratureConfig(nodes_per_panel=10, panel_count=40)
        r = balakrishnan_neg_power(np.diag([1.0, 4.0]), 0.5, cfg)
        np.testing.assert_allclose(r.value, np.diag([1.0, 0.5]), atol=1e-8)
