"""Composite/simple/scalar coefficient chains, CDF expansion, and moments."""

import math

import numpy as np
import pytest

from gradpower.errors import DomainError
from gradpower.expfam import catalog_model, cumulants
from gradpower.expansion import (
    CumulantTensors,
    cdf_expansion,
    composite_coefficients,
    load_tensor_file,
    power_equivalence_flags,
    scalar_coefficients,
    simple_coefficients,
    st_moments,
    tensors_from_cumulants,
)
from gradpower.specfun import ChiSquareParams, central_chisq_cdf, nc_chisq_cdf

from helpers import random_tensors

# pinned by the quadrature+series oracle: gradient-coefficient expansion for
# the gamma(k=2) tensors at theta0=1, eps=1, n=50, evaluated at x=3.8415
CDF_EXPANSION_PIN = 0.72838988136047963074


def gamma_tensors():
    return tensors_from_cumulants(cumulants(catalog_model("gamma", {"k": 2.0}), 1.0))


class TestCompositeCoefficients:
    def test_hand_worked_two_dim_example(self):
        # p=2, q=1, K=I, only kappa_222 = 1, eps = (1,)
        k3 = np.zeros((2, 2, 2))
        k3[1, 1, 1] = 1.0
        t = CumulantTensors(p=2, q=1, K=np.eye(2), k3=k3, k21=np.zeros((2, 2, 2)))
        e = composite_coefficients(t, [1.0])
        assert e.f == 1
        assert e.lam == pytest.approx(0.5, abs=1e-15)
        np.testing.assert_allclose(e.a, (1 / 6, -1 / 4, 0.0, 1 / 12), atol=1e-12)

    def test_zero_drift_zero_coefficients(self):
        rng = np.random.default_rng(5)
        t = random_tensors(rng, p=3, q=1)
        e = composite_coefficients(t, [0.0, 0.0])
        assert e.lam == 0.0
        assert all(a == 0.0 for a in e.a)

    def test_zero_sum_normalization(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            t = random_tensors(rng, p=int(rng.integers(2, 5)), q=1)
            e = composite_coefficients(t, rng.normal(size=t.p - 1))
            assert abs(sum(e.a)) <= 1e-12 * max(1.0, max(abs(a) for a in e.a))

    def test_dimension_mismatch(self):
        t = random_tensors(np.random.default_rng(0), p=3, q=1)
        with pytest.raises(DomainError, match="length"):
            composite_coefficients(t, [1.0])

    def test_permutation_of_nuisance_coordinates(self):
        rng = np.random.default_rng(3)
        t = random_tensors(rng, p=4, q=2)
        eps = rng.normal(size=2)
        base = composite_coefficients(t, eps)
        perm = [1, 0, 2, 3]
        tp = CumulantTensors(
            p=4,
            q=2,
            K=t.K[np.ix_(perm, perm)],
            k3=t.k3[np.ix_(perm, perm, perm)],
            k21=t.k21[np.ix_(perm, perm, perm)],
        )
        other = composite_coefficients(tp, eps)
        assert other.lam == pytest.approx(base.lam, abs=1e-10)
        np.testing.assert_allclose(other.a, base.a, atol=1e-10)

    def test_lambda_ignores_third_order_arrays(self):
        rng = np.random.default_rng(4)
        t = random_tensors(rng, p=3, q=1)
        eps = rng.normal(size=2)
        zeroed = CumulantTensors(
            p=3, q=1, K=t.K, k3=np.zeros((3, 3, 3)), k21=np.zeros((3, 3, 3))
        )
        assert composite_coefficients(zeroed, eps).lam == composite_coefficients(t, eps).lam


class TestReductionChain:
    def test_composite_equals_simple_at_q0(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(100):
            p = int(rng.integers(1, 5))
            t = random_tensors(rng, p=p, q=0)
            eps = rng.normal(size=p)
            a = composite_coefficients(t, eps)
            b = simple_coefficients(t, eps)
            worst = max(
                worst,
                abs(a.lam - b.lam),
                max(abs(x - y) for x, y in zip(a.a, b.a)),
            )
        assert worst <= 1e-10

    def test_simple_equals_scalar_at_p1(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            K = float(rng.uniform(0.2, 4.0))
            from gradpower.expfam import CumulantSet

            c = CumulantSet(
                k_tt=-K,
                k_ttt=float(rng.normal()),
                k_t_tt=float(rng.normal()),
                k_t_t_t=float(rng.normal()),
                k_inv=1.0 / K,
            )
            eps = float(rng.normal())
            a = scalar_coefficients(c, eps)
            b = simple_coefficients(tensors_from_cumulants(c), [eps])
            assert a.lam == pytest.approx(b.lam, abs=1e-12)
            np.testing.assert_allclose(a.a, b.a, atol=1e-12)

    def test_gamma_example(self):
        e = simple_coefficients(gamma_tensors(), [1.0])
        np.testing.assert_allclose(e.a, (2 / 3, -1 / 2, -1 / 2, 1 / 3), atol=1e-14)
        assert e.lam == pytest.approx(1.0, abs=1e-15)

    def test_simple_requires_q0(self):
        t = random_tensors(np.random.default_rng(1), p=3, q=1)
        with pytest.raises(DomainError, match="q = 0"):
            simple_coefficients(t, [1.0, 1.0])


class TestCdfExpansion:
    def test_pinned_value(self):
        e = simple_coefficients(gamma_tensors(), [1.0])
        got = cdf_expansion(e, 50, 3.8415)
        assert not got.clamped
        assert got.value == pytest.approx(CDF_EXPANSION_PIN, abs=1e-10)

    def test_large_x_tends_to_one(self):
        e = simple_coefficients(gamma_tensors(), [1.0])
        assert cdf_expansion(e, 50, 1e4).value == pytest.approx(1.0, abs=1e-12)

    def test_zero_drift_reduces_to_central(self):
        e = simple_coefficients(gamma_tensors(), [0.0])
        for x in (0.5, 2.0, 6.0):
            assert cdf_expansion(e, 50, x).value == pytest.approx(
                central_chisq_cdf(1.0, x), abs=1e-14
            )

    def test_negative_x_convention(self):
        e = simple_coefficients(gamma_tensors(), [1.0])
        assert cdf_expansion(e, 50, -3.0).value == 0.0

    def test_infinite_n_is_first_order(self):
        e = simple_coefficients(gamma_tensors(), [1.0])
        got = cdf_expansion(e, math.inf, 2.0)
        assert got.value == pytest.approx(
            nc_chisq_cdf(ChiSquareParams(1.0, e.lam), 2.0), abs=1e-14
        )

    def test_sanity_envelope_on_catalog_tensors(self):
        # raw values stay within [-0.02, 1.02] for |eps| <= 1, n >= 20
        for name, fixed in (("gamma", {"k": 2.0}), ("tev", {}), ("pareto", {"k": 1.5})):
            model = catalog_model(name, fixed)
            t = tensors_from_cumulants(cumulants(model, 1.0))
            for eps in (-1.0, -0.5, 0.5, 1.0):
                e = simple_coefficients(t, [eps])
                for x in np.linspace(0.05, 20.0, 40):
                    raw = cdf_expansion(e, 20, float(x)).raw
                    assert -0.02 <= raw <= 1.02, (name, eps, x, raw)


class TestMoments:
    def test_null_moments(self):
        t = gamma_tensors()
        ms = st_moments(t, [0.0], 100)
        assert (ms.m1, ms.m2, ms.m3) == (1.0, 2.0, 8.0)
        assert ms.mixture_mean == 1.0

    def test_gamma_contractions(self):
        ms = st_moments(gamma_tensors(), [1.0], 200)
        rt = 1.0 / math.sqrt(200.0)
        assert ms.A[0] == pytest.approx(1.5, abs=1e-14)
        assert ms.A[1] == pytest.approx(0.5, abs=1e-14)
        assert ms.A[2] == pytest.approx(1 / 3, abs=1e-14)
        assert ms.m1 == pytest.approx(2.0 + 3.0 * rt, abs=1e-13)
        assert ms.m2 == pytest.approx(6.0 + 16.0 * rt, abs=1e-13)
        assert ms.m3 == pytest.approx(32.0 + 17.0 * rt, abs=1e-13)
        assert ms.mixture_mean == pytest.approx(3.0 - rt, abs=1e-13)

    def test_mixture_mean_matches_weights(self):
        rng = np.random.default_rng(9)
        t = random_tensors(rng, p=2, q=1)
        eps = [0.7]
        n = 64
        e = composite_coefficients(t, eps)
        ms = st_moments(t, eps, n)
        a1, a2, a3 = e.a[1], e.a[2], e.a[3]
        want = e.f + 2.0 * e.lam + (2.0 / math.sqrt(n)) * (a1 + 2 * a2 + 3 * a3)
        assert ms.mixture_mean == pytest.approx(want, abs=1e-12)


class TestTensorValidation:
    def test_asymmetric_k_rejected(self):
        K = np.array([[1.0, 0.2], [0.1, 1.0]])
        with pytest.raises(DomainError, match="symmetric"):
            CumulantTensors(p=2, q=0, K=K, k3=np.zeros((2, 2, 2)), k21=np.zeros((2, 2, 2)))

    def test_non_positive_definite_rejected(self):
        K = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(DomainError, match="positive definite"):
            CumulantTensors(p=2, q=0, K=K, k3=np.zeros((2, 2, 2)), k21=np.zeros((2, 2, 2)))

    def test_asymmetric_k3_rejected(self):
        k3 = np.zeros((2, 2, 2))
        k3[0, 1, 1] = 1.0
        with pytest.raises(DomainError, match="k3"):
            CumulantTensors(p=2, q=0, K=np.eye(2), k3=k3, k21=np.zeros((2, 2, 2)))

    def test_k21_last_two_symmetry_only(self):
        # symmetric in (s, t) but not under first-index swaps: accepted
        k21 = np.zeros((2, 2, 2))
        k21[0, 1, 1] = 3.0
        CumulantTensors(p=2, q=0, K=np.eye(2), k3=np.zeros((2, 2, 2)), k21=k21)
        bad = np.zeros((2, 2, 2))
        bad[0, 0, 1] = 1.0
        with pytest.raises(DomainError, match="k21"):
            CumulantTensors(p=2, q=0, K=np.eye(2), k3=np.zeros((2, 2, 2)), k21=bad)

    def test_bad_shapes_and_q(self):
        with pytest.raises(DomainError):
            CumulantTensors(p=2, q=2, K=np.eye(2), k3=np.zeros((2, 2, 2)), k21=np.zeros((2, 2, 2)))
        with pytest.raises(DomainError):
            CumulantTensors(p=2, q=0, K=np.eye(3), k3=np.zeros((2, 2, 2)), k21=np.zeros((2, 2, 2)))


class TestEquivalenceFlags:
    def test_flags_on_catalog_models(self):
        nm = tensors_from_cumulants(cumulants(catalog_model("normal-mean", {"theta": 1.0}), 0.5))
        flags = power_equivalence_flags(nm)
        assert flags["lr_wald_gradient"] is True
        assert flags["score_gradient"] is True
        tev = tensors_from_cumulants(cumulants(catalog_model("tev"), 1.0))
        flags = power_equivalence_flags(tev)
        # k3 = 2 k111 holds exactly when beta'' = 0
        assert flags["lr_wald_gradient"] is False
        assert flags["score_gradient"] is True
        gam = tensors_from_cumulants(cumulants(catalog_model("gamma", {"k": 2.0}), 1.0))
        flags = power_equivalence_flags(gam)
        assert flags["lr_wald_gradient"] is False
        assert flags["score_gradient"] is False

    def test_flag_none_without_k111(self):
        t = CumulantTensors(
            p=1, q=0, K=np.array([[1.0]]), k3=np.zeros((1, 1, 1)), k21=np.zeros((1, 1, 1))
        )
        assert power_equivalence_flags(t)["score_gradient"] is None


class TestTensorFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "tensors.json"
        path.write_text(
            '{"p": 1, "q": 0, "K": [[2.0]], "k3": [[[4.0]]], "k21": [[[0.0]]],'
            ' "k111": [[[-4.0]]]}'
        )
        t = load_tensor_file(path)
        assert t.p == 1 and t.q == 0
        assert t.K[0, 0] == 2.0 and t.k111[0, 0, 0] == -4.0
        e = simple_coefficients(t, [1.0])
        np.testing.assert_allclose(e.a, (2 / 3, -1 / 2, -1 / 2, 1 / 3), atol=1e-14)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"p": 1, "q": 0, "K": [[1.0]]}')
        with pytest.raises(DomainError, match="missing tensor fields"):
            load_tensor_file(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(DomainError, match="invalid tensor file"):
            load_tensor_file(path)

    def test_symmetry_enforced_on_load(self, tmp_path):
        path = tmp_path / "asym.json"
        path.write_text(
            '{"p": 2, "q": 0, "K": [[1.0, 0.0], [0.0, 1.0]],'
            ' "k3": [[[0,0],[0,1]],[[0,0],[0,0]]],'
            ' "k21": [[[0,0],[0,0]],[[0,0],[0,0]]]}'
        )
        with pytest.raises(DomainError, match="k3"):
            load_tensor_file(path)
