import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from wpgap.errors import ComputationError, PreconditionError
from wpgap.testfunctions import (
    QuadratureConfig,
    SpectralParameter,
    TestFunctionFamily,
    abel_forward_at_zero,
    adaptive_integral,
    empirical_C_eps,
    f1_direct,
    f1_eval,
    f1_hat,
    fT_eval,
    fourier_fT,
    inverse_abel_kT,
    k_zero_spectral,
    kT_values,
    psi0,
    psi0_hat,
    psi0_hat_imag,
    table_rows,
)


def psi0_scalar(x):
    return math.exp(-1.0 / (1.0 - 4.0 * x * x)) if abs(x) < 0.5 else 0.0


def f1_adaptive(x):
    """Independent f1 by adaptive quadrature of the convolution integral."""
    x = abs(x)
    if x >= 1:
        return 0.0
    val, _ = integrate.quad(lambda t: psi0_scalar(x - t) * psi0_scalar(t), x - 0.5, 0.5,
                            epsabs=1e-16, epsrel=1e-13, limit=200)
    return val


class TestMollifier:
    def test_support(self):
        np.testing.assert_array_equal(psi0([-0.5, 0.5, 0.7, -3.0]), 0.0)
        assert psi0(0.0) == pytest.approx(math.exp(-1.0))

    def test_even(self):
        x = np.linspace(0, 0.49, 50)
        np.testing.assert_array_equal(psi0(x), psi0(-x))

    @pytest.mark.parametrize("xi", [0.0, 1.0, 7.5, 40.0])
    def test_psi0_hat_against_quad(self, xi):
        val, _ = integrate.quad(lambda x: 2 * math.cos(xi * x) * psi0_scalar(x), 0, 0.5, epsabs=1e-16, limit=200)
        assert psi0_hat(xi)[0] == pytest.approx(val, rel=1e-9, abs=1e-15)

    @pytest.mark.parametrize("s", [0.0, 3.0, 14.0])
    def test_psi0_hat_imag_against_quad(self, s):
        val, _ = integrate.quad(lambda x: 2 * math.cosh(s * x) * psi0_scalar(x), 0, 0.5, epsabs=1e-16)
        assert psi0_hat_imag(s)[0] == pytest.approx(val, rel=1e-12)


class TestF1:
    @pytest.mark.parametrize("x", [0.0, 0.1, 0.37, 0.5, 0.8, 0.95])
    def test_against_adaptive_quad(self, x):
        assert f1_eval(x) == pytest.approx(f1_adaptive(x), rel=1e-10, abs=1e-18)

    def test_f1_zero_is_l2_norm(self):
        val, _ = integrate.quad(lambda t: psi0_scalar(t) ** 2, -0.5, 0.5, epsabs=1e-16)
        assert f1_eval(0.0) == pytest.approx(val, rel=1e-13)

    def test_support_and_even(self):
        assert f1_eval(1.0) == 0.0
        assert f1_eval(1.5) == 0.0
        assert f1_eval(-0.3) == f1_eval(0.3)

    def test_array_shape(self):
        out = f1_eval(np.zeros((2, 3)))
        assert out.shape == (2, 3)

    @given(st.floats(0.0, 0.99), st.floats(0.0, 0.99))
    def test_non_increasing(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert f1_eval(lo) >= f1_eval(hi)

    def test_fourier_is_square(self):
        xi = np.array([0.0, 2.0, 11.0])
        np.testing.assert_allclose(f1_hat(xi), psi0_hat(xi) ** 2)
        assert f1_hat(0.0)[0] == pytest.approx(psi0_hat(0.0)[0] ** 2)


class TestFamily:
    def test_rejects_small_T(self):
        with pytest.raises(PreconditionError):
            TestFunctionFamily(1.0)

    def test_for_genus(self):
        assert TestFunctionFamily.for_genus(10).T == pytest.approx(4 * math.log(10))
        with pytest.raises(PreconditionError):
            TestFunctionFamily.for_genus(1)

    def test_spline_matches_direct(self):
        fam = TestFunctionFamily(8.0)
        x = np.linspace(0, 7.9, 397)
        np.testing.assert_allclose(fam.f(x), f1_direct(x / 8.0), rtol=1e-8, atol=1e-16)

    def test_spline_tail_relative(self):
        fam = TestFunctionFamily(1.5)
        y = np.array([0.92, 0.95, 0.98, 0.99])
        np.testing.assert_allclose(fam.f(y * 1.5), f1_direct(y), rtol=1e-7)

    def test_fT_eval_scaling(self):
        fam = TestFunctionFamily(5.0)
        assert fT_eval(fam, 2.0) == pytest.approx(f1_eval(0.4))

    def test_quadrature_config_validation(self):
        with pytest.raises(PreconditionError):
            QuadratureConfig(rel_tol=0)
        with pytest.raises(PreconditionError):
            QuadratureConfig(truncation_radius=-1)

    def test_adaptive_integral_raises_on_failure(self):
        tight = QuadratureConfig(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=1)
        with pytest.raises(ComputationError):
            adaptive_integral(lambda x: math.sin(1 / x) if x else 0.0, 0.0, 1.0, tight)


class TestFourier:
    @pytest.mark.parametrize("T", [2.0, 8.0])
    @pytest.mark.parametrize("r", [0.0, 0.3, 1.7])
    def test_product_vs_direct_real(self, T, r):
        fam = TestFunctionFamily(T)
        s = SpectralParameter.real(r)
        assert fourier_fT(fam, s) == pytest.approx(fourier_fT(fam, s, "direct"), rel=1e-9, abs=1e-14)

    @pytest.mark.parametrize("T", [2.0, 8.0, 27.63])
    @pytest.mark.parametrize("t", [0.1, 0.25, 0.5])
    def test_product_vs_direct_imag(self, T, t):
        fam = TestFunctionFamily(T)
        s = SpectralParameter.imag(t)
        assert fourier_fT(fam, s) == pytest.approx(fourier_fT(fam, s, "direct"), rel=1e-9)

    def test_scaling(self):
        fam = TestFunctionFamily(6.0)
        assert fourier_fT(fam, SpectralParameter.real(0.5)) == pytest.approx(6.0 * f1_hat(3.0)[0])

    def test_imag_increasing(self):
        fam = TestFunctionFamily(8.0)
        vals = [fourier_fT(fam, SpectralParameter.imag(t)) for t in np.linspace(0, 0.5, 11)]
        assert all(b > a > 0 for a, b in zip(vals, vals[1:]))

    def test_parameter_validation(self):
        with pytest.raises(PreconditionError):
            SpectralParameter.imag(0.6)
        with pytest.raises(PreconditionError):
            SpectralParameter.real(-1.0)
        with pytest.raises(PreconditionError):
            fourier_fT(TestFunctionFamily(2.0), SpectralParameter.real(1.0), "other")


class TestAbel:
    @pytest.mark.parametrize("T", [2.0, 8.0, 27.63])
    def test_forward_recovers_f1_zero(self, T):
        fam = TestFunctionFamily(T)
        value, raw = abel_forward_at_zero(fam, detail=True)
        assert abs(value - f1_eval(0.0)) / f1_eval(0.0) <= 1e-6
        assert value == pytest.approx(math.sqrt(2) * raw)

    @pytest.mark.parametrize("T", [2.0, 8.0, 27.63])
    def test_two_routes_to_k0(self, T):
        fam = TestFunctionFamily(T)
        direct = inverse_abel_kT(fam, 0.0)
        spectral = k_zero_spectral(fam, detail=True)
        assert abs(direct - spectral.value) / abs(direct) <= 1e-5
        assert spectral.truncation_error < 1e-13

    def test_fixed_truncation_radius(self):
        fam = TestFunctionFamily(8.0, QuadratureConfig(truncation_radius=400.0))
        assert k_zero_spectral(fam) == pytest.approx(inverse_abel_kT(TestFunctionFamily(8.0), 0.0), rel=1e-8)

    def test_vectorised_matches_adaptive(self):
        fam = TestFunctionFamily(8.0)
        rhos = np.array([0.0, 0.5, 2.0, 5.0, 7.5])
        expected = [inverse_abel_kT(fam, r) for r in rhos]
        np.testing.assert_allclose(kT_values(fam, rhos), expected, rtol=1e-9, atol=1e-15)

    def test_vanishes_beyond_T(self):
        fam = TestFunctionFamily(4.0)
        assert inverse_abel_kT(fam, 4.0) == 0.0
        np.testing.assert_array_equal(kT_values(fam, [4.0, 9.0]), 0.0)

    def test_rho_validation(self):
        with pytest.raises(PreconditionError):
            inverse_abel_kT(TestFunctionFamily(4.0), -0.1)


class TestEmpiricalConstant:
    def test_positive_and_per_T(self):
        overall, per_T = empirical_C_eps([8.0, 16.0], 0.1, np.linspace(0, 0.5, 8), per_T=True)
        assert overall == min(per_T) > 0

    def test_minimum_at_half(self):
        grid = np.linspace(0, 0.5, 32)
        for T in (8.0, 28.0):
            fam = TestFunctionFamily(T)
            vals = [fourier_fT(fam, SpectralParameter.imag(t)) * math.exp(-T * 0.9 * t) / T for t in grid]
            assert int(np.argmin(vals)) == len(grid) - 1

    def test_validation(self):
        with pytest.raises(PreconditionError):
            empirical_C_eps([8.0], 1.5, [0.1])
        with pytest.raises(PreconditionError):
            empirical_C_eps([8.0], 0.1, [0.7])
        with pytest.raises(PreconditionError):
            empirical_C_eps([], 0.1, [0.1])


class TestTableRows:
    def test_kinds(self):
        fam = TestFunctionFamily(4.0)
        assert table_rows(fam, "f", [0.0])[0] == (0.0, f1_eval(0.0))
        assert table_rows(fam, "k", [5.0])[0] == (5.0, 0.0)
        with pytest.raises(PreconditionError):
            table_rows(fam, "z", [0.0])
