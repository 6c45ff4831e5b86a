import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qeiform.numerics import (GammaPoleError, GaussianTestFunction, QuadratureConfig,
                              complex_gamma, complex_loggamma, convolution_rhs, g2_tilde,
                              gauss_legendre, integrate_interval, integrate_semi_infinite)

mpmath.mp.dps = 40


def test_gamma_classical_values():
    assert abs(complex_gamma(1.0) - 1.0) < 1e-14
    assert abs(complex_gamma(0.5) - math.sqrt(math.pi)) < 1e-14
    assert abs(complex_gamma(5.0) - 24.0) < 1e-12


@pytest.mark.parametrize("z", [1 + 2j, -3.5 + 0.2j, 0.1 - 7j, 25.3 + 10j, -12.7 - 3j, 40 + 20j])
def test_gamma_against_mpmath(z):
    ref = complex(mpmath.gamma(mpmath.mpc(z.real, z.imag)))
    assert abs(complex_gamma(z) - ref) <= 1e-12 * abs(ref)


def test_loggamma_against_mpmath():
    for z in (3 + 4j, 0.3 + 40j, 17.5 - 2j):
        ref = complex(mpmath.loggamma(mpmath.mpc(z.real, z.imag)))
        assert abs(complex_loggamma(z) - ref) < 1e-11


@pytest.mark.parametrize("z", [0.0, -1.0, -7.0])
def test_gamma_poles(z):
    with pytest.raises(GammaPoleError):
        complex_gamma(z)


@settings(max_examples=60, deadline=None)
@given(st.floats(-19.5, 19.5), st.floats(-19.5, 19.5))
def test_gamma_recurrence(x, y):
    z = complex(x, y)
    if abs(z.imag) < 0.05 and abs(z.real - round(z.real)) < 0.05 and z.real < 0.5:
        return
    lhs = complex_gamma(z + 1)
    rhs = z * complex_gamma(z)
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_semi_infinite_basic():
    assert abs(integrate_semi_infinite(lambda t: np.exp(-t)) - 1.0) < 1e-10
    assert abs(integrate_semi_infinite(lambda t: t * np.exp(-t)) - 1.0) < 1e-10


def test_semi_infinite_log_constant_simpson_oracle():
    # log F^inf for b = 1/2 against a fine composite Simpson rule
    def f(t):
        return (4 * np.sinh(t / 4) ** 2 * np.sinh(t / 2) - np.sinh(t)) / np.sinh(t)

    def integrand(t):
        return (1 + f(t)) / (t * np.sinh(t))

    val = integrate_semi_infinite(integrand, value_at_zero=0.125)
    # for b = 1/2, 1 + f(t) = expm1(-t/2)^2 / (1 + e^{-t}); stable down to t = 0
    t = np.linspace(0.0, 60.0, 200001)
    h = t[1] - t[0]
    with np.errstate(invalid="ignore"):
        y = np.expm1(-t / 2) ** 2 / (1 + np.exp(-t)) / (t * np.sinh(t))
    y[0] = 0.125
    simpson = h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
    assert abs(val - simpson) < 1e-10
    assert abs(math.exp(val) - 1.2668686397) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-2, 2), st.floats(-2, 2))
def test_semi_infinite_linearity(k1, k2, a, b):
    f = lambda t: np.exp(-k1 * t) * np.cos(t)
    g = lambda t: np.exp(-k2 * t) * t
    lhs = integrate_semi_infinite(lambda t: a * f(t) + b * g(t))
    rhs = a * integrate_semi_infinite(f) + b * integrate_semi_infinite(g)
    assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))


def test_integrate_interval_polynomial():
    assert abs(integrate_interval(lambda x: x ** 5, 0.0, 2.0) - 64 / 6) < 1e-12


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)


def test_gauss_legendre_exact_on_polynomials():
    x, w = gauss_legendre(-1.0, 3.0, 5, panels=3)
    assert abs(np.sum(w * x ** 9) - (3 ** 10 - 1) / 10) < 1e-9


def test_g2_tilde_closed_form():
    g = GaussianTestFunction(1.0)
    assert abs(g.g2_tilde(0.0) - math.sqrt(math.pi)) < 1e-15
    oracle = float(mpmath.quad(lambda t: mpmath.exp(-t * t), [-mpmath.inf, mpmath.inf]))
    assert abs(g.g2_tilde(0.0) - oracle) < 1e-14
    p = np.linspace(0, 20, 50)
    assert np.all(np.diff(g.g2_tilde(p)) < 0)


def test_g2_tilde_general_callable_matches_gaussian():
    g = GaussianTestFunction(0.7, 1.3)
    plain = lambda t: g(t)
    for p in (0.0, 1.5, 0.4 + 0.3j):
        assert abs(g2_tilde(plain, p) - g.g2_tilde(p)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-5, 5), st.floats(-3, 3))
def test_g2_tilde_conjugate_symmetry(tau, x, y):
    g = GaussianTestFunction(tau)
    p = complex(x, y)
    assert abs(np.conj(g.g2_tilde(np.conj(p))) - g.g2_tilde(-p)) < 1e-12


def test_plancherel():
    g = GaussianTestFunction(0.8)
    rhs = convolution_rhs(g, 0.0, 0.0, 0)
    assert abs(rhs - g.g2_tilde(0.0)) < 1e-10


def test_scaled_test_function():
    g = GaussianTestFunction(1.0, 2.0)
    h = g.scaled(3.0)
    assert abs(h(3.0) - g(1.0)) < 1e-15
    with pytest.raises(ValueError):
        GaussianTestFunction(0.0)
