import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qeiform.charfct import (CharacteristicFunction, FitUnstableError, NonIntegrableError,
                             charfct_gamma_product, charfct_numeric, charfct_pair,
                             charfct_scalar_factor, charfct_sinh_gordon, growth_data,
                             nls_channel_charfct, zero_charfct)
from qeiform.smodel import NonlinearSigma, ScalarProduct, eval_scalar_factor


def _mp_sinh_gordon(b, t):
    # cosine transform of the log-derivative of a single factor
    a = mp.sin(mp.pi * b)
    w = mp.mpf(t) / mp.pi
    g = lambda th: mp.cosh(th) * mp.cos(w * th) / (mp.sinh(th) ** 2 + a * a)
    return -(2 * a / mp.pi) * mp.quad(g, [0, 0.5, 1, 2, 4, 8, 16, 32, 64])


@pytest.mark.parametrize("b", [0.1, 0.37, 0.5, 0.8])
@pytest.mark.parametrize("t", [0.0, 0.3, 1.7, 5.0])
def test_sinh_gordon_against_mpmath(b, t):
    mp.mp.dps = 30
    ref = float(_mp_sinh_gordon(mp.mpf(b), t))
    assert abs(charfct_sinh_gordon(b)(t) - ref) < 1e-12


def test_sinh_gordon_values():
    f = charfct_sinh_gordon(0.3)
    assert f(0.0) == -1.0
    assert (f.f0, f.f1) == (-1.0, 0.0)
    assert f.decay_rate == pytest.approx(0.3)
    assert abs(f(40.0)) < 1e-5


def test_b_out_of_range():
    with pytest.raises(ValueError, match=r"\(0,1\)\+iR"):
        charfct_sinh_gordon(1.5)


def test_inverse_factor():
    f = charfct_scalar_factor(-0.3)
    g = charfct_sinh_gordon(0.3)
    t = np.linspace(0, 10, 21)
    assert np.allclose(f(t), -g(t), atol=0, rtol=1e-15)
    assert f.f0 == 1.0


def test_pair_is_real_sum():
    b = 0.4 + 0.25j
    f = charfct_pair(b)
    t = np.linspace(0, 8, 17)
    direct = charfct_sinh_gordon(b).func(t) + charfct_sinh_gordon(np.conj(b)).func(t)
    assert np.max(np.abs(f(t) - direct)) < 1e-15
    assert f.f0 == -2.0


@pytest.mark.parametrize("b", [0.2, 0.5, 0.4 + 0.2j])
def test_numeric_matches_closed(b):
    S = ScalarProduct(1, (b, np.conj(b)) if np.imag(b) else (b,))
    closed = charfct_pair(b) if np.imag(b) else charfct_sinh_gordon(b)
    t = np.linspace(0, 12, 49)
    f = charfct_numeric(S.scalar, grid=t)
    assert np.max(np.abs(f(t) - closed(t))) < 1e-9
    f0, f1 = growth_data(f)
    assert abs(f0 - closed.f0) < 1e-8
    assert abs(f1 - closed.f1) < 1e-6


def test_numeric_with_exact_log_derivative():
    b = 0.3
    a = np.sin(np.pi * b)

    def dlog(th):
        # ch/(sh^2 + a^2) rewritten so that large th gives 0 instead of inf/inf
        with np.errstate(over="ignore"):
            return 2j * a / (np.sinh(th) * np.tanh(th) + a * a / np.cosh(th))
    t = np.linspace(0, 10, 41)
    f = charfct_numeric(None, grid=t, dlogS=dlog)
    assert np.max(np.abs(f(t) - charfct_sinh_gordon(b)(t))) < 1e-10


@pytest.mark.parametrize("n", [3, 5])
@pytest.mark.parametrize("k,ch", list(enumerate("+-0")))
def test_nls_channels_numeric_vs_closed(n, k, ch):
    S = NonlinearSigma(n)
    t = np.linspace(0, 10, 41)
    f = charfct_numeric(lambda th: S.channels(th)[k], grid=t)
    closed = nls_channel_charfct(n, ch)
    assert np.max(np.abs(f(t) - closed(t))) < 1e-9
    assert abs(f.f0 - closed.f0) < 1e-8
    assert abs(f.f1 - closed.f1) < 1e-6


@pytest.mark.parametrize("n", [3, 4, 8])
def test_nls_growth_data(n):
    nu = 2.0 / (n - 2)
    assert growth_data(nls_channel_charfct(n, "0")) == pytest.approx((1.0, -(1 + nu / 2)))
    assert growth_data(nls_channel_charfct(n, "+")) == pytest.approx((-1.0, nu / 2))
    assert growth_data(nls_channel_charfct(n, "-")) == pytest.approx((0.0, -nu / 2))


def test_gamma_product_cardinality():
    with pytest.raises(ValueError, match="cardinality"):
        charfct_gamma_product(1.0, [0.5], [1.0, 2.0])
    with pytest.raises(ValueError):
        charfct_gamma_product(-1.0, [0.5], [1.0])


def test_gamma_product_continuity_at_zero():
    f = charfct_gamma_product(2.0, [1.5, 2.0], [1.0, 1.5])
    assert abs(f(1e-7) - f(0.0)) < 1e-6
    h = 1e-5
    assert abs((f(h) - f(0.0)) / h - f.f1) < 1e-4


def test_zero_charfct():
    f = zero_charfct()
    assert np.all(f(np.linspace(0, 5, 6)) == 0)
    assert growth_data(f) == (0.0, 0.0)


def test_non_integrable_detected():
    # constant log-derivative tail ~ 1/th
    with pytest.raises(NonIntegrableError):
        charfct_numeric(None, grid=[0.0, 1.0], dlogS=lambda th: 1j / (1.0 + np.abs(th)))


def test_fit_residual_gate():
    t = np.linspace(0, 5, 2000)
    noisy = -np.exp(-t) + 1e-3 * np.sin(300 * t)
    f = CharacteristicFunction.from_csv("t,f\n" + "".join(f"{a},{b}\n" for a, b in zip(t, noisy)))
    with pytest.raises(FitUnstableError):
        growth_data(f, max_residual=1e-8)


def test_csv_round_trip():
    f = charfct_sinh_gordon(0.45)
    g = CharacteristicFunction.from_csv(f.to_csv(), decay_rate=0.45)
    t = np.linspace(0, 30, 77)
    assert np.max(np.abs(g(t) - f(t))) < 1e-7
    assert abs(g.f0 + 1) < 1e-7


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(-3, 3), st.floats(0, 20))
def test_linearity_and_evenness(b1, b2, c, t):
    f, g = charfct_sinh_gordon(b1), charfct_sinh_gordon(b2)
    h = f + g.scale(c)
    assert abs(h(t) - (f(t) + c * g(t))) < 1e-14
    assert h(t) == h(-t)
    assert h.f0 == pytest.approx(f.f0 + c * g.f0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.1, 0.9))
def test_product_rule_for_symbols(b1, b2):
    # f of a product is the sum of the f's; check through the numeric transform
    S = lambda th: eval_scalar_factor(b1, th) * eval_scalar_factor(b2, th)
    t = np.array([0.0, 1.0, 3.0])
    f = charfct_numeric(S, grid=t, theta_max=200.0)
    ref = charfct_sinh_gordon(b1)(t) + charfct_sinh_gordon(b2)(t)
    assert np.max(np.abs(f(t) - ref)) < 1e-6
