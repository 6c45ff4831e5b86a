import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import scalar_presets
from qeiform.charfct import charfct_sinh_gordon, nls_channel_charfct
from qeiform.minsol import (DivergentIntegralError, StripError, UnknownModelError,
                            assemble_minimal, asymptotic_constant, classify_growth,
                            eval_F_f, eval_S_f, strip_halfwidth, watson_residual)
from qeiform.smodel import (BulloughDodd, Federbush, NonlinearSigma, ScalarProduct,
                            eval_scalar_factor, ising)

F_INF_HALF = 1.2668686397  # |F(th + i pi)| limit for b = 1/2, frozen from an mpmath run


def _mp_F_f(b, z):
    b, z = mp.mpf(b), mp.mpc(z)

    def g(t):
        f = -(mp.exp(-b * t) + mp.exp(-(1 - b) * t)) / (1 + mp.exp(-t))
        return f * mp.sin((1j * mp.pi - z) * t / (2 * mp.pi)) ** 2 / (t * mp.sinh(t))
    return mp.exp(2 * mp.quad(g, [0, 1, 4, 16, 64, mp.inf]))


@pytest.mark.parametrize("b", [0.2, 0.5, 0.7])
@pytest.mark.parametrize("z", [0.7 + 1.2j, -1.5 + 3.0j, 2.0 + 4.0j])
def test_F_f_against_mpmath(b, z):
    mp.mp.dps = 25
    ref = complex(_mp_F_f(b, z))
    got = complex(eval_F_f(charfct_sinh_gordon(b), z))
    assert abs(got - ref) < 1e-10 * abs(ref)


def test_S_f_recovers_scalar_factor():
    # S_f = (-1)^p S with p = 1 for a single factor
    f = charfct_sinh_gordon(0.3)
    th = np.linspace(-4, 4, 17)
    assert np.max(np.abs(eval_S_f(f, th) + eval_scalar_factor(0.3, th))) < 1e-10


@pytest.mark.parametrize("name", sorted(scalar_presets()))
def test_watson_and_normalization(name):
    S = scalar_presets()[name]
    msol = assemble_minimal(S)
    r = watson_residual(msol)
    assert r["watson"] < 1e-9
    assert r["reflection"] < 1e-9
    assert r["normalization"] < 1e-12


def test_sinh_zero_power():
    assert assemble_minimal(ScalarProduct(1, (0.3,))).sinh_zero_power == 1
    assert assemble_minimal(ScalarProduct(1, (0.3, 0.6))).sinh_zero_power == 0
    assert assemble_minimal(ScalarProduct(-1, (0.3,))).sinh_zero_power == 0
    assert assemble_minimal(BulloughDodd((0.4,))).sinh_zero_power == 1
    assert assemble_minimal(-1).sinh_zero_power == 1


def test_constant_minus_one():
    msol = assemble_minimal(-1)
    z = np.array([0.3 + 0.1j, 1.0 + 2.0j])
    assert np.max(np.abs(msol(z) - (-1j * np.sinh(z / 2)))) < 1e-15
    assert abs(msol(1j * np.pi) - 1) < 1e-15


def test_asymptotic_constant_frozen():
    msol = assemble_minimal(ScalarProduct(1, (0.5,)))
    assert msol.asymptotic_constant == pytest.approx(F_INF_HALF, abs=1e-9)
    th = 30.0
    assert abs(msol(th + 1j * np.pi)) == pytest.approx(F_INF_HALF, rel=1e-8)


@pytest.mark.parametrize("b", [0.15, 0.5, 0.8])
def test_asymptotic_constant_matches_large_theta(b):
    msol = assemble_minimal(ScalarProduct(1, (b, 0.6)))
    f0 = msol.charfct.f0
    th = 35.0
    measured = abs(msol(th + 1j * np.pi)) * np.exp(-(msol.sinh_zero_power + f0) * th / 2)
    assert measured == pytest.approx(asymptotic_constant(msol), rel=1e-5)


def test_divergent_constant():
    msol = assemble_minimal(NonlinearSigma(4), "0")
    with pytest.raises(DivergentIntegralError):
        asymptotic_constant(msol)


def test_strip_errors():
    f = charfct_sinh_gordon(0.5)
    eps = strip_halfwidth(f)
    assert eps == pytest.approx(0.9 * 0.5 * np.pi)
    with pytest.raises(StripError):
        eval_F_f(f, 1.0 - 1.05 * eps * 1j)
    with pytest.raises(StripError):
        eval_S_f(f, 1.0 + 1.05 * eps * 1j)


def test_watson_continuation_outside_strip():
    S = ScalarProduct(1, (0.5,))
    msol = assemble_minimal(S)
    z = 0.4 - 2.5j
    assert abs(msol(z) - S.scalar(z) * msol(-z)) < 1e-9 * abs(msol(z))


def test_unknown_models():
    with pytest.raises(UnknownModelError):
        assemble_minimal(Federbush(0.3))
    with pytest.raises(UnknownModelError):
        assemble_minimal(2)
    with pytest.raises(UnknownModelError):
        assemble_minimal(NonlinearSigma(3), "x")
    assert assemble_minimal(ising()).sinh_zero_power == 1


def test_product_law():
    f1, f2 = charfct_sinh_gordon(0.3), charfct_sinh_gordon(0.65)
    z = np.array([0.5 + 1.0j, -2.0 + 3.5j, 4.0 + 3.1416j])
    assert np.max(np.abs(eval_F_f(f1 + f2, z) - eval_F_f(f1, z) * eval_F_f(f2, z))) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(-5, 5), st.floats(0.1, 6.0))
def test_conjugation_symmetry(b, x, y):
    f = charfct_sinh_gordon(b)
    z = complex(x, y)
    a, c = eval_F_f(f, z), eval_F_f(f, -np.conj(z))
    assert abs(a - np.conj(c)) < 1e-12 * max(1.0, abs(a))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.0, 0.4), st.sampled_from([1, -1]))
def test_watson_random_pairs(br, bi, eps):
    bs = (complex(br, bi), complex(br, -bi)) if bi > 0 else (br,)
    r = watson_residual(assemble_minimal(ScalarProduct(eps, bs)), grid=[-3.0, -0.5, 0.7, 2.5])
    assert r["watson"] < 1e-9 and r["reflection"] < 1e-9


def test_classify_growth_sinh_gordon():
    g = classify_growth(assemble_minimal(ScalarProduct(1, (0.5,))))
    assert g.exponent == 0.0 and g.log_power == 0.0
    assert g.ratio < 1.0 + 1e-3
    assert g.band[1] == pytest.approx(F_INF_HALF, rel=1e-6)
    assert g.drift < 0.05


def test_classify_growth_nls_channel():
    msol = assemble_minimal(NonlinearSigma(4), "0")
    g = classify_growth(msol, extra_exponent=1.0)
    nu = 1.0
    # own part (f0 + p)/2 = (1 + 1)/2 plus the extra unit
    assert msol.sinh_zero_power == 1
    assert g.exponent == pytest.approx(2.0)
    assert g.log_power == pytest.approx(-(1 + nu / 2))
    assert g.ratio < 1.2
    assert nls_channel_charfct(4, "0").f0 == 1.0


@pytest.mark.parametrize("n", [3, 4, 8])
@pytest.mark.parametrize("ch", ["+", "-", "0"])
def test_nls_channel_minimal_solutions(n, ch):
    msol = assemble_minimal(NonlinearSigma(n), ch)
    r = watson_residual(msol)
    assert max(r.values()) < 1e-9
    # S_- = b - c is +1 at 0, the other two channel functions are -1
    assert msol.sinh_zero_power == (0 if ch == "-" else 1)
