import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qeiform.minsol import BandUnstableWarning
from qeiform.numerics import GaussianTestFunction
from qeiform.qei_engine import (FAILS, HOLDS, MARGINAL, Bump, HypothesisError,
                                PreconditionError, WavePacket, W_terms, build_witness_sequence,
                                chi_rho, constant_s_bound, decide_qei,
                                expectation_energy_density, lowest_bump_state, plateau_halfwidth,
                                prefactor_for_constant, random_wavepacket, w_minus, w_plus)
from qeiform.smodel import (BulloughDodd, Federbush, NonlinearSigma, ScalarProduct, free_boson,
                            free_fermion, ising)
from qeiform.stress_tensor import RationalPrefactor, StressTensorSpec


def spec(model, **q):
    return StressTensorSpec(model, {k: RationalPrefactor(tuple(v)) for k, v in q.items()})


CASES = [
    ("sg pair, q=1", spec(ScalarProduct(1, (0.5 + 0.3j, 0.5 - 0.3j))), HOLDS),
    ("sg b=.5, deg 1", spec(ScalarProduct(1, (0.5,)), q=[2, 1]), FAILS),
    ("sg b=.5, deg 2", spec(ScalarProduct(1, (0.5,)), q=[0, 0, 1]), FAILS),
    ("sg eps=-1, deg 1", spec(ScalarProduct(-1, (0.3, 0.6)), q=[2, 1]), HOLDS),
    ("sg eps=-1, deg 2", spec(ScalarProduct(-1, (0.3, 0.6)), q=[0, 0, 1]), FAILS),
    ("gbd n=1, deg 1", spec(BulloughDodd((0.4,)), q=[2, 1]), HOLDS),
    ("gbd n=1, deg 3", spec(BulloughDodd((0.4,)), q=[0, 0, 0, -1]), FAILS),
    ("gbd n=2, deg 2", spec(BulloughDodd((0.4, 0.7)), q=[0, 0, 1]), HOLDS),
    ("gbd n=2, deg 4", spec(BulloughDodd((0.5 + 0.2j, 0.5 - 0.2j)), q=[0, 0, 0, 0, 1]), FAILS),
    ("federbush canonical", spec(Federbush()), HOLDS),
    ("federbush s1 deg 1", spec(Federbush(), s1=[2, 1]), FAILS),
    ("federbush s2 deg 2", spec(Federbush(0.7, 1.0, 2.0), s2=[0, 0, 1]), FAILS),
    ("nls3 q=1", spec(NonlinearSigma(3)), HOLDS),
    ("nls4 q=1", spec(NonlinearSigma(4)), HOLDS),
    ("nls3 deg 1", spec(NonlinearSigma(3), q=[2, 1]), FAILS),
    ("free boson", spec(free_boson()), HOLDS),
    ("free fermion, deg 1", spec(free_fermion(), q=[2, 1]), FAILS),
    ("ising deg 2", spec(ising(), q=[0, 0, 1]), FAILS),
]


@pytest.mark.parametrize("name,s,expected", CASES, ids=[c[0] for c in CASES])
def test_verdicts_analytic_and_generic(name, s, expected):
    a = decide_qei(s)
    assert a.path == "analytic"
    assert a.status == expected
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandUnstableWarning)
        g = decide_qei(s, "generic")
    assert g.status == expected
    assert g.growth_exponent == pytest.approx(a.growth_exponent)


def test_threshold_rule_sinh_gordon():
    # s = n - p with n factors and p = 1 iff S(0) = -1
    for eps, bs in ((1, (0.3, 0.6)), (1, (0.2, 0.5, 0.8)), (-1, (0.4,))):
        m = ScalarProduct(eps, bs)
        s = m.s_exponent
        for deg in range(0, 4):
            v = decide_qei(spec(m, q=[0.0] * deg + [1.0]))
            if deg < s / 2 + 1:
                assert v.status == HOLDS
            elif deg > s / 2 + 1:
                assert v.status == FAILS
            else:
                assert v.marginal_constant_c is not None


@pytest.mark.parametrize("model", [ScalarProduct(1, (0.5,)), ScalarProduct(1, (0.2, 0.45, 0.7)),
                                   BulloughDodd((0.4,))])
@pytest.mark.parametrize("c,expected", [(0.2, HOLDS), (0.3, FAILS), (0.25, MARGINAL),
                                        (0.24, MARGINAL), (0.26, MARGINAL)])
def test_marginal_calibration(model, c, expected):
    deg = model.s_exponent // 2 + 1 if isinstance(model, ScalarProduct) else model.n + 1
    if isinstance(model, ScalarProduct) and model.s_exponent % 2:
        pytest.skip("odd s has no integer marginal degree")
    q = prefactor_for_constant(model, deg, c)
    assert q.is_normalized
    s = StressTensorSpec(model, {"q": q})
    a = decide_qei(s)
    assert a.marginal_constant_c == pytest.approx(c, rel=1e-10)
    assert a.status == expected
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandUnstableWarning)
        g = decide_qei(s, "generic")
    assert g.marginal_constant_c == pytest.approx(c, rel=1e-3)
    assert g.status == expected


def test_federbush_projection_is_reported():
    v = decide_qei(spec(Federbush(), as1=[0.5]))
    assert v.status == HOLDS
    assert "projected" in v.rationale


def test_nls_log_power():
    v = decide_qei(spec(NonlinearSigma(4)))
    assert v.growth_exponent == 1.0
    assert v.log_power == pytest.approx(-1.5)


def test_w_functions():
    assert w_plus(1.0) == 0.0 and w_minus(1.0) == 0.0
    assert w_plus(2.0) == pytest.approx(2 * math.sqrt(3) + math.log(2 + math.sqrt(3)), rel=1e-15)
    assert w_plus(2.0) == pytest.approx(4.7810595, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.01, 20.0))
def test_w_functions_as_integrals(s):
    wp = integrate.quad(lambda x: 2 * x * x / math.sqrt(x * x - 1), 1, s)[0]
    wm = integrate.quad(lambda x: 2 * (s - x) * x / math.sqrt(x * x - 1), 1, s)[0]
    assert w_plus(s) == pytest.approx(wp, rel=1e-8)
    assert w_minus(s) == pytest.approx(wm, rel=1e-8)
    assert 0 <= w_minus(s) <= w_plus(s)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.5, 2.0), st.floats(0.3, 3.0))
def test_scaling_law(m, tau, sigma):
    g = GaussianTestFunction(tau)
    direct = W_terms(m, g.scaled(sigma))
    via = tuple(w / sigma for w in W_terms(sigma * m, g))
    assert direct == pytest.approx(via, rel=1e-8)
    assert all(w >= 0 for w in direct)


def test_federbush_bound_structure():
    g = GaussianTestFunction(1.0)
    b = constant_s_bound(spec(Federbush(0.4, 1.0, 2.0)), g)
    # only the minus channel carries I_2; weight two per mass
    expected = sum(2.0 * W_terms(m, g)[1] for m in (1.0, 2.0))
    assert b.constant == pytest.approx(expected, rel=1e-14)
    assert b.projector_weights[0] == pytest.approx(0.0, abs=1e-15)
    # the coupling drops out
    assert constant_s_bound(spec(Federbush(0.9, 1.0, 2.0)), g).constant == b.constant


def test_ising_and_boson_bounds():
    g = GaussianTestFunction(1.0)
    Wp, Wm = W_terms(1.0, g)
    assert constant_s_bound(spec(ising()), g).constant == pytest.approx(Wm)
    assert constant_s_bound(spec(free_boson()), g).constant == pytest.approx(Wp)


def test_bound_hypotheses():
    with pytest.raises(HypothesisError):
        constant_s_bound(spec(NonlinearSigma(3)))
    with pytest.raises(HypothesisError, match="canonical"):
        constant_s_bound(spec(Federbush(), s1=[2, 1]))


def test_expectation_zero_packet():
    assert expectation_energy_density(spec(Federbush()), WavePacket(())) == 0.0


def test_free_boson_single_bump_positive():
    phi = WavePacket((Bump(0.0, 0.5, (1.0,)),))
    val = expectation_energy_density(spec(free_boson()), phi)
    fine = expectation_energy_density(spec(free_boson()), phi, nodes=192)
    assert val > 0
    assert val == pytest.approx(fine, rel=1e-10)


def test_chi_normalized():
    val = integrate.quad(lambda x: chi_rho(x, 0.3) ** 2, -0.3, 0.3, epsabs=0, epsrel=1e-12)[0]
    assert val == pytest.approx(1.0, rel=1e-10)


def test_random_packets_unit_norm():
    rng = np.random.default_rng(3)
    for _ in range(5):
        assert random_wavepacket(rng, 4).norm() == pytest.approx(1.0, rel=1e-10)


def test_expectation_is_quadratic():
    rng = np.random.default_rng(7)
    phi = random_wavepacket(rng, 4)
    s = spec(Federbush())
    e1 = expectation_energy_density(s, phi)
    scaled = WavePacket(tuple(Bump(b.center, b.half_width, tuple(2j * np.asarray(b.vector)))
                              for b in phi.bumps))
    assert expectation_energy_density(s, scaled) == pytest.approx(4 * e1, rel=1e-12)


def test_lowest_state_above_bound_ising():
    g = GaussianTestFunction(1.0)
    s = spec(ising())
    val, phi = lowest_bump_state(s, g, centers=np.arange(-3.0, 3.01, 0.5))
    assert val < 0
    assert val >= -constant_s_bound(s, g).constant
    assert phi.norm() == pytest.approx(1.0, rel=1e-6)
    # the eigenproblem used 24 nodes per bump, the check uses 96
    assert expectation_energy_density(s, phi, g) == pytest.approx(val, rel=1e-5)


def test_plateau_halfwidth():
    g = GaussianTestFunction(1.0)
    d = plateau_halfwidth(g, 2.0)
    assert g.g2_tilde(2.0 * d).real == pytest.approx(0.5 * g.g2_tilde(0.0).real, rel=1e-12)


def test_witness_federbush():
    seq = build_witness_sequence(spec(Federbush(), s1=[2, 1]), GaussianTestFunction(1.0), 5)
    e = [w.expectation for w in seq]
    assert all(b < a for a, b in zip(e, e[1:]))
    assert e[-1] < 0 and abs(e[-1]) > 10 * abs(e[0])


def test_witness_gbd_decreasing():
    seq = build_witness_sequence(spec(BulloughDodd((0.4,)), q=[0, 0, 0, -1]),
                                 GaussianTestFunction(1.0), 3, nodes=48)
    e = [w.expectation for w in seq]
    assert all(b < a for a, b in zip(e, e[1:]))


def test_witness_requires_failure():
    with pytest.raises(PreconditionError):
        build_witness_sequence(spec(Federbush()), GaussianTestFunction(1.0), 3)


def test_method_validation():
    with pytest.raises(ValueError):
        decide_qei(spec(Federbush()), "magic")
