"""Two-particle form factors of the stress-energy tensor.

Vectors in K (x) K use the index a * d + b for e_a (x) e_b.  Lorentz
indices are upper, with metric diag(1, -1) and p(th; m) = m (ch th, sh th).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .minsol import MinimalSolution, assemble_minimal
from .smodel import (BulloughDodd, ConstantMatrix, Federbush, LittleSpace, NonlinearSigma,
                     ScalarProduct, SFunctionSpec, SpecError, flip, spec_from_dict)

__all__ = [
    "NormalizationError",
    "LightlikeError",
    "SymmetryError",
    "RationalPrefactor",
    "PoleFactor",
    "StressTensorSpec",
    "FormFactorF",
    "METRIC",
    "boost",
    "momentum",
    "L_tensor",
    "G_free",
    "build_F",
    "F2_component",
    "F2_general",
    "F1_form",
    "check_T_properties",
    "pole_residue",
    "stress_spec_from_dict",
]

METRIC = np.diag([1.0, -1.0])


class NormalizationError(ValueError):
    pass


class LightlikeError(ValueError):
    pass


class SymmetryError(ValueError):
    pass


def boost(lam) -> np.ndarray:
    c, s = np.cosh(lam), np.sinh(lam)
    return np.array([[c, s], [s, c]])


def momentum(theta, m: float = 1.0) -> np.ndarray:
    """p(th; m) = m (ch th, sh th), stacked on the last axis."""
    theta = np.asarray(theta, dtype=complex)
    return m * np.stack([np.cosh(theta), np.sinh(theta)], axis=-1)


@dataclass(frozen=True)
class RationalPrefactor:
    """q(x) = num(x)/den(x), coefficients ascending in x = ch z."""

    numerator_coeffs: tuple = (1.0,)
    denominator_coeffs: tuple = (1.0,)

    def __post_init__(self):
        num = _trim(self.numerator_coeffs)
        den = _trim(self.denominator_coeffs)
        if not any(den):
            raise ValueError("denominator of q must not vanish identically")
        object.__setattr__(self, "numerator_coeffs", num)
        object.__setattr__(self, "denominator_coeffs", den)

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        return (np.polynomial.polynomial.polyval(x, self.numerator_coeffs)
                / np.polynomial.polynomial.polyval(x, self.denominator_coeffs))

    @property
    def is_zero(self) -> bool:
        return not any(self.numerator_coeffs)

    @property
    def degree(self) -> int:
        """deg num - deg den; -1 marks the zero function."""
        if self.is_zero:
            return -1
        return len(self.numerator_coeffs) - len(self.denominator_coeffs)

    @property
    def leading(self) -> float:
        if self.is_zero:
            return 0.0
        return self.numerator_coeffs[-1] / self.denominator_coeffs[-1]

    @property
    def at_minus_one(self) -> float:
        return float(np.real(self(-1.0)))

    @property
    def is_normalized(self) -> bool:
        return abs(self.at_minus_one - 1.0) <= 1e-12

    def normalized(self) -> "RationalPrefactor":
        v = self.at_minus_one
        if v == 0.0:
            raise NormalizationError("q(-1) = 0 cannot be normalized")
        return RationalPrefactor(tuple(c / v for c in self.numerator_coeffs), self.denominator_coeffs)

    @classmethod
    def one(cls) -> "RationalPrefactor":
        return cls((1.0,))

    @classmethod
    def zero(cls) -> "RationalPrefactor":
        return cls((0.0,))


def _trim(coeffs) -> tuple:
    c = [float(x) for x in coeffs] or [0.0]
    for x in coeffs:
        if isinstance(x, complex) and x.imag != 0:
            raise ValueError("prefactor coefficients must be real")
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class PoleFactor:
    """1 / (a ch z + c): a first-order pole where ch z = -c/a, value 1 at z = i pi."""

    a: float = -2.0
    c: float = -1.0

    def __call__(self, z):
        return 1.0 / (self.a * np.cosh(np.asarray(z, dtype=complex)) + self.c)

    @property
    def location(self) -> complex:
        return complex(np.arccosh(complex(-self.c / self.a)))

    @classmethod
    def bound_state(cls) -> "PoleFactor":
        """The self-fusion pole at 2 pi i / 3."""
        return cls(-2.0, -1.0)


_FEDERBUSH_KEYS = ("s1", "s2", "as1", "as2")


@dataclass(frozen=True)
class StressTensorSpec:
    """A model together with its rational prefactors and declared poles.

    Prefactor keys: "q" for scalar models and the NLS model, "+"/"-" for
    constant matrices, "s1", "s2", "as1", "as2" for the Federbush model.
    """

    model: SFunctionSpec
    q_factors: Dict[str, RationalPrefactor] = field(default_factory=dict)
    pole_factors: tuple = ()

    def __post_init__(self):
        q = dict(self.q_factors)
        for k in self.channel_keys:
            q.setdefault(k, RationalPrefactor.zero() if k.startswith("as") else RationalPrefactor.one())
        extra = set(q) - set(self.channel_keys)
        if extra:
            raise SpecError(f"q: unknown channel keys {sorted(extra)} for this model")
        object.__setattr__(self, "q_factors", q)
        poles = tuple(self.pole_factors)
        if isinstance(self.model, BulloughDodd) and not poles:
            poles = (PoleFactor.bound_state(),)
        object.__setattr__(self, "pole_factors", poles)

    @property
    def channel_keys(self) -> tuple:
        m = self.model
        if isinstance(m, Federbush):
            return _FEDERBUSH_KEYS
        if isinstance(m, ConstantMatrix) and m.dim > 1:
            return ("+", "-")
        return ("q",)

    @property
    def parity_covariant(self) -> bool:
        if isinstance(self.model, Federbush):
            return self.q_factors["as1"].is_zero and self.q_factors["as2"].is_zero
        return True

    @property
    def q(self) -> RationalPrefactor:
        return self.q_factors[self.channel_keys[0]]


@dataclass(frozen=True)
class FormFactorF:
    """z -> F(z) in K (x) K, plus its channel pieces."""

    spec: StressTensorSpec
    components: Dict[str, Callable]
    minimal: Dict[str, MinimalSolution] = field(default_factory=dict)

    @property
    def little(self) -> LittleSpace:
        return self.spec.model.space

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = 0
        for fn in self.components.values():
            out = out + fn(z)
        return out

    def hat(self, z):
        """The matrix hat F with entries sigma_b F[a d + conj(b)]."""
        sp = self.little
        d = sp.dim
        v = self(z)
        out = np.empty(v.shape[:-1] + (d, d), dtype=complex)
        for a in range(d):
            for b in range(d):
                out[..., a, b] = sp.conj_signs[b] * v[..., a * d + sp.conjugation[b]]
        return out


def _channel(vec: np.ndarray, scal: Callable) -> Callable:
    vec = np.asarray(vec, dtype=complex)
    return lambda z: np.asarray(scal(z), dtype=complex)[..., None] * vec


def _poles(spec: StressTensorSpec) -> Callable:
    def p(z):
        out = np.ones(np.shape(z), dtype=complex)
        for pf in spec.pole_factors:
            out = out * pf(z)
        return out
    return p


def build_F(spec: StressTensorSpec, strict: bool = True) -> FormFactorF:
    """Assemble F channel by channel; `strict` enforces F(i pi) = I_2."""
    m = spec.model
    sp = m.space
    I2 = sp.I2
    q = spec.q_factors
    poles = _poles(spec)
    comps: Dict[str, Callable] = {}
    mins: Dict[str, MinimalSolution] = {}
    if isinstance(m, Federbush):
        d = 4
        for j, (ip, im) in enumerate(((0, 1), (2, 3)), start=1):
            X = np.zeros(d * d, dtype=complex)
            X[ip * d + im] = I2[ip * d + im]
            X[im * d + ip] = I2[im * d + ip]
            A = np.zeros(d * d, dtype=complex)
            A[ip * d + im], A[im * d + ip] = 1.0, -1.0
            qs, qa = q[f"s{j}"], q[f"as{j}"]
            comps[f"s{j}"] = _channel(X, lambda z, qs=qs: -1j * np.sinh(z / 2) * qs(np.cosh(z)))
            if not qa.is_zero:
                comps[f"as{j}"] = _channel(A, lambda z, qa=qa: np.cosh(z / 2) * qa(np.cosh(z)))
    elif isinstance(m, ConstantMatrix) and m.dim > 1:
        D = m.matrix.shape[0]
        Pp = 0.5 * (np.eye(D) + m.matrix)
        Pm = 0.5 * (np.eye(D) - m.matrix)
        qp, qm = q["+"], q["-"]
        comps["+"] = _channel(Pp @ I2, lambda z: qp(np.cosh(z)) * poles(z))
        comps["-"] = _channel(Pm @ I2, lambda z: -1j * np.sinh(z / 2) * qm(np.cosh(z)) * poles(z))
    elif isinstance(m, NonlinearSigma):
        msol = assemble_minimal(m, "0")
        mins["q"] = msol
        qq = q["q"]
        comps["q"] = _channel(I2, lambda z: qq(np.cosh(z)) * poles(z) * msol(z))
    elif isinstance(m, (ScalarProduct, BulloughDodd, ConstantMatrix)):
        msol = assemble_minimal(m)
        mins["q"] = msol
        qq = q["q"]
        comps["q"] = _channel(I2, lambda z: qq(np.cosh(z)) * poles(z) * msol(z))
    else:
        raise SpecError(f"no stress tensor assembly for {type(m).__name__}")
    out = FormFactorF(spec, comps, mins)
    if strict:
        err = float(np.max(np.abs(out(1j * np.pi) - I2)))
        if err > 1e-9:
            raise NormalizationError(f"F(i pi) differs from I_2 by {err:.3g}")
    return out


def L_tensor(p) -> np.ndarray:
    """(-p^mu p^nu + g^{mu nu} p^2) / p^2 for p = (p^0, p^1), stacked on the last axis."""
    p = np.asarray(p, dtype=complex)
    p2 = p[..., 0] ** 2 - p[..., 1] ** 2
    if np.any(np.abs(p2) <= 1e-14 * (np.abs(p[..., 0]) ** 2 + np.abs(p[..., 1]) ** 2 + 1e-300)):
        raise LightlikeError("L_tensor needs p^2 != 0")
    outer = p[..., :, None] * p[..., None, :]
    return (-outer + METRIC * p2[..., None, None]) / p2[..., None, None]


def G_free(m: float, z) -> np.ndarray:
    """(m^2/2pi) [[ch^2, sh ch], [sh ch, sh^2]] at z; rank one."""
    z = np.asarray(z, dtype=complex)
    c, s = np.cosh(z), np.sinh(z)
    M = np.stack([np.stack([c * c, s * c], -1), np.stack([s * c, s * s], -1)], -2)
    return (m * m / (2 * np.pi)) * M


def _pair_masses(sp: LittleSpace):
    m = np.asarray(sp.masses, dtype=float)
    return np.repeat(m, sp.dim), np.tile(m, sp.dim)


def F2_component(F: FormFactorF, mu: int, nu: int, theta, eta, x=(0.0, 0.0)) -> np.ndarray:
    """F2^{mu nu}(th, eta + i pi; x) through the mass-diagonal form."""
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    # on mass-diagonal vectors M_1 and M_2 agree, so m1 serves for both
    mm, _ = _pair_masses(F.little)
    sig = (theta + eta) / 2
    c, s = np.cosh(sig), np.sinh(sig)
    G = np.array([[c * c, s * c], [s * c, s * s]])[mu, nu]
    x0, x1 = x
    th = theta[..., None]
    et = eta[..., None]
    dp0 = mm * (np.cosh(th) - np.cosh(et))
    dp1 = mm * (np.sinh(th) - np.sinh(et))
    phase = np.exp(1j * (dp0 * x0 - dp1 * x1))
    Fv = F(eta - theta + 1j * np.pi)
    return (mm * mm / (2 * np.pi)) * np.asarray(G)[..., None] * phase * Fv


def F2_general(F: FormFactorF, z1, z2, x=(0.0, 0.0)) -> np.ndarray:
    """(M (x) M / 2pi) L(P(z1, z2)) e^{i P.x} F(z2 - z1), shape (2, 2, d^2)."""
    z1, z2 = complex(z1), complex(z2)
    m1, m2 = _pair_masses(F.little)
    P = momentum(z1, 1.0)[None, :] * m1[:, None] + momentum(z2, 1.0)[None, :] * m2[:, None]
    L = L_tensor(P)  # (d^2, 2, 2)
    phase = np.exp(1j * (P[:, 0] * x[0] - P[:, 1] * x[1]))
    Fv = F(z2 - z1)
    vals = (m1 * m2 / (2 * np.pi)) * phase * Fv
    return np.moveaxis(L, 0, -1) * vals


def F1_form(f1, z, x=(0.0, 0.0), little: Optional[LittleSpace] = None,
            seed: int = 0) -> np.ndarray:
    """e^{i p(z; M).x} [[sh^2, sh ch], [sh ch, ch^2]] F1(0), shape (2, 2, d).

    With `little` given, J F1(0) = F1(0) and V(g) F1(0) = F1(0) are enforced.
    """
    f1 = np.asarray(f1, dtype=complex)
    if little is not None:
        if np.max(np.abs(little.apply_J(f1) - f1), initial=0.0) > 1e-10:
            raise SymmetryError("F1(0) is not J-invariant")
        for V in little.group_samples(np.random.default_rng(seed)):
            if np.max(np.abs(V @ f1 - f1), initial=0.0) > 1e-10:
                raise SymmetryError("F1(0) is not invariant under the symmetry group")
        masses = np.asarray(little.masses, dtype=float)
    else:
        masses = np.ones(f1.shape[-1])
    z = complex(z)
    c, s = np.cosh(z), np.sinh(z)
    T = np.array([[s * s, s * c], [s * c, c * c]])
    phase = np.exp(1j * masses * (c * x[0] - s * x[1]))
    return T[:, :, None] * (phase * f1)


@dataclass(frozen=True)
class TReport:
    residuals: dict
    tol: float = 1e-8

    @property
    def flagged(self) -> tuple:
        return tuple(k for k, v in self.residuals.items() if not v < self.tol)

    @property
    def ok(self) -> bool:
        return not self.flagged


def check_T_properties(spec: StressTensorSpec, seed: int = 0, count: int = 50,
                       tol: float = 1e-8) -> TReport:
    """Numerical residuals of the one-particle stress tensor properties."""
    F = build_F(spec, strict=False)
    sp = F.little
    d = sp.dim
    S = spec.model
    rng = np.random.default_rng(seed)
    th = np.arange(-4.0, 4.0 + 1e-12, 0.25)
    z = th.astype(complex)
    r = {}

    def rel(a, b):
        scale = max(1.0, float(np.max(np.abs(b))))
        return float(np.max(np.abs(a - b))) / scale

    Fz = F(z)
    Smat = S(z)
    if Smat.ndim == 2:
        Smat = np.broadcast_to(Smat, (len(z),) + Smat.shape)
    r["s_symmetry"] = rel(Fz, np.einsum("kij,kj->ki", Smat, F(-z)))
    Fl = flip(d)
    r["s_periodicity"] = rel(F(z + 1j * np.pi), F(-z + 1j * np.pi) @ Fl.T)
    C2 = np.kron(sp.conj_matrix, sp.conj_matrix)
    zc = rng.uniform(-3, 3, 10) + 1j * rng.uniform(-0.3, 0.3, 10)
    r["cpt"] = rel(F(zc + 1j * np.pi), np.conj(F(np.conj(zc) + 1j * np.pi)) @ C2.T)
    r["normalization"] = float(np.max(np.abs(F(1j * np.pi) - sp.I2)))
    gres = 0.0
    for V in sp.group_samples(rng):
        gres = max(gres, rel(Fz @ np.kron(V, V).T, Fz))
    r["g_invariance"] = gres
    r["parity"] = rel(Fz @ Fl.T, Fz)

    a, b = rng.uniform(-3, 3, count), rng.uniform(-3, 3, count)
    m1, _ = _pair_masses(sp)
    cont = 0.0
    sym = 0.0
    for nu in (0, 1):
        F0 = F2_component(F, 0, nu, a, b)
        F1_ = F2_component(F, 1, nu, a, b)
        P0 = m1[None, :] * (np.cosh(a) - np.cosh(b))[:, None]
        P1 = m1[None, :] * (np.sinh(a) - np.sinh(b))[:, None]
        lhs = P0 * F0 - P1 * F1_
        scale = max(1.0, float(np.max(np.abs(P0 * F0))))
        cont = max(cont, float(np.max(np.abs(lhs))) / scale)
    sym = rel(F2_component(F, 0, 1, a, b), F2_component(F, 1, 0, a, b))
    r["continuity"] = cont
    r["lorentz_symmetry"] = sym

    gen = 0.0
    for k in range(10):
        z1 = complex(rng.uniform(-2, 2))
        z2 = complex(rng.uniform(-2, 2)) + 1j * np.pi
        full = F2_general(F, z1, z2)
        fast = np.array([[F2_component(F, mu, nu, z1.real, z2.real) for nu in (0, 1)] for mu in (0, 1)])
        mask = np.abs(fast).sum(axis=(0, 1)) > 0
        gen = max(gen, rel(full[..., mask], fast[..., mask]))
    r["general_form"] = gen

    cov = 0.0
    x = np.array([0.3, -0.7])
    for lam in (0.4, -1.1):
        Lb = boost(lam)
        z1 = complex(rng.uniform(-1.5, 1.5))
        z2 = complex(rng.uniform(-1.5, 1.5)) + 1j * np.pi
        lhs = F2_general(F, z1 + lam, z2 + lam, tuple(Lb @ x))
        rhs = np.einsum("am,bn,mnk->abk", Lb, Lb, F2_general(F, z1, z2, tuple(x)))
        cov = max(cov, rel(lhs, rhs))
    r["covariance"] = cov
    return TReport(r, tol)


def pole_residue(F: FormFactorF, pole: complex, radius: float = 1e-5) -> tuple:
    """(z - pole) F(z) approached along the real and the imaginary direction.

    Each estimate averages the two opposite sides, which cancels the
    first-order drift.
    """
    vals = []
    for u in (1.0, 1j):
        h = radius * u
        vals.append(0.5 * (h * F(pole + h) + (-h) * F(pole - h)))
    return tuple(np.asarray(v) for v in vals)


def stress_spec_from_dict(data: dict) -> StressTensorSpec:
    """{"model": {...}, "q": {channel: [coeffs] or {"num": [...], "den": [...]}}}."""
    if "model" not in data:
        raise SpecError("model: missing")
    model = spec_from_dict(data["model"])
    qd = data.get("q", {})
    if isinstance(qd, list):
        qd = {"q": qd}
    q = {}
    for k, v in qd.items():
        try:
            if isinstance(v, dict):
                q[k] = RationalPrefactor(tuple(v.get("num", [1.0])), tuple(v.get("den", [1.0])))
            else:
                q[k] = RationalPrefactor(tuple(v))
        except (TypeError, ValueError) as exc:
            raise SpecError(f"q.{k}: {exc}") from None
    return StressTensorSpec(model, q)
