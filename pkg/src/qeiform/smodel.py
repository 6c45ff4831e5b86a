"""Little spaces, S-functions, axiom checks and eigen-decompositions.

Two-particle operators are dense matrices on K (x) K in the product basis,
with basis vector e_a (x) e_b stored at index a*dim + b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import complex_loggamma

__all__ = [
    "PoleError",
    "SpecError",
    "LittleSpace",
    "SFunctionSpec",
    "ConstantMatrix",
    "ScalarProduct",
    "BulloughDodd",
    "Federbush",
    "NonlinearSigma",
    "EigenDecomposition",
    "AxiomReport",
    "free_boson",
    "free_fermion",
    "ising",
    "eval_scalar_factor",
    "eval_s",
    "check_axioms",
    "eigen_decompose",
    "flip",
    "spec_from_dict",
]

SYMMETRIES = ("trivial", "Z2", "U1xU1", "O(n)")


class PoleError(ValueError):
    pass


class SpecError(ValueError):
    pass


def flip(d: int) -> np.ndarray:
    """The flip operator u (x) v -> v (x) u on C^d (x) C^d."""
    F = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            F[b * d + a, a * d + b] = 1.0
    return F


def _contraction(d: int) -> np.ndarray:
    K = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            K[a * d + a, b * d + b] = 1.0
    return K


@dataclass(frozen=True)
class LittleSpace:
    """Internal one-particle data: masses, CPT conjugation and symmetry group.

    J acts antilinearly as J e_a = conj_signs[a] * e_{conjugation[a]}.
    """

    masses: tuple
    conjugation: tuple
    conj_signs: tuple
    symmetry: str = "trivial"

    def __post_init__(self):
        d = len(self.masses)
        if len(self.conjugation) != d or len(self.conj_signs) != d:
            raise SpecError("masses, conjugation and conj_signs must have equal length")
        if any(not m > 0 for m in self.masses):
            raise SpecError("masses must be strictly positive")
        for a, ab in enumerate(self.conjugation):
            if self.conjugation[ab] != a:
                raise SpecError("conjugation must be an involution")
            if self.masses[ab] != self.masses[a]:
                raise SpecError("J must commute with M")
            if self.conj_signs[a] * self.conj_signs[ab] != 1:
                raise SpecError("J must square to the identity")
        if self.symmetry not in SYMMETRIES:
            raise SpecError(f"symmetry must be one of {SYMMETRIES}")

    @property
    def dim(self) -> int:
        return len(self.masses)

    @property
    def conj_matrix(self) -> np.ndarray:
        """Real matrix C with J v = C conj(v)."""
        d = self.dim
        C = np.zeros((d, d))
        for a in range(d):
            C[self.conjugation[a], a] = self.conj_signs[a]
        return C

    def apply_J(self, v):
        return self.conj_matrix @ np.conj(v)

    @property
    def mass_matrix(self) -> np.ndarray:
        return np.diag(np.asarray(self.masses, dtype=float))

    @property
    def distinct_masses(self) -> tuple:
        return tuple(sorted(set(self.masses)))

    def mass_projector(self, m: float) -> np.ndarray:
        return np.diag([1.0 if mm == m else 0.0 for mm in self.masses])

    @property
    def I2(self) -> np.ndarray:
        """The vector sum_a e_a (x) J e_a in K (x) K."""
        d = self.dim
        v = np.zeros(d * d, dtype=complex)
        for a in range(d):
            v[a * d + self.conjugation[a]] += self.conj_signs[a]
        return v

    def group_samples(self, rng: np.random.Generator, count: int = 8) -> list:
        """Representative unitaries V(g) for the symmetry group."""
        d = self.dim
        if self.symmetry == "trivial":
            return []
        if self.symmetry == "Z2":
            return [-np.eye(d)]
        if self.symmetry == "U1xU1":
            if d != 4:
                raise SpecError("U1xU1 symmetry needs dim 4")
            out = []
            for k1, k2 in rng.uniform(-1, 1, size=(count, 2)):
                ph = [k1, -k1, k2, -k2]
                out.append(np.diag(np.exp(2j * np.pi * np.asarray(ph))))
            return out
        out = []
        for _ in range(count):
            i, j = rng.choice(d, size=2, replace=False)
            a = rng.uniform(0, 2 * np.pi)
            R = np.eye(d)
            R[i, i] = R[j, j] = math.cos(a)
            R[i, j], R[j, i] = -math.sin(a), math.sin(a)
            out.append(R)
        P = np.eye(d)
        P[0, 0] = -1.0
        out.append(P)
        return out


def _scalar_space(mass: float, symmetry: str = "trivial") -> LittleSpace:
    return LittleSpace((float(mass),), (0,), (1.0,), symmetry)


def eval_scalar_factor(b, z):
    """(sh z - i sin(pi b)) / (sh z + i sin(pi b)), vectorised over z."""
    z = np.asarray(z, dtype=complex)
    a = 1j * np.sin(np.pi * complex(b))
    # written through u = 1/sh z, which stays finite for large |Re z|
    big = np.abs(z.real) > 1.0
    s = np.where(z.real >= 0, 1.0, -1.0)
    zb = np.where(big, z, 2.0)
    zs = np.where(big, 0.0, z)
    u = 2.0 * s * np.exp(-s * zb) / (1.0 - np.exp(-2.0 * s * zb))
    sh = np.sinh(zs)
    num = np.where(big, 1.0 - a * u, sh - a)
    den = np.where(big, 1.0 + a * u, sh + a)
    if np.any(np.abs(den) <= 1e-15 * (np.abs(num) + abs(a))):
        raise PoleError(f"scalar factor b={b} has a pole at the requested rapidity")
    out = num / den
    return out[()] if out.ndim == 0 else out


def _parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return complex(x.replace(" ", "").replace("i", "j"))
    return complex(x)


def _dump_complex(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


class SFunctionSpec:
    """Base class; subclasses are frozen dataclasses."""

    kind = "abstract"
    is_constant = False

    @property
    def space(self) -> LittleSpace:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        return self.space.dim

    def __call__(self, z) -> np.ndarray:
        """S(z) as a (d^2, d^2) matrix, or a stack for array input."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class _ScalarSpec(SFunctionSpec):
    def scalar(self, z):
        raise NotImplementedError

    def __call__(self, z):
        v = np.asarray(self.scalar(z), dtype=complex)
        return v[..., None, None]

    @property
    def value_at_zero(self) -> int:
        """S(0), which is always +1 or -1 for these models."""
        return int(round(complex(self.scalar(0.0)).real))


@dataclass(frozen=True)
class ConstantMatrix(SFunctionSpec):
    matrix: np.ndarray
    little: LittleSpace
    name: str = "constant"

    kind = "constant"
    is_constant = True

    def __post_init__(self):
        S = np.asarray(self.matrix, dtype=complex)
        d = self.little.dim
        if S.shape != (d * d, d * d):
            raise SpecError(f"matrix must be {d*d}x{d*d}")
        eye = np.eye(d * d)
        if np.max(np.abs(S.conj().T @ S - eye)) > 1e-12:
            raise SpecError("constant S-function must be unitary")
        if np.max(np.abs(S - S.conj().T)) > 1e-12:
            raise SpecError("constant S-function must be self-adjoint")
        object.__setattr__(self, "matrix", S)

    @property
    def space(self):
        return self.little

    def __call__(self, z):
        z = np.asarray(z)
        return np.broadcast_to(self.matrix, z.shape + self.matrix.shape).copy()

    def scalar(self, z):
        if self.little.dim != 1:
            raise SpecError("scalar() only for dim 1")
        return np.full(np.shape(z), self.matrix[0, 0])[()]

    @property
    def value_at_zero(self) -> int:
        return int(round(self.matrix[0, 0].real)) if self.little.dim == 1 else 0

    def to_dict(self):
        if self.name in _CONSTANT_PRESETS:
            return {"variant": self.name, "parameters": {"mass": self.little.masses[0]}}
        return {
            "variant": "constant",
            "parameters": {
                "matrix": [[_dump_complex(x) for x in row] for row in self.matrix],
                "masses": list(self.little.masses),
                "conjugation": list(self.little.conjugation),
                "conj_signs": list(self.little.conj_signs),
                "symmetry": self.little.symmetry,
            },
        }


def free_boson(mass: float = 1.0) -> ConstantMatrix:
    return ConstantMatrix(np.array([[1.0]]), _scalar_space(mass, "Z2"), "free_boson")


def free_fermion(mass: float = 1.0) -> ConstantMatrix:
    return ConstantMatrix(np.array([[-1.0]]), _scalar_space(mass, "Z2"), "free_fermion")


def ising(mass: float = 1.0) -> ConstantMatrix:
    return ConstantMatrix(np.array([[-1.0]]), _scalar_space(mass, "Z2"), "ising")


_CONSTANT_PRESETS = {"free_boson": free_boson, "free_fermion": free_fermion, "ising": ising}


def _check_b(b: complex, where: str = "b") -> complex:
    if not 0.0 < b.real < 1.0:
        raise SpecError(f"{where} = {b} violates the constraint b in (0,1)+iR")
    return b


def _conjugate_closed(bs: Sequence[complex], tol: float = 1e-12) -> bool:
    pool = list(bs)
    while pool:
        b = pool.pop()
        if abs(b.imag) <= tol:
            continue
        match = [k for k, c in enumerate(pool) if abs(c - b.conjugate()) <= tol]
        if not match:
            return False
        pool.pop(match[0])
    return True


@dataclass(frozen=True)
class ScalarProduct(_ScalarSpec):
    """eps * prod_k S(z; b_k) on a one-dimensional little space."""

    eps: int = 1
    b_list: tuple = (0.5,)
    mass: float = 1.0
    allow_unpaired: bool = False

    kind = "sinh_gordon"

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise SpecError("eps must be +1 or -1")
        bs = tuple(_check_b(_parse_complex(b), f"b_list[{k}]") for k, b in enumerate(self.b_list))
        object.__setattr__(self, "b_list", bs)
        if not self.allow_unpaired and not _conjugate_closed(bs):
            raise SpecError("b_list must be closed under complex conjugation")

    @property
    def space(self):
        return _scalar_space(self.mass, "Z2")

    def scalar(self, z):
        out = self.eps * np.ones(np.shape(z), dtype=complex)
        for b in self.b_list:
            out = out * eval_scalar_factor(b, z)
        return out[()] if np.ndim(out) == 0 else out

    @property
    def value_at_zero(self) -> int:
        return self.eps * (-1) ** len(self.b_list)

    @property
    def s_exponent(self) -> int:
        """Number of zero-carrying sinh factors absorbed by the minimal solution."""
        n = len(self.b_list)
        return 2 * (n // 2) if self.eps == 1 else 2 * ((n - 1) // 2) + 1

    def to_dict(self):
        return {"variant": "sinh_gordon",
                "parameters": {"eps": self.eps, "b": [_dump_complex(b) for b in self.b_list],
                               "mass": self.mass}}


@dataclass(frozen=True)
class BulloughDodd(_ScalarSpec):
    """S(z;-2/3) prod_k S(z; b_k/3) S(z; (2-b_k)/3)."""

    b_list: tuple = ()
    mass: float = 1.0

    kind = "gbd"

    def __post_init__(self):
        bs = tuple(_check_b(_parse_complex(b), f"b_list[{k}]") for k, b in enumerate(self.b_list))
        if not _conjugate_closed(bs):
            raise SpecError("b_list must be closed under complex conjugation")
        object.__setattr__(self, "b_list", bs)

    @property
    def n(self) -> int:
        return len(self.b_list)

    @property
    def factor_params(self) -> tuple:
        out = [-2.0 / 3.0]
        for b in self.b_list:
            out += [b / 3.0, (2.0 - b) / 3.0]
        return tuple(complex(x) for x in out)

    @property
    def space(self):
        return _scalar_space(self.mass, "trivial")

    def scalar(self, z):
        out = np.ones(np.shape(z), dtype=complex)
        for b in self.factor_params:
            out = out * eval_scalar_factor(b, z)
        return out[()] if np.ndim(out) == 0 else out

    @property
    def value_at_zero(self) -> int:
        return -1

    def to_dict(self):
        return {"variant": "gbd", "parameters": {"b": [_dump_complex(b) for b in self.b_list],
                                                 "mass": self.mass}}


@dataclass(frozen=True, init=False)
class Federbush(ConstantMatrix):
    """Two massive Dirac-type doublets with basis (1+, 1-, 2+, 2-)."""

    matrix: np.ndarray = None
    little: LittleSpace = None
    name: str = "federbush"
    lam: float = 0.25
    m1: float = 1.0
    m2: float = 1.0

    kind = "federbush"

    def __init__(self, lam: float = 0.25, m1: float = 1.0, m2: float = 1.0):
        # the matrix and little space are derived, so only (lam, m1, m2) are accepted
        object.__setattr__(self, "name", "federbush")
        object.__setattr__(self, "lam", float(lam))
        object.__setattr__(self, "m1", float(m1))
        object.__setattr__(self, "m2", float(m2))
        self.__post_init__()

    def __post_init__(self):
        e = np.exp(2j * np.pi * self.lam)
        ec = np.conj(e)
        c = -np.array([[1, 1, e, ec], [1, 1, ec, e], [ec, e, 1, 1], [e, ec, 1, 1]])
        S = np.zeros((16, 16), dtype=complex)
        for a in range(4):
            for b in range(4):
                S[b * 4 + a, a * 4 + b] = c[a, b]
        sp = LittleSpace((self.m1, self.m1, self.m2, self.m2), (1, 0, 3, 2),
                         (-1.0, -1.0, -1.0, -1.0), "U1xU1")
        object.__setattr__(self, "matrix", S)
        object.__setattr__(self, "little", sp)
        super().__post_init__()

    @property
    def coefficients(self) -> np.ndarray:
        """c[a, b] with S(e_a (x) e_b) = c[a, b] e_b (x) e_a."""
        d = 4
        return np.array([[self.matrix[b * d + a, a * d + b] for b in range(d)] for a in range(d)])

    def to_dict(self):
        return {"variant": "federbush",
                "parameters": {"lam": self.lam, "m1": self.m1, "m2": self.m2}}


@dataclass(frozen=True)
class NonlinearSigma(SFunctionSpec):
    """O(n) nonlinear sigma model, S = (b 1 + c F + d K) F."""

    n: int = 3
    mass: float = 1.0

    kind = "nls"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise SpecError("NLS needs integer n >= 3")

    @property
    def nu(self) -> float:
        return 2.0 / (self.n - 2)

    @property
    def space(self):
        n = self.n
        return LittleSpace((self.mass,) * n, tuple(range(n)), (1.0,) * n, "O(n)")

    def _s_over(self, z):
        # s(z)/z, regular at z = 0
        w = np.asarray(z, dtype=complex) / (2j * np.pi)
        nu = self.nu
        lg = (complex_loggamma(nu / 2 + w) + complex_loggamma(0.5 + w)
              - complex_loggamma((1 + nu) / 2 + w) - complex_loggamma(1 + w))
        return np.exp(lg) / (2j * np.pi)

    def amplitudes(self, z):
        """(b, c, d) at z."""
        z = np.asarray(z, dtype=complex)
        zc = 1j * np.pi - z
        so, soc = self._s_over(z), self._s_over(zc)
        s, sc = z * so, zc * soc
        k = -1j * np.pi * self.nu
        return s * sc, k * so * sc, k * s * soc

    def channels(self, z):
        """The functions (S_+, S_-, S_0) = (b + c, b - c, b + c + n d).

        S itself acts as -S_- on antisymmetric tensors because of the trailing
        flip; `eigen_decompose` carries that sign.
        """
        b, c, d = self.amplitudes(z)
        return b + c, b - c, b + c + self.n * d

    def __call__(self, z):
        b, c, d = self.amplitudes(z)
        n = self.n
        one, F, K = np.eye(n * n), flip(n), _contraction(n)
        b, c, d = (np.asarray(x)[..., None, None] for x in (b, c, d))
        return b * F + c * one + d * (K @ F)

    def bracket(self, z):
        """The factor (b 1 + c F + d K) to the left of the final flip."""
        b, c, d = self.amplitudes(z)
        n = self.n
        b, c, d = (np.asarray(x)[..., None, None] for x in (b, c, d))
        return b * np.eye(n * n) + c * flip(n) + d * _contraction(n)

    def to_dict(self):
        return {"variant": "nls", "parameters": {"n": self.n, "mass": self.mass}}


def eval_s(spec: SFunctionSpec, z) -> np.ndarray:
    return spec(z)


# ---------------------------------------------------------------------------
# axioms

@dataclass
class AxiomReport:
    residuals: dict
    tol: float = 1e-8
    samples: int = 0

    @property
    def flagged(self) -> tuple:
        return tuple(k for k, v in self.residuals.items() if v > self.tol)

    @property
    def ok(self) -> bool:
        return not self.flagged

    def max_residual(self) -> float:
        return max(self.residuals.values())


def _mnorm(A) -> float:
    return float(np.max(np.abs(A))) if np.size(A) else 0.0


def check_axioms(spec: SFunctionSpec, samples=None, seed: int = 0, count: int = 20,
                 tol: float = 1e-8) -> AxiomReport:
    """Residuals of unitarity, hermitian analyticity, CPT, Yang-Baxter,
    crossing, translational and symmetry invariance."""
    rng = np.random.default_rng(seed)
    if samples is None:
        samples = rng.uniform(-5.0, 5.0, size=count)
    zs = np.asarray(samples, dtype=complex)
    sp = spec.space
    d = sp.dim
    D = d * d
    eye = np.eye(D)
    F = flip(d)
    C2 = np.kron(sp.conj_matrix, sp.conj_matrix)
    Sz = spec(zs)
    Sbar = spec(np.conj(zs))
    Sneg = spec(-zs)
    res = {}
    res["unitarity"] = max(_mnorm(Sbar[k].conj().T @ Sz[k] - eye) for k in range(len(zs)))
    res["hermitian_analyticity"] = max(_mnorm(Sz[k] @ Sneg[k] - eye) for k in range(len(zs)))
    res["cpt"] = max(_mnorm(C2 @ F @ np.conj(Sz[k]) @ F @ C2 - Sz[k].conj().T)
                     for k in range(len(zs)))

    I_d = np.eye(d)
    ybe = 0.0
    pairs = list(zip(zs[: min(10, len(zs))], np.roll(zs, 1)[: min(10, len(zs))]))
    for z1, z2 in pairs:
        A, B, C = spec(z1), spec(z1 + z2), spec(z2)
        lhs = np.kron(A, I_d) @ np.kron(I_d, B) @ np.kron(C, I_d)
        rhs = np.kron(I_d, C) @ np.kron(B, I_d) @ np.kron(I_d, A)
        ybe = max(ybe, _mnorm(lhs - rhs))
    res["yang_baxter"] = ybe

    conj, sig = sp.conjugation, sp.conj_signs
    cross = 0.0
    for z in zs[:5]:
        Sx, Sy = spec(1j * np.pi - z), spec(z)
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    for e in range(d):
                        lhs = Sx[a * d + b, c * d + e]
                        rhs = sig[c] * sig[b] * Sy[conj[c] * d + a, e * d + conj[b]]
                        cross = max(cross, abs(lhs - rhs))
    res["crossing"] = cross

    trans = 0.0
    for m in sp.distinct_masses:
        for mp in sp.distinct_masses:
            L = np.kron(sp.mass_projector(m), sp.mass_projector(mp))
            R = np.kron(sp.mass_projector(mp), sp.mass_projector(m))
            trans = max(trans, max(_mnorm(L @ Sz[k] - Sz[k] @ R) for k in range(len(zs))))
    res["translational"] = trans

    ginv = 0.0
    for V in sp.group_samples(rng):
        V2 = np.kron(V, V)
        ginv = max(ginv, max(_mnorm(Sz[k] @ V2 - V2 @ Sz[k]) for k in range(len(zs))))
    res["g_invariance"] = ginv
    return AxiomReport(res, tol, len(zs))


# ---------------------------------------------------------------------------
# eigen-decomposition

@dataclass
class EigenDecomposition:
    """S(z) = sum_i eigenvalues[i](z) * projectors[i]."""

    labels: tuple
    eigenvalues: tuple
    projectors: tuple
    channel_functions: tuple = field(default=())

    def reconstruct(self, z) -> np.ndarray:
        out = 0
        for f, P in zip(self.eigenvalues, self.projectors):
            out = out + np.asarray(f(z))[..., None, None] * P
        return out


def _const(v):
    return lambda z: np.full(np.shape(z), v, dtype=complex)[()]


def eigen_decompose(spec: SFunctionSpec) -> EigenDecomposition:
    if isinstance(spec, ConstantMatrix):
        D = spec.matrix.shape[0]
        eye = np.eye(D)
        Pp = 0.5 * (eye + spec.matrix)
        Pm = 0.5 * (eye - spec.matrix)
        return EigenDecomposition(("+", "-"), (_const(1.0), _const(-1.0)), (Pp, Pm))
    if isinstance(spec, NonlinearSigma):
        n = spec.n
        one, F, K = np.eye(n * n), flip(n), _contraction(n)
        Pp = 0.5 * (one + F - (2.0 / n) * K)
        Pm = 0.5 * (one - F)
        P0 = K / n

        def sp_(z):
            return spec.channels(z)[0]

        def sm_(z):
            return spec.channels(z)[1]

        def s0_(z):
            return spec.channels(z)[2]

        # the trailing flip acts as -1 on the antisymmetric projector
        return EigenDecomposition(("+", "-", "0"),
                                  (sp_, lambda z: -sm_(z), s0_),
                                  (Pp, Pm, P0),
                                  (sp_, sm_, s0_))
    if isinstance(spec, _ScalarSpec):
        return EigenDecomposition(("s",), (spec.scalar,), (np.eye(1),))
    raise SpecError(f"eigen-decomposition not supported for {type(spec).__name__}")


# ---------------------------------------------------------------------------
# serialisation

def spec_from_dict(data: dict) -> SFunctionSpec:
    """Build a spec from {"variant": ..., "parameters": {...}}."""
    if "variant" not in data:
        raise SpecError("model.variant: missing")
    v = data["variant"]
    p = dict(data.get("parameters", {}))
    try:
        if v in _CONSTANT_PRESETS:
            return _CONSTANT_PRESETS[v](float(p.get("mass", 1.0)))
        if v == "sinh_gordon":
            bs = p.get("b", [0.5])
            if not isinstance(bs, list):
                bs = [bs]
            return ScalarProduct(int(p.get("eps", 1)), tuple(_parse_complex(b) for b in bs),
                                 float(p.get("mass", 1.0)))
        if v == "gbd":
            return BulloughDodd(tuple(_parse_complex(b) for b in p.get("b", [])),
                                float(p.get("mass", 1.0)))
        if v == "federbush":
            return Federbush(lam=float(p.get("lam", 0.25)), m1=float(p.get("m1", 1.0)),
                             m2=float(p.get("m2", 1.0)))
        if v == "nls":
            return NonlinearSigma(int(p.get("n", 3)), float(p.get("mass", 1.0)))
        if v == "constant":
            sp = LittleSpace(tuple(float(m) for m in p["masses"]), tuple(int(c) for c in p["conjugation"]),
                             tuple(float(s) for s in p["conj_signs"]), p.get("symmetry", "trivial"))
            M = np.array([[_parse_complex(x) for x in row] for row in p["matrix"]])
            return ConstantMatrix(M, sp)
    except SpecError as exc:
        raise SpecError(f"model.parameters: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"model.parameters: {exc}") from None
    raise SpecError(f"model.variant: unknown variant {v!r}")
