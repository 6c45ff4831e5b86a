"""Minimal solutions of Watson's equations from characteristic functions.

For an even characteristic function f,

    F_f(z) = exp(2 int_0^inf f(t) sin^2((i pi - z) t / 2 pi) dt / (t sh t))
    S_f(z) = exp(-2i int_0^inf f(t) sin(z t / pi) dt / t)

and F_f(z) = S_f(z) F_f(-z), F_f(i pi + z) = F_f(i pi - z).  A minimal
solution is (-i sh z/2)^p F_f with p = 1 exactly when S(0) = -1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .charfct import (CharacteristicFunction, charfct_pair, charfct_scalar_factor,
                      nls_channel_charfct, zero_charfct)
from .numerics import gauss_legendre
from .smodel import (BulloughDodd, ConstantMatrix, NonlinearSigma, ScalarProduct,
                     SFunctionSpec)

__all__ = [
    "StripError",
    "DivergentIntegralError",
    "UnknownModelError",
    "BandUnstableWarning",
    "MinimalSolution",
    "GrowthClass",
    "eval_F_f",
    "eval_S_f",
    "assemble_minimal",
    "watson_residual",
    "asymptotic_constant",
    "classify_growth",
    "strip_halfwidth",
]


class StripError(ValueError):
    pass


class DivergentIntegralError(ArithmeticError):
    pass


class UnknownModelError(ValueError):
    pass


class BandUnstableWarning(UserWarning):
    pass


_NODES = 20
_CHUNK = 2_000_000  # max (points x nodes) per dense block


def strip_halfwidth(f: CharacteristicFunction) -> float:
    return 0.9 * f.decay_rate * math.pi


def _t_nodes(T: float, freq: float):
    width = min(0.5, 2.0 * math.pi / max(freq, 1e-12))
    panels = max(1, int(math.ceil(T / width)))
    return gauss_legendre(0.0, T, _NODES, panels)


def _chunks(n: int, nt: int):
    step = max(1, _CHUNK // max(nt, 1))
    for lo in range(0, n, step):
        yield slice(lo, min(n, lo + step))


def _log_F_direct(f: CharacteristicFunction, z: np.ndarray) -> np.ndarray:
    """2 int f(t) sin^2(w t)/(t sh t) dt with w = (i pi - z)/2pi, no strip check."""
    w = (1j * np.pi - z) / (2.0 * np.pi)
    out = np.empty(z.shape, dtype=complex)
    if z.size == 0:
        return out
    # integrand decays like exp(-(rate + 1 - 2|Im w|) t)
    rate = f.decay_rate + 1.0 - 2.0 * float(np.max(np.abs(w.imag)))
    rate = max(rate, 1e-3)
    T = min(38.0 / rate + 2.0, 20000.0)
    freq = 2.0 * float(np.max(np.abs(w.real)))
    t, wt = _t_nodes(T, freq)
    fv = np.asarray(f(t), dtype=complex)
    small = t <= 20.0
    ts, tl = t[small], t[~small]
    for sl in _chunks(z.size, t.size):
        ww = w[sl][:, None]
        ks = np.sin(ww * ts) ** 2 / (ts * np.sinh(ts))
        el = np.exp(-tl)
        kl = (2.0 * el - np.exp(2j * ww * tl - tl) - np.exp(-2j * ww * tl - tl)) \
            / (2.0 * tl * (1.0 - el * el))
        K = np.concatenate([ks, kl], axis=1)
        out[sl] = 2.0 * (K @ (wt * fv))
    return out


def _log_S_direct(f: CharacteristicFunction, z: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape, dtype=complex)
    if z.size == 0:
        return out
    rate = max(f.decay_rate - float(np.max(np.abs(z.imag))) / np.pi, 1e-3)
    T = min(38.0 / rate + 2.0, 20000.0)
    freq = float(np.max(np.abs(z.real))) / np.pi
    t, wt = _t_nodes(T, freq)
    fv = np.asarray(f(t), dtype=complex)
    for sl in _chunks(z.size, t.size):
        K = np.sin(z[sl][:, None] * t / np.pi) / t
        out[sl] = -2j * (K @ (wt * fv))
    return out


def eval_F_f(f: CharacteristicFunction, z, eps: Optional[float] = None):
    """F_f at z, restricted to Im z in (-eps, 2 pi + eps)."""
    z = np.asarray(z, dtype=complex)
    eps = strip_halfwidth(f) if eps is None else eps
    if np.any((z.imag <= -eps) | (z.imag >= 2 * np.pi + eps)):
        raise StripError(f"Im z must lie in ({-eps:.4g}, {2 * np.pi + eps:.4g})")
    out = np.exp(_log_F_direct(f, z.ravel())).reshape(z.shape)
    return out[()] if out.ndim == 0 else out


def eval_S_f(f: CharacteristicFunction, z, eps: Optional[float] = None):
    """S_f at z, restricted to |Im z| < eps."""
    z = np.asarray(z, dtype=complex)
    eps = strip_halfwidth(f) if eps is None else eps
    if np.any(np.abs(z.imag) >= eps):
        raise StripError(f"|Im z| must be below {eps:.4g}")
    out = np.exp(_log_S_direct(f, z.ravel())).reshape(z.shape)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class MinimalSolution:
    """F(z) = (-i sh z/2)^p F_f(z).

    `s_eval` is the scalar S the solution belongs to, F(z) = S(z) F(-z).
    With it, points outside the integration strip are reached through
    Watson's equations.
    """

    charfct: CharacteristicFunction
    sinh_zero_power: int = 0
    source: dict = field(default_factory=dict)
    asymptotic_constant: Optional[float] = None
    s_eval: Optional[Callable] = None
    eps: Optional[float] = None

    @property
    def strip(self) -> float:
        return strip_halfwidth(self.charfct) if self.eps is None else self.eps

    def s_f(self, z):
        """The companion S_f = (-1)^p S."""
        if self.s_eval is None:
            return eval_S_f(self.charfct, z, self.strip)
        return (-1) ** self.sinh_zero_power * np.asarray(self.s_eval(z), dtype=complex)

    def _F_f(self, z: np.ndarray) -> np.ndarray:
        if self.s_eval is None:
            return np.asarray(eval_F_f(self.charfct, z, self.strip), dtype=complex)
        lo, hi = 0.0, 2.0 * np.pi
        inside = (z.imag >= lo) & (z.imag <= hi)
        out = np.empty(z.shape, dtype=complex)
        out[inside] = np.exp(_log_F_direct(self.charfct, z[inside]))
        for k in np.flatnonzero(~inside):
            out[k] = self._mapped(complex(z[k]))
        return out

    def _mapped(self, z: complex, depth: int = 0) -> complex:
        if depth > 64:
            raise StripError(f"Watson mapping did not reach the strip from {z}")
        if 0.0 <= z.imag <= 2.0 * np.pi:
            return complex(np.exp(_log_F_direct(self.charfct, np.array([z])))[0])
        if z.imag < 0.0:
            return complex(self.s_f(z)) * self._mapped(-z, depth + 1)
        return self._mapped(2j * np.pi - z, depth + 1)

    def F_f(self, z):
        z = np.asarray(z, dtype=complex)
        out = self._F_f(z.ravel()).reshape(z.shape)
        return out[()] if out.ndim == 0 else out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.F_f(z)
        if self.sinh_zero_power:
            out = out * (-1j * np.sinh(z / 2.0)) ** self.sinh_zero_power
        return out


@dataclass(frozen=True)
class GrowthClass:
    exponent: float
    log_power: float
    band: tuple
    fit_window: tuple
    drift: float = 0.0

    @property
    def ratio(self) -> float:
        return self.band[1] / self.band[0]


def _join_pairs(params: Sequence[complex]) -> CharacteristicFunction:
    pool = [complex(b) for b in params]
    total = zero_charfct()
    while pool:
        b = pool.pop(0)
        if b.imag != 0.0:
            match = [k for k, c in enumerate(pool) if abs(c - b.conjugate()) <= 1e-12]
            if match:
                pool.pop(match[0])
                total = total + charfct_pair(b)
                continue
        total = total + charfct_scalar_factor(b)
    return total


def _const_eval(v: float) -> Callable:
    return lambda z: v * np.ones(np.shape(z), dtype=complex)


def _zero_power(s0: complex) -> int:
    s0 = complex(s0)
    if abs(abs(s0) - 1.0) > 1e-8 or abs(s0.imag) > 1e-8:
        raise UnknownModelError(f"S(0) = {s0} is not +1 or -1")
    return 1 if s0.real < 0 else 0


def assemble_minimal(source, channel: Optional[str] = None) -> MinimalSolution:
    """Minimal solution for a scalar S-function or one eigenchannel.

    `source` is a scalar preset (ScalarProduct, BulloughDodd, a
    one-dimensional ConstantMatrix), a constant +1 or -1, a matrix model with
    `channel` ("+"/"-" for constant matrices, "+"/"-"/"0" for NonlinearSigma),
    or a ready CharacteristicFunction paired with its S as a tuple (f, S).
    """
    if isinstance(source, tuple) and len(source) == 2 and isinstance(source[0], CharacteristicFunction):
        f, S = source
        p = _zero_power(S(0.0))
        return _finish(f, p, {"kind": "charfct", "tag": f.tag}, S)
    if isinstance(source, (int, float)) and not isinstance(source, bool):
        if source not in (1, -1):
            raise UnknownModelError("a constant S must be +1 or -1")
        return _finish(zero_charfct(), 1 if source < 0 else 0,
                       {"kind": "constant", "value": int(source)}, _const_eval(float(source)))
    if isinstance(source, ScalarProduct):
        f = _join_pairs(source.b_list)
        p = 1 if source.value_at_zero == -1 else 0
        return _finish(f, p, {"kind": "sinh_gordon", "eps": source.eps,
                              "b": tuple(source.b_list)}, source.scalar)
    if isinstance(source, BulloughDodd):
        f = _join_pairs(source.factor_params)
        return _finish(f, 1, {"kind": "gbd", "b": tuple(source.b_list)}, source.scalar)
    if isinstance(source, NonlinearSigma):
        ch = channel or "0"
        idx = {"+": 0, "-": 1, "0": 2}
        if ch not in idx:
            raise UnknownModelError(f"unknown NLS channel {ch!r}")
        k = idx[ch]
        S = lambda z: source.channels(z)[k]
        p = _zero_power(S(0.0))
        return _finish(nls_channel_charfct(source.n, ch), p,
                       {"kind": "nls", "n": source.n, "channel": ch}, S)
    if isinstance(source, ConstantMatrix):
        if source.dim == 1:
            v = float(np.real(source.matrix[0, 0]))
        elif channel in ("+", "-"):
            v = 1.0 if channel == "+" else -1.0
        else:
            raise UnknownModelError("constant matrix models need channel '+' or '-'")
        out = assemble_minimal(v)
        return MinimalSolution(out.charfct, out.sinh_zero_power,
                               {"kind": source.name, "channel": channel}, out.asymptotic_constant,
                               out.s_eval)
    if isinstance(source, SFunctionSpec):
        raise UnknownModelError(f"no minimal-solution assembly for {type(source).__name__}")
    raise UnknownModelError(f"cannot assemble a minimal solution from {source!r}")


def _finish(f, p, src, S) -> MinimalSolution:
    msol = MinimalSolution(f, p, src, None, S)
    if abs(f.f1) < 1e-9:
        msol = MinimalSolution(f, p, src, asymptotic_constant(msol), S)
    return msol


def watson_residual(msol: MinimalSolution, S: Optional[Callable] = None,
                    grid: Optional[Sequence[float]] = None) -> dict:
    """Residuals of F(z) = S(z) F(-z) and F(i pi + z) = F(i pi - z) on real z."""
    th = np.arange(-5.0, 5.0 + 1e-12, 0.25) if grid is None else np.asarray(grid, dtype=float)
    S = msol.s_eval if S is None else S
    if S is None:
        raise ValueError("an S evaluator is needed")
    z = th.astype(complex)
    F = msol(z)
    Fm = msol(-z)
    Sv = np.asarray(S(z), dtype=complex)
    scale = np.maximum(np.abs(F), 1e-300)
    w = np.where(np.abs(F) > 0, np.abs(F - Sv * Fm) / scale, np.abs(Sv * Fm))
    up = msol(1j * np.pi + z)
    dn = msol(1j * np.pi - z)
    refl = np.abs(up - dn) / np.maximum(np.abs(up), 1e-300)
    return {"watson": float(np.max(w)), "reflection": float(np.max(refl)),
            "normalization": float(abs(complex(msol(1j * np.pi)) - 1.0))}


def asymptotic_constant(msol: MinimalSolution) -> float:
    """lim |F(th + i pi)| e^{-(p + f0) th / 2} for f'(0) = 0.

    Uses the exact identity |F(th + i pi)| = ch(th/2)^{p+f0}
    exp(int (f - f0)(1 - cos(th t/pi)) / (t sh t)), whose oscillating part
    drops out as th grows.
    """
    f = msol.charfct
    if abs(f.f1) > 1e-9:
        raise DivergentIntegralError(
            f"f'(0) = {f.f1:.6g} != 0: (f - f(0))/(t sh t) is not integrable at 0")
    f0 = float(np.real(f.f0))
    t, wt = gauss_legendre(0.0, 60.0, _NODES, 120)
    val = np.real(np.asarray(f(t), dtype=complex)) - f0
    I = float(np.sum(wt * val / (t * np.sinh(t))))
    return 2.0 ** (-(msol.sinh_zero_power + f0)) * math.exp(I)


def classify_growth(msol: MinimalSolution, extra_exponent: float = 0.0,
                    extra_log_power: float = 0.0,
                    thetas: Sequence[float] = (10.0, 15.0, 20.0, 25.0, 30.0),
                    shift: float = 0.05) -> GrowthClass:
    """Growth exponents and the measured band of |F(th + i pi)|.

    The band is taken for F alone; `extra_*` are added to the reported
    exponents for factors (prefactor polynomials, pole factors) applied
    downstream.
    """
    f = msol.charfct
    f0, f1 = float(np.real(f.f0)), float(np.real(f.f1))
    own_exp = f0 / 2.0 + msol.sinh_zero_power / 2.0
    th = np.asarray(thetas, dtype=float)

    def ratios(y):
        return np.abs(msol(th + 1j * y)) / (th ** f1 * np.exp(own_exp * th))

    r0 = ratios(np.pi)
    drift = 0.0
    for y in (np.pi - shift, np.pi + shift):
        drift = max(drift, float(np.max(np.abs(ratios(y) / r0 - 1.0))))
    band = (float(np.min(r0)), float(np.max(r0)))
    if band[1] / band[0] > 2.0:
        warnings.warn(f"growth band ratio {band[1] / band[0]:.3g} exceeds 2", BandUnstableWarning)
    if drift > 0.05:
        warnings.warn(f"growth band drifts by {drift:.3g} off the line Im z = pi",
                      BandUnstableWarning)
    return GrowthClass(own_exp + extra_exponent, f1 + extra_log_power, band,
                       (float(th[0]), float(th[-1])), drift)
