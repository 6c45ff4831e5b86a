"""Characteristic functions f[S] of scalar S-functions.

Convention: f[S](t) = (i/pi) int_0^inf S'(th)/S(th) cos(th t / pi) dth,
which is real for S unimodular on the real line and gives f = -1 at t = 0
for a single factor S(.; b).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import sici

from .numerics import gauss_legendre

__all__ = [
    "CharacteristicFunction",
    "FitUnstableError",
    "NonIntegrableError",
    "charfct_sinh_gordon",
    "charfct_scalar_factor",
    "charfct_pair",
    "charfct_gamma_product",
    "charfct_numeric",
    "growth_data",
    "default_grid",
    "zero_charfct",
    "nls_channel_charfct",
]


class FitUnstableError(RuntimeError):
    pass


class NonIntegrableError(RuntimeError):
    pass


@dataclass(frozen=True)
class CharacteristicFunction:
    """An even function on the real line, evaluated through |t|.

    `func` is vectorised over non-negative t.  For sampled functions
    `samples` holds the (t, f) table and `fit_residual` the residual of the
    small-t polynomial fit that produced f0 and f1.
    """

    func: Callable
    f0: float
    f1: float
    decay_rate: float
    kind: str = "closed"
    tag: str = ""
    params: dict = field(default_factory=dict)
    tail_start: float = 0.0
    fit_residual: float = 0.0
    samples: Optional[tuple] = None

    def __call__(self, t):
        return self.func(np.abs(np.asarray(t, dtype=float)))

    def __add__(self, other: "CharacteristicFunction") -> "CharacteristicFunction":
        f, g = self.func, other.func
        kind = "closed" if self.kind == other.kind == "closed" else "sampled"
        return CharacteristicFunction(
            lambda t: f(t) + g(t), self.f0 + other.f0, self.f1 + other.f1,
            min(self.decay_rate, other.decay_rate), kind, "sum",
            {"terms": (self.tag, other.tag)}, max(self.tail_start, other.tail_start),
            max(self.fit_residual, other.fit_residual))

    def scale(self, c: float) -> "CharacteristicFunction":
        f = self.func
        return CharacteristicFunction(lambda t: c * f(t), c * self.f0, c * self.f1,
                                      self.decay_rate, self.kind, f"{c:g}*{self.tag}",
                                      dict(self.params), self.tail_start, abs(c) * self.fit_residual)

    def __neg__(self):
        return self.scale(-1.0)

    def to_csv(self, t=None) -> str:
        if t is None:
            t = self.samples[0] if self.samples is not None else default_grid()
        vals = np.real(self(t))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "f"])
        for a, b in zip(t, vals):
            w.writerow([f"{a:.15g}", f"{b:.15g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, decay_rate: Optional[float] = None) -> "CharacteristicFunction":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(x) for x in r] for r in rows[1:] if r])
        return _sampled(data[:, 0], data[:, 1], decay_rate=decay_rate, tag="csv")


def zero_charfct() -> CharacteristicFunction:
    return CharacteristicFunction(lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                                  0.0, 0.0, 10.0, "closed", "zero")


def _sg_closed(b: complex) -> Callable:
    # algebraically identical to the 4 sh sh sh form, but overflow free
    def f(t):
        t = np.asarray(t, dtype=float)
        return -(np.exp(-b * t) + np.exp(-(1.0 - b) * t)) / (1.0 + np.exp(-t))
    return f


def charfct_sinh_gordon(b: complex) -> CharacteristicFunction:
    """Characteristic function of the single factor S(.; b), Re b in (0, 1)."""
    b = complex(b)
    if not 0.0 < b.real < 1.0:
        raise ValueError(f"b = {b} violates the constraint b in (0,1)+iR")
    rate = min(b.real, 1.0 - b.real)
    return CharacteristicFunction(_sg_closed(b), -1.0, 0.0, rate, "closed", "sinh_gordon",
                                  {"b": b})


def charfct_scalar_factor(b: complex) -> CharacteristicFunction:
    """Like `charfct_sinh_gordon` but also for Re b in (-1, 0).

    There sin(pi b) = -sin(-pi b), so S(.; b) = 1/S(.; -b) and f flips sign.
    """
    b = complex(b)
    if 0.0 < b.real < 1.0:
        return charfct_sinh_gordon(b)
    if -1.0 < b.real < 0.0:
        out = -charfct_sinh_gordon(-b)
        return CharacteristicFunction(out.func, out.f0, out.f1, out.decay_rate, "closed",
                                      "inverse_factor", {"b": b})
    raise ValueError(f"b = {b} must satisfy Re b in (-1,0) or (0,1)")


def charfct_pair(b: complex) -> CharacteristicFunction:
    """f(.; b) + f(.; conj b), real valued."""
    b = complex(b)
    if b.imag == 0:
        return charfct_scalar_factor(b)
    g = charfct_scalar_factor(b)
    fb = g.func
    return CharacteristicFunction(lambda t: 2.0 * np.real(fb(t)), 2 * g.f0, 2 * g.f1,
                                  g.decay_rate, "closed", "pair", {"b": b})


def charfct_gamma_product(lam: float, A_plus: Sequence[float], A_minus: Sequence[float]
                          ) -> CharacteristicFunction:
    """Closed form for finite gamma-product eigenvalues:
    f(t) = (sum_{A-} e^{-lam x t} - sum_{A+} e^{-lam x t}) / (1 - e^{-lam t})."""
    Ap = [float(x) for x in A_plus]
    Am = [float(x) for x in A_minus]
    if len(Ap) != len(Am):
        raise ValueError("A_plus and A_minus must have equal cardinality")
    if lam <= 0 or any(x <= 0 for x in Ap + Am):
        raise ValueError("lambda and all A entries must be positive")

    def f(t):
        t = np.asarray(t, dtype=float)
        num = np.zeros_like(t)
        for x in Am:
            num = num + np.expm1(-lam * x * t)
        for x in Ap:
            num = num - np.expm1(-lam * x * t)
        den = -np.expm1(-lam * t)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = num / den
        return np.where(t == 0, f0, out)

    d1 = sum(Ap) - sum(Am)
    d2 = sum(x * x for x in Am) - sum(x * x for x in Ap)
    f0 = d1
    f1 = 0.5 * lam * (d1 + d2)
    counts = {}
    for x in Am:
        counts[x] = counts.get(x, 0) + 1
    for x in Ap:
        counts[x] = counts.get(x, 0) - 1
    live = [x for x, c in counts.items() if c != 0]
    rate = lam * min(live) if live else 10.0
    return CharacteristicFunction(f, f0, f1, min(rate, 10.0), "closed", "gamma_product",
                                  {"lam": lam, "A_plus": tuple(Ap), "A_minus": tuple(Am)})


def nls_channel_charfct(n: int, channel: str) -> CharacteristicFunction:
    """Closed forms for the O(n) sigma model channels "+", "-", "0"."""
    nu = 2.0 / (n - 2)
    if channel == "0":
        return charfct_gamma_product(2.0, [1.5, 1 + nu / 2], [1.0, 0.5 + nu / 2])
    if channel == "-":
        return charfct_gamma_product(2.0, [0.5, 1 + nu / 2], [1.0, 0.5 + nu / 2])
    if channel == "+":
        return charfct_gamma_product(2.0, [0.5, nu / 2], [1.0, 0.5 + nu / 2])
    raise ValueError(f"unknown channel {channel!r}")


# ---------------------------------------------------------------------------
# numerical transform

def default_grid(n: int = 2048, t_max: float = 40.0) -> np.ndarray:
    """Geometric spacing near 0 joined to a uniform grid."""
    n_geo = n // 8
    geo = np.geomspace(1e-4, 0.5, n_geo)
    uni = np.linspace(0.5, t_max, n - n_geo - 1)[1:]
    return np.concatenate([[0.0], geo, uni])


def _central_log_derivative(S: Callable, h: float = 1e-2) -> Callable:
    # the step grows with |th| so that round-off stays below the decaying signal
    c = np.array([-1.0, 9.0, -45.0, 45.0, -9.0, 1.0]) / 60.0
    offs = np.array([-3, -2, -1, 1, 2, 3], dtype=float)

    def r(th):
        th = np.asarray(th, dtype=float)
        step = h * np.maximum(1.0, np.abs(th) / 4.0)
        s0 = S(th)
        # centring on S(th) keeps the rounded weight sum from leaking a 1/step term
        vals = S(th[:, None] + step[:, None] * offs[None, :]) - s0[:, None]
        return (vals @ c) / step / s0
    return r


def _tail_integrals(w: np.ndarray, T: float, kmax: int = 6) -> dict:
    """E_k = int_T^inf cos(w x) x^{-k} dx for k = 2..kmax, vectorised in w."""
    out = {}
    wpos = np.where(w > 0, w, 1.0)
    si, ci = sici(wpos * T)
    E = -ci
    Fs = 0.5 * np.pi - si
    for k in range(2, kmax + 1):
        En = np.cos(wpos * T) * T ** (1 - k) / (k - 1) - wpos / (k - 1) * Fs
        Fn = np.sin(wpos * T) * T ** (1 - k) / (k - 1) + wpos / (k - 1) * E
        E, Fs = En, Fn
        out[k] = np.where(w > 0, E, T ** (1 - k) / (k - 1))
    return out


def _numeric_transform(r: Callable, t: np.ndarray, theta_max: float, tol: float):
    nodes1, w1 = gauss_legendre(0.0, 16.0, 24, 64)
    nodes2, w2 = gauss_legendre(16.0, theta_max, 24, int(theta_max - 16.0))
    th = np.concatenate([nodes1, nodes2])
    wt = np.concatenate([w1, w2])
    rv = r(th)
    # tail: even inverse powers fitted on [T, 3T]
    tt = np.linspace(theta_max, 3 * theta_max, 40)
    rt = r(tt)
    A = np.stack([tt ** -2, tt ** -4, tt ** -6], axis=1)
    coef, *_ = np.linalg.lstsq(A.astype(complex), rt, rcond=None)
    resid = float(np.max(np.abs(A @ coef - rt)))
    scale = float(np.max(np.abs(rt)))
    # a surviving 1/th component means S'/S is not integrable
    B = np.concatenate([(1.0 / tt)[:, None], A], axis=1)
    c1, *_ = np.linalg.lstsq(B.astype(complex), rt, rcond=None)
    slow = abs(c1[0]) / max(float(np.max(np.abs(rt * tt))), 1e-300)
    if scale < 1e-15:
        # exponentially decaying log-derivative: nothing left past theta_max
        coef = np.zeros(3, dtype=complex)
    elif resid > max(1e-14, 1e-6 * scale) or slow > 1e-5:
        raise NonIntegrableError("log-derivative tail is not consistent with an integrable decay")
    out = np.empty(len(t))
    imag = 0.0
    for lo in range(0, len(t), 256):
        tc = t[lo:lo + 256]
        w = tc / np.pi
        body = np.cos(np.outer(w, th)) @ (wt * rv)
        tails = _tail_integrals(w, theta_max)
        tail = coef[0] * tails[2] + coef[1] * tails[4] + coef[2] * tails[6]
        val = (1j / np.pi) * (body + tail)
        out[lo:lo + 256] = val.real
        imag = max(imag, float(np.max(np.abs(val.imag))))
    return out, imag


def _fit_small_t(ts: np.ndarray, fs: np.ndarray, degree: int = 6):
    # a quadratic leaves a bias of order delta^2 f''' in f1, too large for the residual gate
    V = np.vander(ts, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, fs, rcond=None)
    resid = float(np.max(np.abs(V @ coef - fs)))
    return float(coef[0]), float(coef[1]), resid


def _sampled(t, vals, f0=None, f1=None, fit_residual=0.0, decay_rate=None, tag="sampled",
             params=None):
    t = np.asarray(t, dtype=float)
    vals = np.asarray(vals, dtype=float)
    spline = CubicSpline(t, vals)
    T = t[-1]
    tail_pts = t > 0.75 * T
    mags = np.abs(vals[tail_pts])
    if decay_rate is None:
        if len(mags) >= 3 and np.all(mags > 1e-300):
            slope = np.polyfit(t[tail_pts], np.log(mags), 1)[0]
            decay_rate = max(-slope, 1e-3)
        else:
            decay_rate = 1.0
    fT = vals[-1]
    rate = decay_rate

    def f(x):
        x = np.asarray(x, dtype=float)
        inside = x <= T
        out = np.empty_like(x)
        out[inside] = spline(x[inside])
        out[~inside] = fT * np.exp(-rate * (x[~inside] - T))
        return out

    if f0 is None:
        m = t <= 0.1
        f0, f1, fit_residual = _fit_small_t(t[m], vals[m])
    return CharacteristicFunction(f, f0, f1, rate, "sampled", tag, params or {},
                                  float(0.75 * T), fit_residual, (t, vals))


def charfct_numeric(S: Callable, grid: Optional[Sequence[float]] = None,
                    dlogS: Optional[Callable] = None, theta_max: float = 600.0,
                    tol: float = 1e-10, decay_rate: Optional[float] = None,
                    delta: float = 0.1) -> CharacteristicFunction:
    """Sampled f[S] from the cosine transform of S'/S.

    `S` maps real arrays to complex arrays.  `dlogS` (S'/S) is used when
    given, otherwise a sixth-order central difference of S.  f0, f1 come
    from a degree-6 least-squares fit on 20 points in [0, delta].
    """
    r = dlogS if dlogS is not None else _central_log_derivative(S)
    t = default_grid() if grid is None else np.asarray(grid, dtype=float)
    t = np.abs(t)
    vals, imag = _numeric_transform(r, t, theta_max, tol)
    ts = np.linspace(0.0, delta, 20)
    fs, _ = _numeric_transform(r, ts, theta_max, tol)
    f0, f1, resid = _fit_small_t(ts, fs)
    order = np.argsort(t)
    tu, idx = np.unique(t[order], return_index=True)
    out = _sampled(tu, vals[order][idx], f0, f1, resid, decay_rate, "numeric",
                   {"theta_max": theta_max, "imag_residual": imag})
    return out


def growth_data(f: CharacteristicFunction, max_residual: float = 1e-6):
    """(f0, f1) = (f(0), f'(0))."""
    if f.kind == "sampled" and f.fit_residual > max_residual:
        raise FitUnstableError(f"small-t fit residual {f.fit_residual:.3g} exceeds {max_residual:g}")
    return float(np.real(f.f0)), float(np.real(f.f1))
