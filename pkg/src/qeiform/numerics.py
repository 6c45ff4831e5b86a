"""Special functions, quadrature and Gaussian test-function transforms.

Everything here is vectorised over numpy arrays and free of global state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "GammaPoleError",
    "QuadratureError",
    "QuadratureConfig",
    "GaussianTestFunction",
    "complex_gamma",
    "complex_loggamma",
    "integrate_interval",
    "integrate_semi_infinite",
    "gauss_legendre",
    "g2_tilde",
    "convolution_rhs",
]


class GammaPoleError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# complex gamma

_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = np.array([
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_poles(z: np.ndarray) -> None:
    bad = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(bad):
        raise GammaPoleError(f"gamma has a pole at z = {z[bad][0].real:g}")


def _lanczos_log(z: np.ndarray) -> np.ndarray:
    # log Gamma(z) for Re z >= 0.5
    zm = z - 1.0
    x = np.full_like(zm, _LANCZOS_C[0])
    for k in range(1, len(_LANCZOS_C)):
        x = x + _LANCZOS_C[k] / (zm + k)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(x)


def complex_loggamma(z):
    """A logarithm of Gamma(z); the branch is only fixed modulo 2*pi*i.

    Intended for ratios exp(sum +- loggamma) where the branch drops out.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    _check_poles(z)
    out = np.empty_like(z)
    right = z.real >= 0.5
    if np.any(right):
        out[right] = _lanczos_log(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        out[left] = math.log(math.pi) - _log_sin_pi(zl) - _lanczos_log(1.0 - zl)
    return out[0] if scalar else out


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    # log sin(pi z) without overflow for large |Im z|
    y = z.imag
    big = np.abs(y) > 30
    out = np.empty_like(z)
    small = ~big
    if np.any(small):
        out[small] = np.log(np.sin(np.pi * z[small]))
    if np.any(big):
        zb = z[big]
        s = np.sign(zb.imag)
        # sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i, dominant term e^{-i s pi z}
        dom = -1j * s * np.pi * zb
        rest = np.log1p(-np.exp(2j * s * np.pi * zb))
        out[big] = dom + rest - np.log(2j * -s)
    return out


def complex_gamma(z):
    """Gamma(z) for complex z via Lanczos (g = 607/128) plus reflection."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    _check_poles(z)
    out = np.empty_like(z)
    right = z.real >= 0.5
    if np.any(right):
        out[right] = np.exp(_lanczos_log(z[right]))
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = np.pi / (np.sin(np.pi * zl) * np.exp(_lanczos_log(1.0 - zl)))
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_refinements: int = 60
    truncation_decay_threshold: float = 1e-15

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")


DEFAULT_QUAD = QuadratureConfig()

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 nodes
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WGFULL = np.zeros(15)
_WGFULL[[1, 3, 5]] = _WG[:3]
_WGFULL[[13, 11, 9]] = _WG[:3]
_WGFULL[7] = _WG[3]


def _gk_batch(fun, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    vals = np.asarray(fun(t))
    trailing = vals.shape[1:]
    vals = vals.reshape(len(lo), 15, -1)
    k = np.einsum("j,ijm->im", _WK, vals) * half[:, None]
    g = np.einsum("j,ijm->im", _WGFULL, vals) * half[:, None]
    err = np.max(np.abs(k - g), axis=1)
    return k, err, trailing


def _tolerance(cfg, total):
    return max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(total))))


def integrate_interval(fun: Callable, a: float, b: float, cfg: QuadratureConfig = DEFAULT_QUAD,
                       initial: int = 8, return_error: bool = False):
    """Globally adaptive Gauss-Kronrod (7/15) on [a, b].

    `fun` maps a 1-d array of nodes to an array whose leading axis matches
    the nodes; trailing axes are integrated componentwise.
    """
    edges = np.linspace(a, b, initial + 1)
    lo, hi = edges[:-1], edges[1:]
    k, err, trailing = _gk_batch(fun, lo, hi)
    width = abs(b - a) or 1.0
    for _ in range(cfg.max_refinements):
        tol = _tolerance(cfg, k.sum(axis=0))
        if err.sum() <= tol:
            break
        split = err > tol * np.abs(hi - lo) / width
        if not np.any(split):
            split = err == err.max()
        mids = 0.5 * (lo[split] + hi[split])
        nlo = np.concatenate([lo[split], mids])
        nhi = np.concatenate([mids, hi[split]])
        nk, nerr, _ = _gk_batch(fun, nlo, nhi)
        keep = ~split
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        k = np.concatenate([k[keep], nk])
        err = np.concatenate([err[keep], nerr])
        if len(lo) > 100000:
            break
    total = k.sum(axis=0)
    etot = float(err.sum())
    tol = _tolerance(cfg, total)
    if etot > tol:
        raise QuadratureError(f"no convergence on [{a}, {b}]: error {etot:.3g} > {tol:.3g}")
    total = total.reshape(trailing)
    if total.ndim == 0:
        total = total[()]
    return (total, etot) if return_error else total


def _as_columns(fun):
    def wrapped(t):
        v = np.asarray(fun(t))
        return v.reshape(len(t), -1)
    return wrapped


def _truncation_point(fun, cfg, value_at_zero=None, t_max=2000.0):
    probe = np.linspace(0.0, 1.0, 33)[1:]
    scale = float(np.max(np.abs(fun(probe))))
    if value_at_zero is not None:
        scale = max(scale, float(np.max(np.abs(value_at_zero))))
    T = 1.0
    while T < t_max:
        seg = np.linspace(T, 2.0 * T, 33)
        mag = float(np.max(np.abs(fun(seg))))
        if mag <= cfg.truncation_decay_threshold * max(scale, 1e-300):
            return T
        scale = max(scale, mag)
        T *= 2.0
    return None


def _exp_sinh(fun, cfg, trailing):
    # double-exponential rule for [0, inf): t = exp(pi/2 sinh u)
    h = 0.5
    prev = None
    for _ in range(8):
        u = np.arange(-6.0, 6.0 + h / 2, h)
        t = np.exp(0.5 * np.pi * np.sinh(u))
        w = h * 0.5 * np.pi * np.cosh(u) * t
        ok = np.isfinite(t) & (t < 1e300)
        vals = fun(t[ok])
        vals = np.where(np.isfinite(vals), vals, 0.0)
        cur = np.einsum("i,im->m", w[ok], vals)
        if prev is not None:
            err = float(np.max(np.abs(cur - prev)))
            if err <= max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(cur)))):
                return cur.reshape(trailing)
        prev = cur
        h /= 2.0
    raise QuadratureError("double-exponential fallback did not converge")


def integrate_semi_infinite(integrand: Callable, cfg: QuadratureConfig = DEFAULT_QUAD,
                            value_at_zero=None):
    """Integral of an exponentially decaying integrand over [0, inf).

    The range is cut where |integrand| drops below
    `cfg.truncation_decay_threshold` times the largest magnitude seen so far;
    [0, T] is then handled adaptively.  If no cut point is found, or the
    adaptive rule fails, a double-exponential rule is tried.
    `value_at_zero` is the analytic limit at t = 0 (only used for scaling,
    since no node sits at 0).
    """
    fun = _as_columns(integrand)
    trailing = np.asarray(integrand(np.array([0.5]))).shape[1:]
    T = _truncation_point(fun, cfg, value_at_zero)
    if T is not None:
        # split [0, T] geometrically so early structure gets resolved
        edges = np.concatenate([[0.0], T * 2.0 ** np.arange(-6, 1)])
        try:
            total = 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                total = total + integrate_interval(fun, lo, hi, cfg, initial=4)
            total = np.asarray(total).reshape(trailing)
            return total[()] if total.ndim == 0 else total
        except QuadratureError:
            pass
    total = _exp_sinh(fun, cfg, trailing)
    return total[()] if total.ndim == 0 else total


def gauss_legendre(a: float, b: float, n: int, panels: int = 1):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


# ---------------------------------------------------------------------------
# Gaussian test functions

@dataclass(frozen=True)
class GaussianTestFunction:
    """g(t) = amplitude * exp(-t^2 / (2 tau^2))."""

    tau: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    def __call__(self, t):
        t = np.asarray(t)
        return self.amplitude * np.exp(-t * t / (2.0 * self.tau ** 2))

    def g_tilde(self, w):
        """Fourier transform int dt g(t) e^{iwt}."""
        w = np.asarray(w)
        return self.amplitude * self.tau * math.sqrt(2 * math.pi) * np.exp(-0.5 * (self.tau * w) ** 2)

    def g2_tilde(self, p):
        """Fourier transform of g^2."""
        p = np.asarray(p)
        return self.amplitude ** 2 * self.tau * math.sqrt(math.pi) * np.exp(-0.25 * (self.tau * p) ** 2)

    def scaled(self, sigma: float) -> "GaussianTestFunction":
        """The test function t -> g(t / sigma)."""
        return GaussianTestFunction(self.tau * sigma, self.amplitude)


def g2_tilde(g, p, cfg: QuadratureConfig = DEFAULT_QUAD):
    """Fourier transform of g^2 at (complex) p.

    Closed form for `GaussianTestFunction`; otherwise `g` is a real, even
    callable and the transform is done by quadrature over [0, inf).
    """
    if isinstance(g, GaussianTestFunction):
        return g.g2_tilde(p)
    p = np.atleast_1d(np.asarray(p, dtype=complex))

    def integrand(t):
        return 2.0 * (g(t) ** 2)[:, None] * np.cos(np.outer(t, p))

    out = integrate_semi_infinite(integrand, cfg)
    return out[0] if out.shape == (1,) else out


def convolution_rhs(g: GaussianTestFunction, p1: complex, p2: complex, n: int,
                    cfg: QuadratureConfig = DEFAULT_QUAD) -> complex:
    """int dnu/2pi (2 nu)^n g~(p1 - nu) conj(g~(-conj(p2) - nu)).

    Equals (p1 - p2)^n times the transform of g^2 at p1 + p2.
    """
    centre = 0.5 * (p1 - p2).real
    span = 12.0 / g.tau + abs(p1) + abs(p2)

    def integrand(nu):
        return (2 * nu) ** n * g.g_tilde(p1 - nu) * np.conj(g.g_tilde(-np.conj(p2) - nu)) / (2 * np.pi)

    return complex(integrate_interval(integrand, centre - span, centre + span, cfg))
