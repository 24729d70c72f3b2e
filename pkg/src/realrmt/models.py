"""Reference spacing laws, exact 2x2 spacing curves and 2x2 eigenvalue densities.

Conventions for the 2x2 curves: ``S`` is the raw spacing variable
(``sqrt(4 b^2 + (a - c)^2)`` for ``r1``, ``sqrt(b^2 + c^2)`` for ``r2``) and
``P(S)`` is known up to a constant. A :class:`ModelCurve` stores ``P``
together with its mass and mean ``S-bar`` and evaluates the unit-mass,
unit-mean law ``p(s) = S-bar P(S-bar s) / mass``.

Two independent routes exist for the ``r1`` curves:

* ``method="closed"`` uses the piecewise closed form (uniform) or the polar
  angular double integral (exponential, super-Gaussian);
* ``method="convolution"`` writes ``S^2 = U^2 + W^2`` with ``U = a - c``
  (autocorrelation density) and ``W = 2b``, so that
  ``P(S) = S * integral_0^{2 pi} f_U(S cos t) f_W(S sin t) dt``.

``p2x2`` defaults to the convolution route for exponential and
super-Gaussian ``r1`` (a one-dimensional adaptive integral per point, much
faster than the double integral) and to the closed form everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .sampler import PdfFamily

__all__ = [
    "ModelCurve",
    "SuperLinearRepulsion",
    "p_wigner",
    "p_poisson",
    "p_AB",
    "p_sub_exp",
    "semicircle",
    "bose_mitra",
    "d_cyclic",
    "p_half_gaussian",
    "p2x2",
    "raw_p2x2",
    "g2x2",
    "slope_at_zero",
    "repulsion_order",
    "bessel_I0",
    "erf",
    "gamma",
    "wigner_curve",
    "export_curve",
    "SUPPORTED_2X2",
]

PI = math.pi


# --- special functions ---------------------------------------------------


def bessel_I0(x):
    """Modified Bessel function I0; saturates to +inf beyond ~713."""
    with np.errstate(over="ignore"):
        return special.i0(x)


def erf(x):
    return special.erf(x)


def gamma(x):
    """Gamma function; +inf past the double-precision overflow point (~171.6)."""
    return special.gamma(x)


# --- reference laws --------------------------------------------------------


def _positive(**kw):
    for k, v in kw.items():
        if not np.all(np.asarray(v) > 0) or not np.all(np.isfinite(v)):
            raise ValueError(f"{k} must be positive and finite, got {v}")


def _nonneg(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacing must be >= 0")
    return s


def p_wigner(s):
    s = _nonneg(s)
    return (PI * s / 2) * np.exp(-PI * s * s / 4)


def p_poisson(mu, s):
    _positive(mu=mu)
    s = _nonneg(s)
    return mu * np.exp(-mu * s)


def p_AB(A, B, s):
    _positive(A=A, B=B)
    s = _nonneg(s)
    return A * s * np.exp(-B * s * s)


def p_sub_exp(a, b, s):
    """``a^(1/b) / Gamma(1 + 1/b) * exp(-a s^b)``, normalized on [0, inf)."""
    _positive(a=a, b=b)
    if not 0 < b < 1:
        raise ValueError("sub-exponential law needs 0 < b < 1")
    s = _nonneg(s)
    return a ** (1 / b) / special.gamma(1 + 1 / b) * np.exp(-a * s**b)


def p_half_gaussian(b, s):
    """One-parameter half-Gaussian ``2 sqrt(b/pi) exp(-b s^2)``; b = 1/pi has unit mean."""
    _positive(b=b)
    s = _nonneg(s)
    return 2 * np.sqrt(b / PI) * np.exp(-b * s * s)


def _unit_interval(eps):
    eps = np.asarray(eps, dtype=float)
    if np.any(np.abs(eps) > 1):
        raise ValueError("|eps| must be <= 1")
    return eps


def semicircle(eps):
    eps = _unit_interval(eps)
    return (2 / PI) * np.sqrt(1 - eps * eps)


def bose_mitra(eps):
    eps = np.asarray(eps, dtype=float)
    return (PI / 4) * np.abs(eps) * np.exp(-PI * eps * eps / 4)


def d_cyclic(a, eps):
    """``a / (1 - exp(-a)) |eps| exp(-a eps^2)`` on [-1, 1]."""
    _positive(a=a)
    eps = _unit_interval(eps)
    return a / (-math.expm1(-a)) * np.abs(eps) * np.exp(-a * eps * eps)


# --- curves ----------------------------------------------------------------


@dataclass
class ModelCurve:
    """Normalized law built from an unnormalized ``raw`` density.

    For ``kind="spacing"``: ``p(s) = mean * raw(mean * s) / mass``, support in
    ``s`` units. For ``kind="density"``: ``D(eps) = mean * raw(mean * eps) / mass``
    where ``mean`` is the mean of the positive half (E-bar).
    """

    name: str
    raw: Callable
    mass: float
    mean: float
    support: tuple  # in normalized units
    kind: str = "spacing"
    meta: dict = field(default_factory=dict)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self.mean * np.asarray(self.raw(self.mean * x[inside]), dtype=float) / self.mass
        return out if out.ndim else float(out)

    def moments(self, limit: int = 400):
        """(mass, mean) of the normalized law by adaptive quadrature."""
        lo, hi = self.support
        if self.kind == "density":
            lo = 0.0
        f = lambda x: float(self(x))  # noqa: E731
        pts = self.meta.get("breaks")
        kw = dict(limit=limit, epsabs=1e-12, epsrel=1e-10)
        if pts is not None and np.isfinite(hi):
            kw["points"] = [p for p in pts if lo < p < hi]
        m0 = integrate.quad(f, lo, hi, **kw)[0]
        m1 = integrate.quad(lambda x: x * f(x), lo, hi, **kw)[0]
        if self.kind == "density":
            return 2 * m0, m1 / m0
        return m0, m1 / m0


def _normalize(name, raw, hi, breaks=(), kind="spacing", meta=None) -> ModelCurve:
    kw = dict(limit=400, epsabs=1e-13, epsrel=1e-11)
    pts = [b for b in breaks if 0 < b < hi]
    if pts:
        kw["points"] = pts
    scalar = lambda x: float(np.asarray(raw(x)).ravel()[0])  # noqa: E731
    m0 = integrate.quad(scalar, 0.0, hi, **kw)[0]
    m1 = integrate.quad(lambda x: x * scalar(x), 0.0, hi, **kw)[0]
    mean = m1 / m0
    meta = dict(meta or {})
    meta["breaks"] = [b / mean for b in pts]
    if kind == "density":
        return ModelCurve(name, raw, 2 * m0, mean, (-hi / mean, hi / mean), "density", meta)
    return ModelCurve(name, raw, m0, mean, (0.0, hi / mean), "spacing", meta)


def wigner_curve() -> ModelCurve:
    return ModelCurve("wigner", lambda S: S * np.exp(-S * S), 0.5, math.sqrt(PI) / 2, (0.0, np.inf))


# raw P(S) closed forms -------------------------------------------------------


def _r1_uniform(S):
    S = np.asarray(S, dtype=float)
    out = np.zeros_like(S)
    lo = (S >= 0) & (S <= 2)
    out[lo] = S[lo] * (PI - S[lo]) / 4
    mid = (S > 2) & (S < 2 * math.sqrt(2))
    Sm = S[mid]
    root = np.sqrt(Sm * Sm - 4)
    out[mid] = Sm / 2 * (np.arcsin(2 / Sm) - np.arcsin(root / Sm)) + Sm / 4 * (root - 2)
    return np.maximum(out, 0.0)  # roundoff at the support edge


def _r2_uniform(S):
    S = np.asarray(S, dtype=float)
    out = np.zeros_like(S)
    lo = (S >= 0) & (S <= 1)
    out[lo] = PI * S[lo] / 2
    mid = (S > 1) & (S <= math.sqrt(2))
    out[mid] = 2 * S[mid] * (PI / 4 - np.arccos(1 / S[mid]))
    return np.maximum(out, 0.0)  # roundoff at the support edge


def _r2_exponential(S):
    S = np.atleast_1d(np.asarray(S, dtype=float))
    res = integrate.quad_vec(
        lambda t: np.exp(-S * (np.sin(t) + np.cos(t))), 0.0, PI / 2, epsabs=1e-14, epsrel=1e-11
    )[0]
    return S * res


def _r2_supergaussian(S):
    S = np.asarray(S, dtype=float)
    q = S**4
    # e^{-3q/4} I0(q/4) = e^{-q/2} i0e(q/4)
    return PI * S / 2 * np.exp(-q / 2) * special.i0e(q / 4)


def _r2_maxwellian(S):
    S = np.asarray(S, dtype=float)
    return S**3 * np.exp(-S * S)


def _g(t, p):
    return np.sqrt(1 - np.sin(t) ** 2 * np.sin(2 * p))


def _r1_polar(S, kind):
    """Angular double integral over (theta, phi); exact but slow (1-2 s per point)."""

    def one(s):
        if s == 0:
            return 0.0
        if kind == "exponential":
            def f(p, t):
                g = _g(t, p)
                e = np.cos(t) / 2 + np.sin(t) * (abs(np.cos(p)) + abs(np.sin(p)))
                return math.exp(-s * e / g) * s * s / g**3 * math.sin(t)
        else:
            def f(p, t):
                g = _g(t, p)
                e = np.cos(t) ** 4 / 16 + np.sin(t) ** 4 * (np.cos(p) ** 4 + np.sin(p) ** 4)
                return math.exp(-(s**4) * e / g**4) * s * s / g**3 * math.sin(t)
        return integrate.dblquad(f, 0, PI / 2, 0, PI, epsabs=1e-12, epsrel=1e-9)[0]

    return np.vectorize(one, otypes=[float])(np.asarray(S, dtype=float))


# convolution route for r1 ------------------------------------------------------


def _laplace_autocorr(u):
    u = np.abs(u)
    return (1 + u) * np.exp(-u) / 4


def _uniform_autocorr(u):
    return np.clip(2 - np.abs(u), 0, None) / 4


@lru_cache(maxsize=None)
def _sg_autocorr_spline():
    # f(x) = exp(-x^4) / N ; f_U(u) = integral f(x) f(x - u) dx, tabulated once
    norm = 2 * special.gamma(1.25)
    u = np.linspace(0.0, 8.0, 3201)
    vals = integrate.quad_vec(
        lambda x: np.exp(-(x**4) - (x - u) ** 4), -np.inf, np.inf, epsabs=1e-16, epsrel=1e-12
    )[0] / norm**2
    return CubicSpline(u, vals, bc_type=((1, 0.0), (2, 0.0)))


def _sg_autocorr(u):
    u = np.abs(u)
    sp = _sg_autocorr_spline()
    return np.where(u <= 8.0, sp(np.minimum(u, 8.0)), 0.0)


_R1_PARTS = {
    # (autocorrelation of f, density of W = 2b)
    "uniform": (_uniform_autocorr, lambda w: np.where(np.abs(w) <= 2, 0.25, 0.0)),
    "exponential": (_laplace_autocorr, lambda w: np.exp(-np.abs(w) / 2) / 4),
    "supergaussian": (
        _sg_autocorr,
        lambda w: np.exp(-((w / 2) ** 4)) / (2 * 2 * special.gamma(1.25)),
    ),
}


def _break_angles(s: float, edges, hi: float) -> list:
    # angles in (0, hi) where s*cos(t) or s*sin(t) crosses +-edge or zero
    base = [0.0] + [math.acos(e / s) for e in edges if 0 < e < s]
    quarter = sorted(set(base + [PI / 2 - b for b in base]))
    pts = {q + k * PI / 2 for q in quarter for k in range(4)}
    return sorted(t for t in pts if 1e-14 < t < hi - 1e-14)


def _pointwise_angle_integral(S, integrand, hi, edges=()):
    # one quadrature per S, split at the S-dependent angles where the
    # integrand jumps or kinks
    S = np.atleast_1d(np.asarray(S, dtype=float))
    out = np.empty(S.shape)
    for k, s in np.ndenumerate(S):
        if s <= 0:
            out[k] = 0.0
            continue
        pts = _break_angles(float(s), edges, hi)
        out[k] = integrate.quad(lambda t: float(integrand(s, t)), 0.0, hi, points=pts or None,
                                epsabs=1e-15, epsrel=1e-11, limit=2000)[0]
    return out


_R1_EDGES = {"uniform": (2.0,), "exponential": (), "supergaussian": ()}


def _r1_convolution(S, pdf: str):
    fu, fw = _R1_PARTS[pdf]
    S = np.atleast_1d(np.asarray(S, dtype=float))
    return 4 * S * _pointwise_angle_integral(S, lambda s, t: fu(s * np.cos(t)) * fw(s * np.sin(t)), PI / 2,
                                             _R1_EDGES[pdf])


def _r2_generic(S, density, edges=()):
    S = np.atleast_1d(np.asarray(S, dtype=float))
    return S * _pointwise_angle_integral(S, lambda s, t: density(s * np.cos(t)) * density(s * np.sin(t)), 2 * PI,
                                         edges)


SUPPORTED_2X2 = {
    ("r1", "uniform"),
    ("r1", "exponential"),
    ("r1", "supergaussian"),
    ("r2", "uniform"),
    ("r2", "exponential"),
    ("r2", "supergaussian"),
    ("r2", "maxwellian"),
}

# (upper S limit, interior breakpoints)
_SUPPORT = {
    ("r1", "uniform"): (2 * math.sqrt(2), (2.0,)),
    ("r2", "uniform"): (math.sqrt(2), (1.0,)),
    ("r1", "exponential"): (80.0, (5.0, 20.0)),
    ("r2", "exponential"): (45.0, (5.0, 20.0)),
    ("r1", "supergaussian"): (7.0, (1.0, 3.0)),
    ("r2", "supergaussian"): (3.0, (1.0,)),
    ("r2", "maxwellian"): (7.0, (1.0, 3.0)),
}


def _key(family, pdf):
    family = getattr(family, "value", family).lower()
    pdf = PdfFamily(getattr(pdf, "family", pdf)).value
    return family, pdf


def raw_p2x2(family, pdf, method: str = "default") -> Callable:
    """Unnormalized ``P(S)`` for a supported (family, pdf) pair."""
    key = _key(family, pdf)
    if key[1] == "gaussian":
        raise ValueError("Gaussian 2x2 spacing is the Wigner law; use p_wigner / wigner_curve")
    if key not in SUPPORTED_2X2:
        raise ValueError(f"no 2x2 spacing formula for {key[0]} with {key[1]} elements")
    fam, pdf = key
    if method not in ("default", "closed", "convolution", "polar"):
        raise ValueError(f"unknown method {method!r}")
    if fam == "r2":
        if method == "convolution":
            dens = {
                "uniform": lambda x: np.where(np.abs(x) <= 1, 0.5, 0.0),
                "exponential": lambda x: np.exp(-np.abs(x)) / 2,
                "supergaussian": lambda x: np.exp(-(x**4)) / (2 * special.gamma(1.25)),
                "maxwellian": lambda x: np.where(x >= 0, 2 * x * np.exp(-x * x), 0.0),
            }[pdf]
            return lambda S: _r2_generic(S, dens, (1.0,) if pdf == "uniform" else ())
        return {
            "uniform": _r2_uniform,
            "exponential": _r2_exponential,
            "supergaussian": _r2_supergaussian,
            "maxwellian": _r2_maxwellian,
        }[pdf]
    if method == "convolution" or (method == "default" and pdf != "uniform"):
        return lambda S: _r1_convolution(S, pdf)
    if pdf == "uniform":
        return _r1_uniform
    return lambda S: _r1_polar(S, pdf)


@lru_cache(maxsize=None)
def _p2x2_cached(key, method):
    raw = raw_p2x2(*key, method=method)
    hi, breaks = _SUPPORT[key]
    return _normalize(f"{key[0]}_{key[1]}", raw, hi, breaks, meta={"family": key[0], "pdf": key[1]})


def p2x2(family, pdf, method: str = "default") -> ModelCurve:
    """Normalized 2x2 spacing law (unit mass, unit mean)."""
    key = _key(family, pdf)
    raw_p2x2(*key, method=method)  # validates
    return _p2x2_cached(key, method)


# --- eigenvalue densities ------------------------------------------------------


def _g_r2(E):
    E = np.asarray(E, dtype=float)
    return (2 * np.exp(-E * E) + math.sqrt(2 * PI) * E * special.erf(E / math.sqrt(2)) * np.exp(-E * E / 2)) / (
        4 * math.sqrt(PI)
    )


def _g_r1(E):
    E = np.atleast_1d(np.asarray(E, dtype=float))

    def integrand(r):
        base = -2 * E * E - 0.75 * r * r
        return r * 0.5 * (np.exp(base + 2 * E * r) + np.exp(base - 2 * E * r)) * special.i0e(r * r / 8)

    return integrate.quad_vec(integrand, 0.0, np.inf, epsabs=1e-15, epsrel=1e-11)[0]


@lru_cache(maxsize=None)
def g2x2(family) -> ModelCurve:
    """Eigenvalue density of 2x2 Gaussian matrices (elements ~ exp(-x^2)).

    The returned curve is ``D(eps)`` with ``eps = E / E-bar``, E-bar being the
    mean of the positive eigenvalues; ``curve.mean`` holds E-bar and
    ``curve.raw`` the unnormalized ``g(E)``.
    """
    fam = getattr(family, "value", family).lower()
    if fam == "r1":
        raw = _g_r1
    elif fam == "r2":
        raw = _g_r2
    else:
        raise ValueError("g2x2 handles r1 and r2")
    return _normalize(f"g_{fam}", raw, 12.0, (2.0, 5.0), kind="density", meta={"family": fam})


# --- slope at the origin ---------------------------------------------------------


class SuperLinearRepulsion(ValueError):
    """p(s)/s has no finite nonzero limit; ``order`` is the estimated power of s."""

    def __init__(self, order: float):
        kind = "super-linear" if order > 1 else "sub-linear"
        super().__init__(f"{kind} behaviour at s=0 (p ~ s^{order:.2f})")
        self.order = order
        self.kind = kind


def repulsion_order(curve, h: float = 2.5e-3) -> float:
    """Local power ``k`` in ``p(s) ~ s^k`` near 0, from two points."""
    a, b = float(curve(h)), float(curve(2 * h))
    if a <= 0 or b <= 0:
        return math.inf
    return math.log(b / a) / math.log(2)


def slope_at_zero(curve, hs=(1e-2, 5e-3, 2.5e-3)) -> float:
    """``alpha = lim p(s)/s`` by two-level Richardson extrapolation."""
    order = repulsion_order(curve, hs[-1])
    if not 0.8 < order < 1.2:
        raise SuperLinearRepulsion(order)
    v = [float(curve(h)) / h for h in hs]
    r1 = [2 * v[1] - v[0], 2 * v[2] - v[1]]
    alpha = (4 * r1[1] - r1[0]) / 3
    if not math.isfinite(alpha):
        raise SuperLinearRepulsion(order)
    return alpha


# --- export ------------------------------------------------------------------------


def export_curve(curve, path, grid: int = 400, lo: float | None = None, hi: float | None = None) -> None:
    """Write a two-column ``s,p`` CSV on an equally spaced grid."""
    if lo is None:
        lo = curve.support[0] if np.isfinite(curve.support[0]) else -4.0
    if hi is None:
        hi = curve.support[1] if np.isfinite(curve.support[1]) else 4.0
    hi = min(hi, 4.0) if curve.kind == "spacing" else hi
    x = np.linspace(lo, hi, int(grid))
    y = np.asarray(curve(x), dtype=float)
    with open(path, "w", newline="") as fh:
        fh.write("s,p\n")
        for a, b in zip(x, y):
            fh.write(f"{a:.10g},{b:.10g}\n")
