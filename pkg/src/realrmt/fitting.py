"""Least-squares fits of parametric laws to histograms.

The objective is ``sum_i w_i (h_i - f(c_i))^2`` over bin centers ``c_i``, with
``w_i = count_i / n_samples`` by default. It is minimized with
Levenberg-Marquardt (``scipy.optimize.least_squares(method="lm")``) using a
central-difference Jacobian, from several starting points; the best local
optimum wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize, special

from .spacing import Histogram

__all__ = [
    "Model",
    "MODELS",
    "FitResult",
    "fit",
    "init_guess",
    "starts",
    "goodness",
    "get_model",
]


# parameter transforms: internal (unconstrained) <-> external
def _pos():
    return (np.log, np.exp)


def _unit():
    return (special.logit, special.expit)


def _free():
    return (lambda x: x, lambda x: x)


@dataclass(frozen=True)
class Model:
    name: str
    params: tuple
    func: Callable  # func(s, *params)
    transforms: tuple  # one (to_internal, to_external) pair per parameter
    amplitude: int | None = None  # index of a purely multiplicative parameter
    kind: str = "spacing"  # or "density"

    def __call__(self, s, params):
        if isinstance(params, dict):
            params = [params[k] for k in self.params]
        return self.func(np.asarray(s, dtype=float), *params)


def _sub_exp(s, a, b):
    return a ** (1 / b) / special.gamma(1 + 1 / b) * np.exp(-a * np.abs(s) ** b)


def _abs_pow(s, p):
    return np.abs(s) ** p


MODELS: dict[str, Model] = {
    m.name: m
    for m in [
        Model("PAB", ("A", "B"), lambda s, A, B: A * s * np.exp(-B * s * s), (_pos(), _pos()), 0),
        Model("Poisson", ("mu",), lambda s, mu: mu * np.exp(-mu * s), (_pos(),)),
        Model("SubExp", ("a", "b"), _sub_exp, (_pos(), _unit())),
        Model("WignerLike", ("a", "b"), lambda s, a, b: a * s * np.exp(-b * s * s), (_pos(), _pos()), 0),
        Model(
            "LinearStretched",
            ("a", "b", "c"),
            lambda s, a, b, c: a * s * np.exp(-b * _abs_pow(s, c)),
            (_pos(), _pos(), _pos()),
            0,
        ),
        Model(
            "PowerStretched",
            ("a", "b", "c", "d"),
            lambda s, a, b, c, d: a * _abs_pow(s, b) * np.exp(-c * _abs_pow(s, d)),
            (_pos(), _pos(), _pos(), _pos()),
            0,
        ),
        Model(
            "ShiftedGaussianLinear",
            ("a", "c", "d", "w"),
            lambda s, a, c, d, w: a * (s + c) * np.exp(-((s - d) ** 2) / w),
            (_pos(), _free(), _free(), _pos()),
            0,
        ),
        Model("Gaussian", ("a", "b"), lambda e, a, b: a * np.exp(-b * e * e), (_pos(), _pos()), 0, "density"),
        Model(
            "SuperGaussianQuartic",
            ("a", "b"),
            lambda e, a, b: a * np.exp(-b * e**4),
            (_pos(), _pos()),
            0,
            "density",
        ),
        Model("ExponentialD", ("a", "b"), lambda e, a, b: a * np.exp(-b * e), (_pos(), _pos()), 0, "density"),
        Model(
            "HalfGaussian",
            ("b",),
            lambda s, b: 2 * np.sqrt(b / math.pi) * np.exp(-b * s * s),
            (_pos(),),
        ),
        Model(
            "BoseMitraFit",
            ("a",),
            lambda e, a: a / (-np.expm1(-a)) * np.abs(e) * np.exp(-a * e * e),
            (_pos(),),
            None,
            "density",
        ),
    ]
}


def get_model(model) -> Model:
    if isinstance(model, Model):
        return model
    for name, m in MODELS.items():
        if name.lower() == str(model).lower():
            return m
    raise ValueError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")


@dataclass
class FitResult:
    model: str
    params: dict
    sse: float
    sup_norm: float
    chi2: float
    n_bins: int
    converged: bool
    objective: float = float("nan")
    grad_norm: float = float("nan")
    message: str = ""
    starts_tried: int = 0
    extra: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]

    def to_text(self) -> str:
        lines = [f"model: {self.model}"]
        lines += [f"param.{k}: {v:.12g}" for k, v in self.params.items()]
        lines += [
            f"sse: {self.sse:.12g}",
            f"sup_norm: {self.sup_norm:.12g}",
            f"chi2: {self.chi2:.12g}",
            f"n_bins: {self.n_bins}",
            f"converged: {'true' if self.converged else 'false'}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FitResult":
        kv = {}
        params = {}
        for line in text.strip().splitlines():
            k, v = (x.strip() for x in line.split(":", 1))
            if k.startswith("param."):
                params[k[6:]] = float(v)
            else:
                kv[k] = v
        return cls(
            model=kv["model"],
            params=params,
            sse=float(kv["sse"]),
            sup_norm=float(kv["sup_norm"]),
            chi2=float(kv["chi2"]),
            n_bins=int(kv["n_bins"]),
            converged=kv["converged"] == "true",
        )


# --- goodness of fit ---------------------------------------------------------------


def _merged_chi2(observed, expected, min_expected=5.0) -> float:
    groups_o, groups_e = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            groups_o.append(acc_o)
            groups_e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if groups_e:
            groups_o[-1] += acc_o
            groups_e[-1] += acc_e
        else:
            groups_o.append(acc_o)
            groups_e.append(acc_e)
    o = np.asarray(groups_o)
    e = np.asarray(groups_e)
    keep = e > 0
    return float(np.sum((o[keep] - e[keep]) ** 2 / e[keep]))


def goodness(hist: Histogram, curve) -> dict:
    """``sse`` and ``sup_norm`` of density residuals, Pearson chi2 on counts.

    ``curve`` is any callable of the bin centers. For chi2, adjacent bins are
    merged left to right until every group expects at least 5 counts.
    """
    f = np.asarray(curve(hist.centers), dtype=float)
    r = hist.density - f
    expected = hist.n_samples * f * hist.widths
    return {
        "sse": float(np.sum(r * r)),
        "sup_norm": float(np.max(np.abs(r))),
        "chi2": _merged_chi2(hist.counts.astype(float), expected),
    }


# --- starting points -----------------------------------------------------------------


def _is_flat(hist: Histogram) -> bool:
    d = hist.density
    top = d.max()
    return top <= 0 or (top - d.min()) <= 0.1 * top


def _mode(hist: Histogram) -> float:
    return float(hist.centers[int(np.argmax(hist.density))])


def _mean(hist: Histogram) -> float:
    if hist.sample_mean is not None:
        return float(hist.sample_mean)
    c = hist.counts
    return float(np.sum(hist.centers * c) / max(c.sum(), 1))


def _fill_amplitude(model: Model, hist: Histogram, p: list, w) -> list:
    if model.amplitude is None:
        return p
    p = list(p)
    p[model.amplitude] = 1.0
    f = model(hist.centers, p)
    den = float(np.sum(w * f * f))
    p[model.amplitude] = float(np.sum(w * f * hist.density)) / den if den > 0 else 1.0
    if not p[model.amplitude] > 0:
        p[model.amplitude] = 1.0
    return p


def _half_width(hist: Histogram) -> float:
    # |eps| where the density first falls below half its maximum
    c, d = hist.centers, hist.density
    top = d.max()
    k0 = int(np.argmax(d))
    for k in range(k0, d.size):
        if d[k] < top / 2:
            return max(abs(c[k]), 1e-3)
    return max(abs(c[-1]), 1e-3)


def starts(hist: Histogram, model, weights=None) -> list[tuple[dict, str]]:
    """Starting points as ``(params, source)``; ``source`` is ``moment`` or ``grid``."""
    m = get_model(model)
    w = hist.counts / max(hist.n_samples, 1) if weights is None else weights
    out: list[tuple[list, str]] = []
    flat = _is_flat(hist)
    mean = _mean(hist)
    mode = _mode(hist)
    name = m.name
    if name == "Poisson":
        out.append(([1.0 / mean if mean > 0 else 1.0], "moment"))
        out += [([mu], "grid") for mu in (0.5, 1.0, 2.0)]
    elif name in ("PAB", "WignerLike"):
        if not flat and mode > hist.bin_edges[1]:
            b0 = 1.0 / (2 * mode * mode)
            out.append(([2 * b0, b0], "moment"))
        out += [([2 * b, b], "grid") for b in (0.1, 0.3, 1.0, 3.0, 10.0, 30.0)]
    elif name == "SubExp":
        p0 = float(hist.density[0])
        for b in (0.3, 0.5, 0.7, 0.9):
            a = (max(p0, 1e-3) * special.gamma(1 + 1 / b)) ** b
            out.append(([a, b], "grid"))
    elif name == "HalfGaussian":
        if mean > 0:
            out.append(([1.0 / (math.pi * mean * mean)], "moment"))
        out += [([b], "grid") for b in (0.1, 0.3, 1.0)]
    elif name == "BoseMitraFit":
        out += [([a], "grid") for a in (1.0, 3.0, 7.0, 15.0)]
    elif name in ("Gaussian", "SuperGaussianQuartic"):
        h = _half_width(hist)
        power = 2 if name == "Gaussian" else 4
        out.append(([1.0, math.log(2) / h**power], "moment"))
        out += [([1.0, b], "grid") for b in (1.0, 4.0, 16.0)]
    elif name == "ExponentialD":
        b0 = 1.0 / mean if mean > 0 else 1.0
        out.append(([1.0, b0], "moment"))
        out += [([1.0, b], "grid") for b in (1.0, 5.0, 20.0)]
    elif name == "LinearStretched":
        s0 = max(mode, 1e-3)
        for c in (0.3, 0.5, 1.0, 2.0, 3.0):
            b = 1.0 / (c * s0**c)  # mode of s exp(-b s^c)
            out.append(([1.0, b, c], "grid"))
    elif name == "PowerStretched":
        s0 = max(mode, 1e-3)
        for b in (0.5, 1.0, 2.0, 3.0):
            for d in (0.2, 0.5, 1.0, 2.0, 3.0):
                c = b / (d * s0**d)  # mode of s^b exp(-c s^d)
                out.append(([1.0, b, c, d], "grid"))
    elif name == "ShiftedGaussianLinear":
        for wd in (0.5, 1.0, 2.0):
            for c in (0.1, 0.5, 2.0, 8.0):
                out.append(([1.0, c, mode, wd], "grid"))
    else:  # pragma: no cover - every registered model is handled above
        raise ValueError(name)
    return [(dict(zip(m.params, _fill_amplitude(m, hist, p, w))), src) for p, src in out]


def init_guess(hist: Histogram, model) -> dict:
    """First (preferred) starting point for ``model``."""
    return starts(hist, model)[0][0]


# --- the fit -----------------------------------------------------------------------------


def _jacobian(fun, step=1e-6):
    def jac(theta):
        theta = np.asarray(theta, dtype=float)
        cols = []
        for k in range(theta.size):
            h = step * max(abs(theta[k]), 1.0)
            tp, tm = theta.copy(), theta.copy()
            tp[k] += h
            tm[k] -= h
            cols.append((fun(tp) - fun(tm)) / (2 * h))
        return np.stack(cols, axis=1)

    return jac


def fit(hist: Histogram, model, weights: str = "counts", max_nfev: int = 4000) -> FitResult:
    """Weighted least-squares fit of ``model`` to ``hist`` (see module docstring).

    ``weights="uniform"`` fits every bin equally.
    """
    m = get_model(model)
    n_par = len(m.params)
    if hist.n_bins < n_par + 2:
        raise ValueError(f"{m.name} needs at least {n_par + 2} bins, got {hist.n_bins}")
    if not np.all(np.isfinite(hist.density)):
        raise ValueError("histogram densities must be finite")
    if weights == "counts":
        w = hist.counts / max(hist.n_samples, 1)
    elif weights == "uniform":
        w = np.full(hist.n_bins, 1.0 / hist.n_bins)
    else:
        raise ValueError("weights must be 'counts' or 'uniform'")
    sw = np.sqrt(w)
    x, y = hist.centers, hist.density
    to_int = [t[0] for t in m.transforms]
    to_ext = [t[1] for t in m.transforms]

    def ext(theta):
        return [g(t) for g, t in zip(to_ext, theta)]

    def resid(theta):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            f = m.func(x, *ext(theta))
        r = sw * (y - f)
        return np.where(np.isfinite(r), r, 1e6)

    jac = _jacobian(resid)
    best = None
    candidates = starts(hist, m, w)
    for p0, _src in candidates:
        try:
            theta0 = np.array([g(p0[k]) for g, k in zip(to_int, m.params)], dtype=float)
        except (ValueError, FloatingPointError):
            continue
        if not np.all(np.isfinite(theta0)):
            continue
        try:
            res = optimize.least_squares(
                resid, theta0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev
            )
        except (ValueError, np.linalg.LinAlgError):
            continue
        obj = float(res.fun @ res.fun)
        params = tuple(float(v) for v in ext(res.x))
        key = (obj, params)
        if best is None or key < best[0]:
            best = (key, res)
    if best is None:
        raise RuntimeError(f"no usable starting point for {m.name}")
    (obj, params), res = best
    r = res.fun
    g = jac(res.x).T @ r
    grad_norm = float(np.linalg.norm(g))
    converged = bool(np.all(np.isfinite(params)) and grad_norm <= 1e-8 * (1 + obj))
    pdict = dict(zip(m.params, params))
    gd = goodness(hist, lambda s: m(s, list(params)))
    return FitResult(
        model=m.name,
        params=pdict,
        sse=gd["sse"],
        sup_norm=gd["sup_norm"],
        chi2=gd["chi2"],
        n_bins=hist.n_bins,
        converged=converged,
        objective=obj,
        grad_norm=grad_norm,
        message=str(res.message),
        starts_tried=len(candidates),
    )
