import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from realrmt import models
from realrmt.models import (
    SUPPORTED_2X2,
    SuperLinearRepulsion,
    bessel_I0,
    bose_mitra,
    d_cyclic,
    erf,
    export_curve,
    g2x2,
    gamma,
    p2x2,
    p_AB,
    p_half_gaussian,
    p_poisson,
    p_sub_exp,
    p_wigner,
    raw_p2x2,
    repulsion_order,
    semicircle,
    slope_at_zero,
    wigner_curve,
)

# --- independent oracles ------------------------------------------------------


def _i0_series(x: float) -> float:
    # sum (x/2)^{2k} / (k!)^2 with a running term
    term, total, k = 1.0, 1.0, 0
    q = (x / 2) ** 2
    while term > 1e-18 * total:
        k += 1
        term *= q / (k * k)
        total += term
    return total


def _erf_series(x: float) -> float:
    # 2/sqrt(pi) sum (-1)^k x^{2k+1} / (k! (2k+1))
    term, total, k = x, x, 0
    while abs(term) > 1e-18:
        k += 1
        term *= -x * x / k
        total += term / (2 * k + 1)
    return 2 / math.sqrt(math.pi) * total


def _mass_mean(f, lo, hi, points=None):
    kw = dict(limit=400, epsabs=1e-12, epsrel=1e-11)
    if points:
        kw["points"] = points
    m0 = integrate.quad(f, lo, hi, **kw)[0]
    m1 = integrate.quad(lambda x: x * f(x), lo, hi, **kw)[0]
    return m0, m1 / m0


# --- special functions ----------------------------------------------------------


def test_special_identities():
    assert bessel_I0(0.0) == 1.0
    assert erf(0.0) == 0.0
    assert gamma(2.0) == 1.0
    assert math.isclose(bessel_I0(1.0), 1.2660658, abs_tol=1e-7)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5, 7.0, 15.0])
def test_i0_matches_series(x):
    assert math.isclose(bessel_I0(x), _i0_series(x), rel_tol=1e-12)


@pytest.mark.parametrize("x", [0.05, 0.3, 1.0, 2.0])
def test_erf_matches_series(x):
    assert math.isclose(erf(x), _erf_series(x), rel_tol=1e-12)


@pytest.mark.parametrize("n", range(1, 15))
def test_gamma_factorial(n):
    assert math.isclose(gamma(float(n)), math.factorial(n - 1), rel_tol=1e-12)


def test_gamma_half_integer():
    assert math.isclose(gamma(0.5), math.sqrt(math.pi), rel_tol=1e-12)
    assert math.isclose(gamma(2.5), 0.75 * math.sqrt(math.pi), rel_tol=1e-12)


def test_erf_monotone_to_one():
    x = np.linspace(0, 8, 400)
    y = erf(x)
    assert np.all(np.diff(y) >= 0)
    assert y[-1] == 1.0


def test_special_saturation():
    assert bessel_I0(800.0) == np.inf
    assert gamma(200.0) == np.inf


# --- reference laws ---------------------------------------------------------------


def test_wigner_examples():
    assert p_wigner(0.0) == 0.0
    m0, mean = _mass_mean(p_wigner, 0, np.inf)
    assert math.isclose(m0, 1, abs_tol=1e-9) and math.isclose(mean, 1, abs_tol=1e-9)


def test_semicircle_center():
    assert math.isclose(semicircle(0.0), 2 / math.pi, rel_tol=1e-15)
    assert math.isclose(integrate.quad(semicircle, -1, 1)[0], 1, abs_tol=1e-9)


def test_sub_exp_mass():
    m0 = integrate.quad(lambda s: p_sub_exp(2, 0.5, s), 0, np.inf, epsabs=1e-12)[0]
    assert math.isclose(m0, 1, abs_tol=1e-8)


@given(a=st.floats(0.2, 10), b=st.floats(0.1, 0.95))
def test_sub_exp_mass_property(a, b):
    # substitute u = s^b so the heavy tail becomes exponential in u
    f = lambda u: p_sub_exp(a, b, u ** (1 / b)) * u ** (1 / b - 1) / b  # noqa: E731
    m0 = integrate.quad(f, 0, np.inf, limit=400, epsabs=1e-12, epsrel=1e-10)[0]
    assert abs(m0 - 1) < 1e-6


def test_other_laws_mass():
    assert math.isclose(integrate.quad(lambda s: p_poisson(1.3, s), 0, np.inf)[0], 1, abs_tol=1e-9)
    assert math.isclose(integrate.quad(lambda s: p_AB(2 * 0.8, 0.8, s), 0, np.inf)[0], 1, abs_tol=1e-9)
    m0, mean = _mass_mean(lambda s: p_half_gaussian(1 / math.pi, s), 0, np.inf)
    assert math.isclose(m0, 1, abs_tol=1e-9) and math.isclose(mean, 1, abs_tol=1e-9)
    assert math.isclose(integrate.quad(bose_mitra, -np.inf, np.inf)[0], 1, abs_tol=1e-9)
    assert math.isclose(integrate.quad(lambda e: d_cyclic(9.33, e), -1, 1, points=[0])[0], 1, abs_tol=1e-9)


@pytest.mark.parametrize(
    "call",
    [
        lambda: p_poisson(0, 1.0),
        lambda: p_poisson(-1, 1.0),
        lambda: p_AB(1, 0, 1.0),
        lambda: p_sub_exp(1, 1.0, 1.0),
        lambda: p_sub_exp(1, 0.0, 1.0),
        lambda: p_sub_exp(-1, 0.5, 1.0),
        lambda: p_wigner(-0.1),
        lambda: semicircle(1.01),
        lambda: d_cyclic(1.0, -1.5),
        lambda: d_cyclic(0.0, 0.5),
        lambda: p_half_gaussian(0, 1.0),
    ],
)
def test_domain_errors(call):
    with pytest.raises(ValueError):
        call()


# --- 2x2 spacing curves --------------------------------------------------------------


def test_unsupported_pairs():
    with pytest.raises(ValueError):
        p2x2("r1", "maxwellian")
    with pytest.raises(ValueError):
        p2x2("r2", "gaussian")
    with pytest.raises(ValueError):
        p2x2("r3", "uniform")
    with pytest.raises(ValueError):
        p2x2("r1", "uniform", method="spline")


@pytest.mark.parametrize("key", sorted(SUPPORTED_2X2))
def test_p2x2_normalized(key):
    mass, mean = p2x2(*key).moments()
    assert abs(mass - 1) < 1e-6
    assert abs(mean - 1) < 1e-6


@pytest.mark.parametrize("key", sorted(SUPPORTED_2X2))
def test_closed_and_convolution_routes_agree(key):
    a, b = p2x2(*key), p2x2(*key, method="convolution")
    s = np.linspace(0.02, 2.5, 25)
    assert np.max(np.abs(a(s) - b(s))) < 1e-7
    assert math.isclose(a.mean, b.mean, rel_tol=1e-8)


@pytest.mark.parametrize("pdf", ["exponential", "supergaussian"])
def test_polar_route_agrees_at_two_points(pdf):
    # both routes are unnormalized; their shapes must agree
    S = np.array([0.6, 1.7])
    ratio = raw_p2x2("r1", pdf, method="polar")(S) / raw_p2x2("r1", pdf, method="convolution")(S)
    assert abs(ratio[1] / ratio[0] - 1) < 1e-6


def test_r2_uniform_support():
    c = p2x2("r2", "uniform")
    edge = math.sqrt(2) / c.mean
    assert c(edge + 1e-9) == 0.0
    assert c(edge + 0.3) == 0.0
    assert c(edge * 0.5) > 0
    # piecewise-linear in S below S=1
    S = np.array([0.1, 0.4, 0.7])
    raw = raw_p2x2("r2", "uniform")(S)
    np.testing.assert_allclose(raw / S, raw[0] / S[0], rtol=1e-12)


def test_r1_uniform_support():
    raw = raw_p2x2("r1", "uniform")
    assert raw(np.array([2 * math.sqrt(2) + 0.01]))[0] == 0.0
    c = p2x2("r1", "uniform")
    assert c(2 * math.sqrt(2) / c.mean + 0.01) == 0.0


def test_r1_uniform_continuous_at_break():
    raw = raw_p2x2("r1", "uniform")
    # square-root kink on the right of S=2, so the gap shrinks like sqrt(d)
    for d in (1e-6, 1e-10, 1e-14):
        lo, hi = raw(np.array([2 - d, 2 + d]))
        assert abs(lo - hi) < 2 * math.sqrt(d)


def test_r2_maxwellian_moments():
    # oracle: moments of S^3 e^{-S^2} by direct quadrature
    f = lambda S: S**3 * math.exp(-S * S)  # noqa: E731
    m0, Sbar = _mass_mean(f, 0, np.inf)
    assert math.isclose(Sbar, 3 * math.sqrt(math.pi) / 4, rel_tol=1e-10)
    c = p2x2("r2", "maxwellian")
    assert math.isclose(c.mean, Sbar, rel_tol=1e-8)
    s = np.array([0.3, 1.0, 1.8])
    np.testing.assert_allclose(c(s), 2 * Sbar**4 * s**3 * np.exp(-((Sbar * s) ** 2)), rtol=1e-8)


def test_r2_maxwellian_superlinear():
    c = p2x2("r2", "maxwellian")
    assert abs(repulsion_order(c) - 3) < 0.01
    with pytest.raises(SuperLinearRepulsion) as info:
        slope_at_zero(c)
    assert info.value.kind == "super-linear"


def test_r2_supergaussian_closed_form():
    c = p2x2("r2", "supergaussian")
    s = np.array([0.2, 0.9, 1.6])
    S = c.mean * s
    shape = S * np.exp(-3 * S**4 / 4) * np.array([_i0_series(x) for x in S**4 / 4])
    ratio = c(s) / shape
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-10)


def _raw_draws(pdf, size, rng):
    # plain numpy element laws, independent of the package sampler
    if pdf == "uniform":
        return rng.uniform(-1, 1, size)
    if pdf == "exponential":
        return rng.laplace(0, 1, size)
    if pdf == "maxwellian":
        return np.sqrt(rng.exponential(1.0, size))
    out = np.empty(0)
    while out.size < size:
        x, u = rng.uniform(-3, 3, 2 * size), rng.uniform(0, 1, 2 * size)
        out = np.concatenate([out, x[u < np.exp(-(x**4))]])
    return out[:size]


@pytest.mark.parametrize("key", sorted(SUPPORTED_2X2))
def test_small_s_mass_matches_raw_monte_carlo(key):
    # mass below s=eps from the exact curve vs direct simulation of the 2x2 spacing
    fam, pdf = key
    rng = np.random.default_rng(2024)
    a, b, c = (_raw_draws(pdf, 1_000_000, rng) for _ in range(3))
    s = np.sqrt(4 * b * b + (a - c) ** 2) if fam == "r1" else np.sqrt(b * b + c * c)
    s = s / s.mean()
    eps = 0.3 if pdf == "maxwellian" else 0.1
    frac = np.mean(s < eps)
    curve = p2x2(*key)
    exact = integrate.quad(lambda x: float(curve(x)), 0, eps, epsabs=1e-13)[0]
    sigma = math.sqrt(exact * (1 - exact) / s.size)
    assert abs(frac - exact) < 5 * sigma + 1e-3 * exact


def test_wigner_slope():
    assert abs(slope_at_zero(wigner_curve()) - math.pi / 2) < 1e-6
    m0, mean = wigner_curve().moments()
    assert abs(m0 - 1) < 1e-9 and abs(mean - 1) < 1e-9


@given(a=st.floats(0.5, 5))
def test_slope_of_linear_law(a):
    # p = A s exp(-B s^2): slope A
    curve = models.ModelCurve("ab", lambda s: a * s * np.exp(-s * s), 1.0, 1.0, (0.0, np.inf))
    assert abs(slope_at_zero(curve) - a) < 1e-6 * a


# --- 2x2 eigenvalue densities ------------------------------------------------------------


def test_g_r2_examples():
    g = g2x2("r2")
    assert math.isclose(float(g.raw(0.0)), 1 / (2 * math.sqrt(math.pi)), rel_tol=1e-14)
    assert math.isclose(g.mean, (4 + math.pi) / (4 * math.sqrt(math.pi)), rel_tol=1e-8)


@pytest.mark.parametrize("fam", ["r1", "r2"])
def test_g_even_and_normalized(fam):
    g = g2x2(fam)
    e = np.linspace(0.05, 3, 20)
    np.testing.assert_allclose(g(e), g(-e), rtol=1e-13)
    mass, mean = g.moments()
    assert abs(mass - 1) < 1e-6 and abs(mean - 1) < 1e-6


def test_g_r1_raw_mass():
    # raw g integrates to one for unit-normalized element density
    g = g2x2("r1")
    total = 2 * integrate.quad(lambda E: float(g.raw(E)[0]), 0, 12, limit=200)[0]
    assert abs(total - g.mass) < 1e-8


def test_g2x2_bad_family():
    with pytest.raises(ValueError):
        g2x2("r3")


# --- export ------------------------------------------------------------------------------


def test_export_curve(tmp_path):
    path = tmp_path / "curve.csv"
    export_curve(p2x2("r2", "uniform"), path, grid=2000)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (2000, 2)
    assert path.read_text().splitlines()[0] == "s,p"
    assert data[0, 0] == 0.0 and data[-1, 1] == pytest.approx(p2x2("r2", "uniform")(data[-1, 0]), abs=1e-9)
    mass = np.trapezoid(data[:, 1], data[:, 0])
    assert abs(mass - 1) < 1e-3
