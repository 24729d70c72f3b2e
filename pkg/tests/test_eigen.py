import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from realrmt.eigen import (
    ConvergenceError,
    circulant_eigs_dft,
    eig_2x2,
    eig_general,
    eig_symmetric,
    eig_tridiagonal,
    ensemble_spectra,
    francis_eigenvalues,
    hessenberg_reduce,
    real_eigenvalues,
    reverse_circulant_eigs,
    tql_eigenvalues,
)
from realrmt.matrices import EnsembleSpec, assemble, build, build_from_draws, draw_elements
from realrmt.sampler import PdfSpec
from realrmt.seeding import seed_stream


def _match(a, b):
    """Greedy nearest matching of two complex multisets; returns max error."""
    b = list(b)
    err = 0.0
    for z in a:
        k = int(np.argmin([abs(z - w) for w in b]))
        err = max(err, abs(z - b.pop(k)))
    return err


def _dft_oracle(x):
    # independent sum: lambda_m = sum_k x_k w^{m k}, w = e^{2 pi i/n}
    n = len(x)
    return [sum(x[k] * complex(math.cos(2 * math.pi * m * k / n), math.sin(2 * math.pi * m * k / n))
                for k in range(n)) for m in range(n)]


@pytest.mark.parametrize("method", ["lapack", "native"])
def test_symmetric_examples(method):
    assert np.allclose(eig_symmetric(np.diag([3.0, 1.0, 2.0]), method).values, [1, 2, 3])
    v = eig_symmetric(build_from_draws("csym", [1, 2, 3]), method).values.real
    assert np.allclose(v, [-math.sqrt(3), math.sqrt(3), 6], atol=1e-12)
    assert np.allclose(eig_symmetric(np.array([[0.0, 1.0], [1.0, 0.0]]), method).values, [-1, 1])


def test_symmetric_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        eig_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize("method", ["lapack", "native"])
def test_general_examples(method):
    sp = eig_general(build_from_draws("c", [1, 2, 3]), method)
    assert _match(sp.values, [6, -1.5 + math.sqrt(3) / 2 * 1j, -1.5 - math.sqrt(3) / 2 * 1j]) < 1e-12
    assert np.allclose(eig_general(np.eye(5), method).values, 1)
    sp = eig_general(build_from_draws("c", [1, 2, 3, 4]), method)
    re = real_eigenvalues(sp)
    # sum of x and the alternating sum 1 - 2 + 3 - 4
    assert np.allclose(sorted(re), [-2, 10])


def test_dft_examples():
    assert _match(circulant_eigs_dft([1, 2, 3]).values, _dft_oracle([1, 2, 3])) < 1e-12
    v = circulant_eigs_dft([2.5] * 6).values
    assert np.isclose(v[0], 15) and np.allclose(v[1:], 0)
    assert np.allclose(circulant_eigs_dft([1, 0, 0, 0, 0]).values, 1)


@pytest.mark.parametrize("n", [3, 4, 8, 64])
@pytest.mark.parametrize("method", ["lapack", "native"])
def test_general_vs_dft(n, method):
    rng = seed_stream(100, n)
    x = rng.standard_normal(n)
    m = build_from_draws("c", x)
    sp = eig_general(m, method)
    scale = np.linalg.norm(m)
    assert _match(sp.values, circulant_eigs_dft(x).values) <= 1e-8 * scale
    assert _match(circulant_eigs_dft(x).values, _dft_oracle(x)) <= 1e-10 * scale
    assert _match(circulant_eigs_dft(x, "direct").values, circulant_eigs_dft(x).values) <= 1e-10 * scale


@pytest.mark.parametrize("method", ["lapack", "native"])
def test_symmetric_vs_general(method):
    spec = EnsembleSpec("rsym_direct", 8, N=50, seed=8)
    for i in range(50):
        m = build(spec, i)
        a = eig_symmetric(m, method).values.real
        b = np.sort(eig_general(m, method).values.real)
        assert np.abs(a - b).max() <= 1e-8 * np.linalg.norm(m)


def test_native_vs_lapack_general():
    spec = EnsembleSpec("r", 30, N=10, seed=9)
    for i in range(10):
        m = build(spec, i)
        assert _match(eig_general(m, "native").values, eig_general(m).values) <= 1e-8 * np.linalg.norm(m)


def test_conjugate_pairs_exact():
    spec = EnsembleSpec("r", 25, N=10, seed=10)
    for sp in ensemble_spectra(spec):
        cx = sp.values[sp.values.imag != 0]
        assert np.array_equal(np.sort_complex(cx), np.sort_complex(cx.conj()))


def test_two_by_two_closed_forms():
    assert np.allclose(eig_2x2("r1", 0.7, 0.0, 0.7).values, [0.7, 0.7])
    assert np.allclose(eig_2x2("r2", 0.0, 3.0, 4.0).values, [-5, 5])
    assert np.allclose(eig_2x2("r1", 1.0, 1.0, -1.0).values, [-math.sqrt(2), math.sqrt(2)])


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_two_by_two_spacing_formula(a, b, c):
    s1 = np.diff(eig_2x2("r1", a, b, c).values.real)[0]
    s2 = np.diff(eig_2x2("r2", a, b, c).values.real)[0]
    assert math.isclose(s1, math.sqrt(4 * b * b + (a - c) ** 2), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(s2, 2 * math.sqrt(b * b + c * c), rel_tol=1e-12, abs_tol=1e-12)
    dense = np.linalg.eigvalsh(build_from_draws("r1", [a, b, c]))
    assert np.allclose(dense, eig_2x2("r1", a, b, c).values.real, atol=1e-12)


FAMS = ["r", "rsym", "rsym_direct", "c", "csym", "t", "tsym", "tprime", "toeplitz", "q", "d", "s"]


@pytest.mark.parametrize("fam", FAMS)
def test_trace_identity_and_length(fam):
    spec = EnsembleSpec(fam, 12, N=20, seed=11, pdf=PdfSpec("uniform"))
    for i, (fast, slow) in enumerate(zip(ensemble_spectra(spec), ensemble_spectra(spec, fast=False))):
        m = build(spec, i)
        tr = np.trace(m)
        for sp in (fast, slow):
            assert len(sp) == 12
            assert abs(sp.values.sum().real - tr) <= 1e-8 * max(1.0, np.linalg.norm(m))
            assert abs(sp.values.sum().imag) <= 1e-8 * np.linalg.norm(m)
        # structured fast path and dense solver describe the same spectrum
        assert _match(fast.values, slow.values) <= 1e-8 * np.linalg.norm(m)


def test_reverse_circulant_against_dense():
    for n in (1, 2, 3, 6, 7, 32):
        x = seed_stream(12, n).standard_normal(n)
        m = build_from_draws("csym", x)
        assert np.allclose(reverse_circulant_eigs(x), np.linalg.eigvalsh(m), atol=1e-10 * np.linalg.norm(m))


@pytest.mark.parametrize("fam", ["tsym", "tprime"])
def test_tridiagonal_spectra_real(fam):
    spec = EnsembleSpec(fam, 40, N=100, seed=13)
    for i, sp in enumerate(ensemble_spectra(spec, fast=False)):
        assert np.abs(sp.values.imag).max() <= 1e-8 * sp.norm


def test_banded_native_matches_lapack():
    rng = seed_stream(14, 0)
    d, e = rng.standard_normal(200), rng.standard_normal(199)
    a = eig_tridiagonal(d, e).values.real
    b = eig_tridiagonal(d, e, "native").values.real
    assert np.abs(a - b).max() < 1e-11 * np.linalg.norm(d)


def test_symmetric_residuals():
    m = build(EnsembleSpec("rsym", 40, N=1, seed=15), 0)
    vals, vecs = np.linalg.eigh(m)
    ours = eig_symmetric(m, "native").values.real
    for lam, v in zip(ours, vecs.T):
        assert np.linalg.norm(m @ v - lam * v) <= 1e-10 * np.linalg.norm(m)


def test_sweep_budget_reported():
    rng = seed_stream(16, 0)
    d, e = rng.standard_normal(50), rng.standard_normal(49)
    with pytest.raises(ConvergenceError):
        tql_eigenvalues(d, e, max_sweeps=3)
    h = hessenberg_reduce(build(EnsembleSpec("r", 30, N=1, seed=16), 0))
    with pytest.raises(ConvergenceError):
        francis_eigenvalues(h, max_sweeps=3)


def test_circulant_real_count():
    for n in (9, 10):
        spec = EnsembleSpec("c", n, N=30, seed=17)
        for sp in ensemble_spectra(spec):
            assert real_eigenvalues(sp).size == (2 if n % 2 == 0 else 1)


def test_parallel_matches_serial():
    spec = EnsembleSpec("rsym", 20, N=40, seed=18)
    a = ensemble_spectra(spec)
    b = ensemble_spectra(spec, workers=4)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    c = ensemble_spectra(spec, indices=[39, 3])
    assert np.array_equal(c[0].values, a[39].values) and np.array_equal(c[1].values, a[3].values)
