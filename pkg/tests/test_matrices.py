import numpy as np
import pytest
from hypothesis import given, strategies as st

from realrmt.eigen import eig_symmetric, ensemble_spectra
from realrmt.matrices import (
    EnsembleSpec,
    MatrixFamily,
    build,
    build_from_draws,
    element_count,
    eta_matrix,
    pseudo_symmetry_check,
    symmetrize_check,
    tprime_reality_precheck,
)
from realrmt.sampler import PdfSpec

FAMILIES = [f.value for f in MatrixFamily]


def test_circulant_layout():
    c = build_from_draws("c", [1, 2, 3])
    assert np.array_equal(c, [[1, 2, 3], [3, 1, 2], [2, 3, 1]])


def test_symmetric_cyclic_layout():
    c = build_from_draws("csym", [1, 2, 3])
    assert np.array_equal(c, [[1, 2, 3], [2, 3, 1], [3, 1, 2]])


def test_order_one_circulant():
    assert np.array_equal(build_from_draws("c", [4.5]), [[4.5]])


def test_element_counts():
    n = 7
    expected = {"r": n * n, "rsym_direct": n * (n + 1) // 2, "c": n, "csym": n, "toeplitz": n,
                "t": 3 * n - 2, "tprime": 3 * n - 2, "tsym": 2 * n - 1}
    for fam, k in expected.items():
        assert element_count(fam, n) == k


def test_two_by_two_order_enforced():
    with pytest.raises(ValueError):
        EnsembleSpec("r1", 3)
    with pytest.raises(ValueError):
        EnsembleSpec("bogus", 3)
    with pytest.raises(IndexError):
        build(EnsembleSpec("r", 3, N=2), 2)


def test_two_by_two_layouts():
    assert np.array_equal(build_from_draws("r1", [1, 2, 3]), [[1, 2], [2, 3]])
    assert np.array_equal(build_from_draws("r2", [1, 2, 3]), [[3, 3], [3, -1]])


@pytest.mark.parametrize("fam", ["rsym", "rsym_direct", "csym", "tsym", "toeplitz", "q", "d", "s", "r1", "r2"])
def test_symmetric_families_bitwise(fam):
    n = 2 if fam in ("r1", "r2") else 9
    spec = EnsembleSpec(fam, n, N=5, seed=3)
    assert all(symmetrize_check(build(spec, i)) for i in range(5))


def test_tprime_not_symmetric():
    spec = EnsembleSpec("tprime", 10, N=3, seed=1)
    assert not any(symmetrize_check(build(spec, i)) for i in range(3))


def test_eta_pseudo_symmetry():
    c = build_from_draws("c", [1, 2, 3])
    eta = eta_matrix(3)
    assert np.array_equal(eta @ c @ np.linalg.inv(eta), c.T)
    assert pseudo_symmetry_check(c)
    assert pseudo_symmetry_check(build_from_draws("c", [0.3, -1.1]))
    assert not pseudo_symmetry_check(build(EnsembleSpec("r", 5, N=1, seed=2), 0))


@given(st.integers(1, 12), st.integers(0, 2**32))
def test_pseudo_symmetry_any_circulant(n, seed):
    c = build(EnsembleSpec("c", n, N=1, seed=seed), 0)
    eta = eta_matrix(n)
    assert np.array_equal(eta @ eta, np.eye(n))
    assert np.array_equal(eta @ c @ eta, c.T)
    assert pseudo_symmetry_check(c)


def test_tprime_precheck():
    spec = EnsembleSpec("tprime", 12, N=20, seed=4)
    assert all(tprime_reality_precheck(build(spec, i)) for i in range(20))
    x = np.array([1.0, 2.0, 3.0])
    tsym = build_from_draws("tsym", np.concatenate([x, [0.0, 1.0]]))
    assert not tprime_reality_precheck(tsym)
    # sign counting on generic T: all products positive with probability 2^-(n-1)
    t = EnsembleSpec("t", 8, N=200, seed=5)
    hits = sum(tprime_reality_precheck(build(t, i)) for i in range(200))
    assert hits <= 10
    with pytest.raises(ValueError):
        build_from_draws("tprime", [1, 1, 1, 1, -1])


@given(st.sampled_from(["c", "d"]), st.integers(2, 10), st.integers(0, 2**32))
def test_cyclic_index_law(fam, n, seed):
    m = build(EnsembleSpec(fam, n, N=1, seed=seed), 0)
    shifted = np.roll(np.roll(m, 1, 0), 1, 1)
    if fam == "c":
        assert np.array_equal(m, shifted)
    else:  # C C^t is circulant up to rounding of the product
        assert np.allclose(m, shifted, rtol=0, atol=1e-12 * np.abs(m).max())


@given(st.integers(2, 10), st.integers(0, 2**32))
def test_toeplitz_depends_on_distance(n, seed):
    m = build(EnsembleSpec("toeplitz", n, N=1, seed=seed), 0)
    for i in range(n):
        for j in range(n):
            assert m[i, j] == m[0, abs(i - j)]


@pytest.mark.parametrize("fam", ["q", "d", "s"])
def test_products_positive_semidefinite(fam):
    spec = EnsembleSpec(fam, 20, N=10, seed=6, pdf=PdfSpec("uniform"))
    for i in range(10):
        m = build(spec, i)
        sp = eig_symmetric(m)
        assert sp.values.real.min() >= -1e-9 * sp.norm


def test_tprime_spectra_real():
    spec = EnsembleSpec("tprime", 30, N=100, seed=7)
    for sp in ensemble_spectra(spec, fast=False):
        assert np.abs(sp.values.imag).max() <= 1e-8 * sp.norm


@given(st.sampled_from(FAMILIES), st.integers(0, 2**64 - 1), st.integers(0, 50))
def test_rebuild_identical(fam, seed, index):
    n = 2 if fam in ("r1", "r2") else 6
    spec = EnsembleSpec(fam, n, N=51, seed=seed)
    assert np.array_equal(build(spec, index), build(spec, index))
