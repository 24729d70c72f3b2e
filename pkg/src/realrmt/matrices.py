"""Matrix families built from iid element draws.

All index arithmetic is 0-based. For a draw vector ``x`` the circulant ``C``
has row ``i`` equal to ``x`` cyclically shifted right by ``i``
(``C[i, j] = x[(j - i) % n]``) and the symmetric cyclic matrix has
``Csym[i, j] = x[(i + j) % n]``; for n = 3 these reproduce the familiar
displayed layouts ``(1 2 3 / 3 1 2 / 2 3 1)`` and ``(1 2 3 / 2 3 1 / 3 1 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .sampler import PdfSpec, make_pdf
from .seeding import seed_stream

__all__ = [
    "MatrixFamily",
    "EnsembleSpec",
    "element_count",
    "draw_elements",
    "assemble",
    "build",
    "build_from_draws",
    "symmetrize_check",
    "eta_matrix",
    "pseudo_symmetry_check",
    "tprime_reality_precheck",
    "SYMMETRIC_FAMILIES",
    "TRIDIAGONAL_FAMILIES",
]


class MatrixFamily(str, Enum):
    R = "r"
    RSYM = "rsym"  # R + R^t
    RSYM_DIRECT = "rsym_direct"  # independent upper triangle, mirrored
    R1 = "r1"  # (a b; b c)
    R2 = "r2"  # (a+b c; c a-b)
    C = "c"  # circulant
    CSYM = "csym"  # symmetric cyclic (persymmetric)
    T = "t"  # tridiagonal
    TSYM = "tsym"
    TPRIME = "tprime"  # tridiagonal with y_k z_k > 0
    TOEPLITZ = "toeplitz"  # symmetric Toeplitz
    Q = "q"  # R R^t
    D = "d"  # C C^t
    S = "s"  # T T^t


SYMMETRIC_FAMILIES = frozenset(
    {
        MatrixFamily.RSYM,
        MatrixFamily.RSYM_DIRECT,
        MatrixFamily.R1,
        MatrixFamily.R2,
        MatrixFamily.CSYM,
        MatrixFamily.TSYM,
        MatrixFamily.TOEPLITZ,
        MatrixFamily.Q,
        MatrixFamily.D,
        MatrixFamily.S,
    }
)
TRIDIAGONAL_FAMILIES = frozenset({MatrixFamily.T, MatrixFamily.TSYM, MatrixFamily.TPRIME})
_TWO_BY_TWO = frozenset({MatrixFamily.R1, MatrixFamily.R2})


@dataclass(frozen=True)
class EnsembleSpec:
    """Which matrices to generate: family, order ``n``, replica count ``N``."""

    family: MatrixFamily
    n: int
    N: int = 1000
    pdf: PdfSpec = field(default_factory=lambda: PdfSpec("gaussian"))
    seed: int = 0

    def __post_init__(self):
        try:
            fam = MatrixFamily(self.family)
        except ValueError:
            raise ValueError(f"unknown matrix family {self.family!r}") from None
        object.__setattr__(self, "family", fam)
        if isinstance(self.pdf, str):
            object.__setattr__(self, "pdf", PdfSpec(self.pdf))
        if int(self.n) < 1 or int(self.N) < 1:
            raise ValueError("n and N must be >= 1")
        if fam in _TWO_BY_TWO and self.n != 2:
            raise ValueError(f"family {fam.value} is 2x2 only, got n={self.n}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


def element_count(family: MatrixFamily | str, n: int) -> int:
    """Number of iid draws behind one matrix (for products: the elementary factor)."""
    family = MatrixFamily(family)
    if family in (MatrixFamily.R, MatrixFamily.RSYM, MatrixFamily.Q):
        return n * n
    if family is MatrixFamily.RSYM_DIRECT:
        return n * (n + 1) // 2
    if family in _TWO_BY_TWO:
        return 3
    if family in (MatrixFamily.C, MatrixFamily.CSYM, MatrixFamily.TOEPLITZ, MatrixFamily.D):
        return n
    if family is MatrixFamily.TSYM:
        return 2 * n - 1
    return 3 * n - 2  # T, T', S


def _split(family: MatrixFamily, n: int, flat: np.ndarray) -> dict:
    if family in (MatrixFamily.R, MatrixFamily.RSYM, MatrixFamily.Q):
        return {"r": flat.reshape(n, n)}
    if family is MatrixFamily.RSYM_DIRECT:
        return {"upper": flat}
    if family in _TWO_BY_TWO:
        return {"abc": flat}
    if family in (MatrixFamily.C, MatrixFamily.CSYM, MatrixFamily.TOEPLITZ, MatrixFamily.D):
        return {"x": flat}
    if family is MatrixFamily.TSYM:
        return {"x": flat[:n], "y": flat[n:]}
    return {"x": flat[:n], "y": flat[n : 2 * n - 1], "z": flat[2 * n - 1 :]}


def _fix_tprime(el: dict, pdf, rng) -> dict:
    y = el["y"].copy()
    zero = y == 0
    while zero.any():
        y[zero] = pdf.sample(rng, int(zero.sum()))
        zero = y == 0
    z = np.copysign(np.abs(el["z"]), y)
    return {"x": el["x"], "y": y, "z": z}


def draw_elements(spec: EnsembleSpec, rng: np.random.Generator) -> dict:
    """Draw the raw iid elements of one matrix from ``rng``."""
    pdf = make_pdf(spec.pdf)
    flat = pdf.sample(rng, element_count(spec.family, spec.n))
    el = _split(spec.family, spec.n, flat)
    if spec.family is MatrixFamily.TPRIME:
        el = _fix_tprime(el, pdf, rng)
    return el


def _circulant(x):
    n = x.size
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return x[idx]


def _tridiag(x, y, z):
    n = x.size
    m = np.diag(x)
    if n > 1:
        i = np.arange(n - 1)
        m[i, i + 1] = y
        m[i + 1, i] = z
    return m


def assemble(family: MatrixFamily | str, n: int, el: dict) -> np.ndarray:
    """Dense matrix from raw elements (see :func:`draw_elements`)."""
    family = MatrixFamily(family)
    if family is MatrixFamily.R:
        return el["r"].copy()
    if family is MatrixFamily.RSYM:
        return el["r"] + el["r"].T
    if family is MatrixFamily.Q:
        return el["r"] @ el["r"].T
    if family is MatrixFamily.RSYM_DIRECT:
        m = np.zeros((n, n))
        iu = np.triu_indices(n)
        m[iu] = el["upper"]
        m.T[iu] = el["upper"]
        return m
    if family is MatrixFamily.R1:
        a, b, c = el["abc"]
        return np.array([[a, b], [b, c]])
    if family is MatrixFamily.R2:
        a, b, c = el["abc"]
        return np.array([[a + b, c], [c, a - b]])
    if family is MatrixFamily.C:
        return _circulant(el["x"])
    if family is MatrixFamily.D:
        c = _circulant(el["x"])
        return c @ c.T
    if family is MatrixFamily.CSYM:
        x = el["x"]
        return x[(np.arange(n)[:, None] + np.arange(n)[None, :]) % n]
    if family is MatrixFamily.TOEPLITZ:
        x = el["x"]
        return x[np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])]
    if family is MatrixFamily.TSYM:
        return _tridiag(el["x"], el["y"], el["y"])
    t = _tridiag(el["x"], el["y"], el["z"])
    return t @ t.T if family is MatrixFamily.S else t


def build(spec: EnsembleSpec, index: int) -> np.ndarray:
    """Replica ``index`` of the ensemble; pure function of ``(spec, index)``."""
    if not 0 <= index < spec.N:
        raise IndexError(f"replica {index} outside [0, {spec.N})")
    el = draw_elements(spec, seed_stream(spec.seed, index))
    return assemble(spec.family, spec.n, el)


def build_from_draws(family: MatrixFamily | str, draws, n: int | None = None) -> np.ndarray:
    """Assemble a matrix from explicit draws given in canonical order.

    The canonical order is: row-major ``R`` for R-type families, the upper
    triangle row by row for ``rsym_direct``, ``(a, b, c)`` for the 2x2
    families, ``x`` for cyclic/Toeplitz families and ``x, y, z`` (diagonal,
    super, sub) for tridiagonal ones.
    """
    family = MatrixFamily(family)
    flat = np.asarray(draws, dtype=float).ravel()
    if n is None:
        n = _infer_order(family, flat.size)
    if flat.size != element_count(family, n):
        raise ValueError(f"{family.value} of order {n} needs {element_count(family, n)} draws")
    el = _split(family, n, flat)
    if family is MatrixFamily.TPRIME and np.any(el["y"] * el["z"] <= 0):
        raise ValueError("tprime draws need y_k * z_k > 0")
    return assemble(family, n, el)


def _infer_order(family: MatrixFamily, size: int) -> int:
    for n in range(1, size + 2):
        if element_count(family, n) == size:
            return n
    raise ValueError(f"no order of {family.value} uses {size} draws")


def symmetrize_check(m: np.ndarray) -> bool:
    """Exact (bitwise) symmetry."""
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.array_equal(m, m.T))


def eta_matrix(n: int) -> np.ndarray:
    """Cyclic-reversal involution: ``eta[i, j] = 1`` iff ``(i + j) % n == 0``."""
    i = np.arange(n)
    eta = np.zeros((n, n))
    eta[i, (-i) % n] = 1.0
    return eta


def pseudo_symmetry_check(c: np.ndarray) -> bool:
    """``eta C eta^-1 == C^t`` exactly, with eta from :func:`eta_matrix`."""
    c = np.asarray(c, dtype=float)
    p = (-np.arange(c.shape[0])) % c.shape[0]
    # eta is a permutation, so conjugation is a pure re-indexing
    return bool(np.array_equal(c[np.ix_(p, p)], c.T))


def tprime_reality_precheck(t: np.ndarray) -> bool:
    """True iff every off-diagonal pair satisfies ``t[k, k+1] * t[k+1, k] > 0``."""
    t = np.asarray(t)
    k = np.arange(t.shape[0] - 1)
    return bool(np.all(t[k, k + 1] * t[k + 1, k] > 0))
