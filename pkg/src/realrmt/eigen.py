"""Eigenvalue solvers for real matrices.

Two independent routes are available for dense input:

* ``method="lapack"`` (default) hands the work to LAPACK through numpy/scipy;
* ``method="native"`` runs the textbook algorithms implemented here:
  Householder tridiagonalization followed by implicit-shift QL for symmetric
  input, and balancing, Householder reduction to Hessenberg form and the
  Francis double-shift QR iteration for general input.

The native route is slower (pure numpy) and mainly serves as a cross-check,
but it is a complete solver with an explicit iteration budget.

Circulants also have the closed-form DFT spectrum
(:func:`circulant_eigs_dft`), used as an oracle and as a fast path.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .matrices import (
    MatrixFamily,
    EnsembleSpec,
    SYMMETRIC_FAMILIES,
    assemble,
    draw_elements,
)
from .seeding import seed_stream

__all__ = [
    "Spectrum",
    "ConvergenceError",
    "eig_symmetric",
    "eig_general",
    "eig_tridiagonal",
    "circulant_eigs_dft",
    "eig_2x2",
    "eig_2x2_batch",
    "reverse_circulant_eigs",
    "real_eigenvalues",
    "ensemble_spectra",
    "householder_tridiagonalize",
    "tql_eigenvalues",
    "hessenberg_reduce",
    "balance",
    "francis_eigenvalues",
]

SNAP_RTOL = 1e-10  # |Im| below this times ||M||_F is treated as exactly real
REAL_RTOL = 1e-8  # classification threshold for "real" eigenvalues


class ConvergenceError(RuntimeError):
    """Raised when an iterative eigensolver exhausts its sweep budget."""


@dataclass
class Spectrum:
    values: np.ndarray  # complex, length n
    order: int
    family: MatrixFamily | None = None
    trace: float | None = None
    norm: float | None = None  # Frobenius norm of the source matrix

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    @property
    def real(self) -> np.ndarray:
        """Real parts, sorted ascending."""
        return np.sort(self.values.real)

    def __len__(self):
        return self.values.size


def _spectrum(values, m=None, family=None, trace=None, norm=None) -> Spectrum:
    values = np.asarray(values, dtype=complex)
    if m is not None:
        trace = float(np.trace(m))
        norm = float(np.linalg.norm(m))
    return Spectrum(values=values, order=values.size, family=family, trace=trace, norm=norm)


# --- symmetric -----------------------------------------------------------


def householder_tridiagonalize(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonally reduce a symmetric matrix to tridiagonal ``(diag, offdiag)``."""
    a = np.array(m, dtype=float, copy=True)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k]
        if not np.any(x[1:]):
            continue
        alpha = -math.copysign(np.linalg.norm(x), x[0])
        v = x.copy()
        v[0] -= alpha
        beta = 2.0 / (v @ v)
        a22 = a[k + 1 :, k + 1 :]
        p = beta * (a22 @ v)
        w = p - (0.5 * beta * (v @ p)) * v
        a22 -= np.outer(v, w) + np.outer(w, v)
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2 :, k] = 0.0
        a[k, k + 2 :] = 0.0
    return np.diag(a).copy(), np.diag(a, -1).copy()


def tql_eigenvalues(diag, offdiag, max_sweeps: int | None = None) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.

    ``max_sweeps`` bounds the total number of QL sweeps (default ``30 n``).
    """
    d = np.array(diag, dtype=float, copy=True)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = offdiag
    budget = 30 * n if max_sweeps is None else max_sweeps
    sweeps = 0
    eps = np.finfo(float).eps
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > budget:
                raise ConvergenceError(f"QL did not converge within {budget} sweeps")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(d)


def eig_tridiagonal(diag, offdiag, method: str = "lapack") -> Spectrum:
    """Banded path for symmetric tridiagonal matrices; no dense storage."""
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    if diag.size == 1:
        vals = diag.copy()
    elif method == "lapack":
        vals = scipy.linalg.eigvalsh_tridiagonal(diag, offdiag)
    elif method == "native":
        vals = tql_eigenvalues(diag, offdiag)
    else:
        raise ValueError(f"unknown method {method!r}")
    norm = math.sqrt(float(diag @ diag + 2 * offdiag @ offdiag))
    return _spectrum(vals, trace=float(diag.sum()), norm=norm)


def eig_symmetric(m: np.ndarray, method: str = "lapack", family=None) -> Spectrum:
    """All-real spectrum of an exactly symmetric matrix, sorted ascending."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix is not symmetric")
    if method == "lapack":
        vals = np.linalg.eigvalsh(m)
    elif method == "native":
        d, e = householder_tridiagonalize(m)
        vals = tql_eigenvalues(d, e)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _spectrum(vals, m, family=family)


# --- general -------------------------------------------------------------


def balance(m: np.ndarray) -> np.ndarray:
    """Diagonal similarity scaling (powers of two) to equalize row/column norms."""
    a = np.array(m, dtype=float, copy=True)
    n = a.shape[0]
    radix, sqrdx = 2.0, 4.0
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g, f, s = r / radix, 1.0, c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg_reduce(m: np.ndarray) -> np.ndarray:
    """Orthogonal (Householder) reduction to upper Hessenberg form."""
    a = np.array(m, dtype=float, copy=True)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k]
        if not np.any(x[1:]):
            continue
        alpha = -math.copysign(np.linalg.norm(x), x[0])
        v = x.copy()
        v[0] -= alpha
        beta = 2.0 / (v @ v)
        a[k + 1 :, k:] -= beta * np.outer(v, v @ a[k + 1 :, k:])
        a[:, k + 1 :] -= beta * np.outer(a[:, k + 1 :] @ v, v)
        a[k + 2 :, k] = 0.0
    return a


def francis_eigenvalues(h: np.ndarray, max_sweeps: int | None = None) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    Exceptional shifts are applied after 10 and 20 stagnant iterations on the
    same block; the total sweep count is bounded by ``30 n`` by default.
    """
    a = np.array(h, dtype=float, copy=True)
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = float(np.abs(np.triu(a, -1)).sum())
    budget = 30 * n if max_sweeps is None else max_sweeps
    sweeps = 0
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn], wi[nn] = x + t, 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1], wi[nn] = -z, z
                nn -= 2
                break
            sweeps += 1
            if sweeps > budget:
                raise ConvergenceError(f"QR did not converge within {budget} sweeps")
            if its in (10, 20):
                t += x
                a[np.arange(nn + 1), np.arange(nn + 1)] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                y = x = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while True:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p, q, r = p / s, q / s, r / s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p, q, r = p / x, q / x, r / x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x, y, z = p / s, q / s, r / s
                q /= p
                r /= p
                cols = slice(k, nn + 1)
                pr = a[k, cols] + q * a[k + 1, cols]
                if k != nn - 1:
                    pr += r * a[k + 2, cols]
                    a[k + 2, cols] -= pr * z
                a[k + 1, cols] -= pr * y
                a[k, cols] -= pr * x
                rows = slice(l, min(nn, k + 3) + 1)
                pc = x * a[rows, k] + y * a[rows, k + 1]
                if k != nn - 1:
                    pc += z * a[rows, k + 2]
                    a[rows, k + 2] -= pc * r
                a[rows, k + 1] -= pc * q
                a[rows, k] -= pc
    return wr + 1j * wi


def _pair_conjugates(vals: np.ndarray, scale: float) -> np.ndarray:
    """Snap near-real values to the real axis and make pairs exact conjugates."""
    vals = np.array(vals, dtype=complex)
    tiny = np.abs(vals.imag) <= SNAP_RTOL * scale
    vals.imag[tiny] = 0.0
    upper = np.flatnonzero(vals.imag > 0)
    lower = np.flatnonzero(vals.imag < 0)
    if upper.size != lower.size:
        raise ConvergenceError("eigenvalues do not come in conjugate pairs")
    if upper.size:
        up = upper[np.lexsort((vals[upper].imag, vals[upper].real))]
        lo = lower[np.lexsort((-vals[lower].imag, vals[lower].real))]
        mismatch = np.abs(vals[up] - np.conj(vals[lo]))
        if np.any(mismatch > 1e-6 * max(scale, 1.0)):
            raise ConvergenceError("conjugate pairing failed")
        mid = 0.5 * (vals[up] + np.conj(vals[lo]))
        vals[up] = mid
        vals[lo] = np.conj(mid)
    return vals


def eig_general(m: np.ndarray, method: str = "lapack", family=None) -> Spectrum:
    """Spectrum of a general real matrix; conjugate pairs are exact.

    Imaginary parts below ``1e-10 * ||M||_F`` are set to zero. The order of
    the returned values is unspecified.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if method == "lapack":
        vals = scipy.linalg.eigvals(m, check_finite=True)
    elif method == "native":
        vals = francis_eigenvalues(hessenberg_reduce(balance(m)))
    else:
        raise ValueError(f"unknown method {method!r}")
    norm = float(np.linalg.norm(m))
    return _spectrum(_pair_conjugates(vals, norm), m, family=family)


def circulant_eigs_dft(x, method: str = "fft") -> Spectrum:
    """Eigenvalues ``sum_k x_k w**(m k)``, ``w = exp(2 pi i / n)``, m = 0..n-1.

    Index ``m`` matches the circulant built by :mod:`realrmt.matrices`
    (row ``i`` is ``x`` shifted right by ``i``): the eigenvector for ``m`` is
    ``w**(m j)``. ``method="direct"`` evaluates the sum explicitly.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if method == "direct":
        k = np.arange(n)
        lam = np.exp(2j * np.pi * np.outer(k, k) / n) @ x
    elif method == "fft":
        half = np.conj(np.fft.rfft(x))
        lam = np.empty(n, dtype=complex)
        lam[: half.size] = half
        lam[half.size :] = np.conj(half[1 : n - half.size + 1][::-1])
    else:
        raise ValueError(f"unknown method {method!r}")
    lam[0] = lam[0].real
    if n % 2 == 0:
        lam[n // 2] = lam[n // 2].real
    # ||C||_F = sqrt(n) ||x||
    return _spectrum(lam, family=MatrixFamily.C, trace=n * float(x[0]), norm=math.sqrt(n) * float(np.linalg.norm(x)))


def reverse_circulant_eigs(x) -> np.ndarray:
    """Sorted spectrum of the symmetric cyclic matrix ``x[(i + j) % n]``.

    It is ``C J`` with ``C`` a circulant and ``J`` the index reversal
    ``k -> -k mod n``. ``J`` swaps the Fourier modes ``m`` and ``n - m``, so
    each such pair contributes ``+|lambda_m|`` and ``-|lambda_m|``; the
    self-paired modes give ``sum x`` and, for even ``n``, the alternating sum.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    lam = np.fft.rfft(x)
    mods = np.abs(lam[1 : (n + 1) // 2])
    vals = [np.array([x.sum()]), mods, -mods]
    if n % 2 == 0:
        vals.append(np.array([np.sum(x[0::2]) - np.sum(x[1::2])]))
    return np.sort(np.concatenate(vals))


def _csym_trace(x):
    n = x.size
    return x[(2 * np.arange(n)) % n].sum()


def eig_2x2(family, a, b, c) -> Spectrum:
    """Closed-form eigenvalues of the 2x2 families, ascending."""
    family = MatrixFamily(family)
    if family is MatrixFamily.R1:
        mid, half = 0.5 * (a + c), 0.5 * math.sqrt((a - c) ** 2 + 4 * b * b)
        trace = a + c
    elif family is MatrixFamily.R2:
        mid, half = a, math.hypot(b, c)
        trace = 2 * a
    else:
        raise ValueError("eig_2x2 handles r1 and r2 only")
    return _spectrum([mid - half, mid + half], family=family, trace=trace)


def eig_2x2_batch(family, abc: np.ndarray) -> np.ndarray:
    """Vectorized :func:`eig_2x2` for an ``(N, 3)`` array; returns ``(N, 2)``."""
    family = MatrixFamily(family)
    a, b, c = abc[:, 0], abc[:, 1], abc[:, 2]
    if family is MatrixFamily.R1:
        mid, half = 0.5 * (a + c), 0.5 * np.sqrt((a - c) ** 2 + 4 * b * b)
    else:
        mid, half = a, np.hypot(b, c)
    return np.stack([mid - half, mid + half], axis=1)


def real_eigenvalues(spec: Spectrum, rtol: float = REAL_RTOL) -> np.ndarray:
    """Eigenvalues whose imaginary part is below ``rtol * ||M||``, sorted."""
    scale = spec.norm if spec.norm else max(1.0, float(np.abs(spec.values).max()))
    keep = np.abs(spec.values.imag) <= rtol * scale
    return np.sort(spec.values.real[keep])


# --- ensembles -----------------------------------------------------------


def _fast_spectrum(spec: EnsembleSpec, el: dict, method: str):
    fam = spec.family
    if fam is MatrixFamily.TSYM:
        return eig_tridiagonal(el["x"], el["y"], method)
    if fam is MatrixFamily.TPRIME:
        # diagonal similarity turns T' into the symmetric tridiagonal with
        # off-diagonal sqrt(y_k z_k); the spectrum is unchanged
        sp = eig_tridiagonal(el["x"], np.sqrt(el["y"] * el["z"]), method)
        sp.norm = math.sqrt(float(el["x"] @ el["x"] + el["y"] @ el["y"] + el["z"] @ el["z"]))
        return sp
    if fam is MatrixFamily.C:
        return circulant_eigs_dft(el["x"])
    if fam is MatrixFamily.CSYM:
        return _spectrum(reverse_circulant_eigs(el["x"]), trace=float(_csym_trace(el["x"])))
    if fam is MatrixFamily.D:
        # C C^t = F |Lambda|^2 F*: eigenvalues are squared moduli of the DFT
        lam = circulant_eigs_dft(el["x"]).values
        vals = np.sort(np.abs(lam) ** 2)
        n = el["x"].size
        return _spectrum(vals, trace=float(vals.sum()), norm=None)
    return None


def _replica_spectrum(spec: EnsembleSpec, index: int, fast: bool, method: str) -> Spectrum:
    el = draw_elements(spec, seed_stream(spec.seed, index))
    if spec.family in (MatrixFamily.R1, MatrixFamily.R2):
        a, b, c = el["abc"]
        return eig_2x2(spec.family, a, b, c)
    if fast:
        sp = _fast_spectrum(spec, el, method)
        if sp is not None:
            sp.family = spec.family
            return sp
    m = assemble(spec.family, spec.n, el)
    if spec.family in SYMMETRIC_FAMILIES:
        return eig_symmetric(m, method, family=spec.family)
    return eig_general(m, method, family=spec.family)


def ensemble_spectra(
    spec: EnsembleSpec,
    *,
    fast: bool = True,
    method: str = "lapack",
    workers: int = 1,
    indices=None,
) -> list[Spectrum]:
    """Spectra of replicas ``0..N-1`` (or ``indices``), in replica order.

    ``fast`` enables structure-aware paths: banded solver for tridiagonal
    families, DFT for circulants (``c``, ``d``) and closed forms for 2x2.
    Results do not depend on ``workers``.
    """
    idx = list(range(spec.N)) if indices is None else list(indices)
    job = lambda i: _replica_spectrum(spec, i, fast, method)  # noqa: E731
    if workers <= 1:
        return [job(i) for i in idx]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, idx))
