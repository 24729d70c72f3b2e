"""Spacing samples and histograms from collections of spectra.

Spectra may be given as :class:`realrmt.eigen.Spectrum` objects or as plain
arrays (real or complex). Matrices that cannot contribute to a statistic are
skipped and counted in ``SpacingSample.skipped``; nothing is dropped silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Protocol",
    "Scaling",
    "DensityScaling",
    "SpacingSample",
    "DensitySample",
    "Histogram",
    "spacings_nlm",
    "spacings_nle",
    "spacings_complex",
    "fals",
    "density_sample",
    "histogram",
    "spacing_sample",
]


class Protocol(str, Enum):
    NLM = "nlm"
    NLE = "nle"
    COMPLEX = "complex"  # complex values ordered by real part, S = |E_{k+1} - E_k|
    RE = "re"
    IM = "im"
    MOD = "mod"
    UPPER = "upper"
    FALS_RR = "fals_rr"
    FALS_RC = "fals_rc"
    FALS_CC = "fals_cc"


class Scaling(str, Enum):
    PER_MATRIX = "per_matrix"
    PER_MATRIX_THEN_GLOBAL = "per_matrix_global"
    GLOBAL = "global"  # raw spacings divided by the pooled mean only


class DensityScaling(str, Enum):
    MEAN_POSITIVE = "mean_positive"
    MAX_ABS = "max_abs"


@dataclass
class SpacingSample:
    values: np.ndarray
    protocol: Protocol
    scaling: Scaling
    skipped: int = 0
    blocks: list = field(default_factory=list)  # per-matrix sample sizes

    def __len__(self):
        return self.values.size


@dataclass
class DensitySample:
    values: np.ndarray
    scaling: DensityScaling
    scale: float  # E-bar or E_max

    def __len__(self):
        return self.values.size


@dataclass
class Histogram:
    bin_edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    n_samples: int  # all values offered, including those outside the range
    n_outside: int = 0
    sample_mean: float | None = None  # mean of the raw values, when known

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def n_bins(self) -> int:
        return self.counts.size


def _vals(sp) -> np.ndarray:
    return np.asarray(getattr(sp, "values", sp))


def _real_vals(sp) -> np.ndarray:
    v = _vals(sp)
    if np.iscomplexobj(v):
        if np.any(v.imag != 0):
            raise ValueError("spectrum has complex values; use spacings_complex")
        v = v.real
    return np.asarray(v, dtype=float)


def _scale_blocks(diffs, scaling, drop_degenerate=False, tol=None):
    if scaling is Scaling.GLOBAL:
        return _scale_global(diffs, drop_degenerate, tol)
    out, blocks, skipped = [], [], 0
    for k, d in enumerate(diffs):
        if d.size < 1:
            skipped += 1
            continue
        m = d.mean()
        if not m > 0:
            skipped += 1
            continue
        s = d / m
        if drop_degenerate:
            s = s[d > tol[k]]
        out.append(s)
        blocks.append(s.size)
    values = np.concatenate(out) if out else np.empty(0)
    if scaling is Scaling.PER_MATRIX_THEN_GLOBAL and values.size:
        values = values / values.mean()
    return values, blocks, skipped


def _scale_global(diffs, drop_degenerate=False, tol=None):
    out, blocks, skipped = [], [], 0
    for k, d in enumerate(diffs):
        if d.size < 1:
            skipped += 1
            continue
        if drop_degenerate:
            d = d[d > tol[k]]
        out.append(d)
        blocks.append(d.size)
    values = np.concatenate(out) if out else np.empty(0)
    if values.size:
        m = values.mean()
        if not m > 0:
            raise ValueError("all spacings are zero")
        values = values / m
    return values, blocks, skipped


def spacings_nlm(
    spectra,
    scaling: Scaling | str = Scaling.PER_MATRIX,
    drop_degenerate: bool = False,
    degenerate_rtol: float = 1e-9,
) -> SpacingSample:
    """Nearest levels of each matrix, scaled to unit mean per matrix.

    ``scaling="per_matrix_global"`` rescales the pooled result to unit mean
    once more; ``scaling="global"`` skips the per-matrix step and divides
    the pooled raw spacings by their mean (the natural choice for 2x2
    ensembles, where each matrix has a single spacing). With ``drop_degenerate`` the (numerically) zero spacings of exactly
    degenerate levels are removed after scaling; the per-matrix mean still
    includes them.
    """
    scaling = Scaling(scaling)
    diffs, tols = [], []
    for sp in spectra:
        v = np.sort(_real_vals(sp))
        diffs.append(np.diff(v))
        tols.append(degenerate_rtol * (np.abs(v).max() if v.size else 0.0))
    values, blocks, skipped = _scale_blocks(diffs, scaling, drop_degenerate, tols)
    return SpacingSample(values, Protocol.NLM, scaling, skipped, blocks)


def spacings_nle(spectra) -> SpacingSample:
    """Pool every eigenvalue of the ensemble, then take nearest-level spacings."""
    pooled = np.sort(np.concatenate([_real_vals(sp).ravel() for sp in spectra]))
    if pooled.size < 2:
        raise ValueError("need at least two pooled eigenvalues")
    d = np.diff(pooled)
    return SpacingSample(d / d.mean(), Protocol.NLE, Scaling.PER_MATRIX_THEN_GLOBAL, 0, [d.size])


def _dedup(v: np.ndarray, rtol: float) -> np.ndarray:
    v = np.sort(v)
    if v.size < 2:
        return v
    scale = max(np.abs(v).max(), np.finfo(float).tiny)
    keep = np.ones(v.size, dtype=bool)
    keep[1:] = np.diff(v) > rtol * scale
    return v[keep]


def spacings_complex(
    spectra,
    mode: Protocol | str,
    pairs: str = "keep",
    scaling: Scaling | str = Scaling.PER_MATRIX,
    dedup_rtol: float = 1e-9,
) -> SpacingSample:
    """Spacing statistics for spectra with complex eigenvalues.

    ``mode`` is one of ``complex``, ``re``, ``im``, ``mod``, ``upper``.

    For ``re``/``im``/``mod`` the named real quantity is taken for every
    eigenvalue and passed through the per-matrix pipeline.  With
    ``pairs="keep"`` (default) both members of a conjugate pair contribute and
    the resulting exact-zero spacings are removed after per-matrix scaling.
    With ``pairs="dedup"`` values equal within ``dedup_rtol`` are collapsed
    before differencing and ``im`` uses Im > 0 values only.
    """
    mode = Protocol(mode)
    scaling = Scaling(scaling)
    if pairs not in ("keep", "dedup"):
        raise ValueError("pairs must be 'keep' or 'dedup'")
    if mode not in (Protocol.COMPLEX, Protocol.RE, Protocol.IM, Protocol.MOD, Protocol.UPPER):
        raise ValueError(f"{mode.value} is not a complex-spectrum protocol")
    vals = [np.asarray(_vals(sp), dtype=complex) for sp in spectra]
    if not any(np.any(v.imag != 0) for v in vals):
        raise ValueError("no complex eigenvalues present")

    diffs = []
    drop_zero = mode is Protocol.COMPLEX or pairs == "keep"
    for v in vals:
        if mode is Protocol.COMPLEX or mode is Protocol.UPPER:
            if mode is Protocol.UPPER:
                v = v[v.imag > 0]
            v = v[np.lexsort((v.imag, v.real))]
            diffs.append(np.abs(np.diff(v)))
            continue
        if mode is Protocol.RE:
            x = v.real
        elif mode is Protocol.MOD:
            x = np.abs(v)
        else:
            x = v.imag[v.imag > 0] if pairs == "dedup" else v.imag
        x = _dedup(x, dedup_rtol) if pairs == "dedup" else np.sort(x)
        diffs.append(np.diff(x))

    if scaling is Scaling.GLOBAL:
        if drop_zero:
            diffs = [d[d != 0] for d in diffs]
        values, blocks, skipped = _scale_global(diffs)
        return SpacingSample(values, mode, scaling, skipped, blocks)
    out, blocks, skipped = [], [], 0
    for d in diffs:
        if d.size < 1 or not d.mean() > 0:
            skipped += 1
            continue
        s = d / d.mean()
        if drop_zero:
            s = s[s != 0]
        out.append(s)
        blocks.append(s.size)
    values = np.concatenate(out) if out else np.empty(0)
    if scaling is Scaling.PER_MATRIX_THEN_GLOBAL and values.size:
        values = values / values.mean()
    return SpacingSample(values, mode, scaling, skipped, blocks)


def _split_real(v: np.ndarray, norm, rtol=1e-8):
    v = np.asarray(v, dtype=complex)
    scale = norm if norm else max(1.0, float(np.abs(v).max()) if v.size else 1.0)
    is_real = np.abs(v.imag) <= rtol * scale
    reals = np.sort(v.real[is_real])
    upper = v[~is_real & (v.imag > 0)]
    upper = upper[np.lexsort((upper.imag, upper.real))]
    return reals, upper


def fals(spectra, kind: str) -> SpacingSample:
    """First adjacent level spacing: one value per matrix, pooled, unit mean.

    ``kind``: ``real-real`` (two lowest real eigenvalues), ``real-complex``
    (lowest real eigenvalue to the upper-half-plane eigenvalue with the
    smallest real part) or ``complex-complex`` (the two upper-half-plane
    eigenvalues with the smallest real parts).
    """
    kind = kind.replace("_", "-")
    aliases = {"rr": "real-real", "rc": "real-complex", "cc": "complex-complex"}
    kind = aliases.get(kind, kind)
    proto = {"real-real": Protocol.FALS_RR, "real-complex": Protocol.FALS_RC,
             "complex-complex": Protocol.FALS_CC}
    if kind not in proto:
        raise ValueError(f"unknown FALS kind {kind!r}")
    out, skipped = [], 0
    for sp in spectra:
        reals, upper = _split_real(_vals(sp), getattr(sp, "norm", None))
        if kind == "real-real" and reals.size >= 2:
            out.append(reals[1] - reals[0])
        elif kind == "real-complex" and reals.size >= 1 and upper.size >= 1:
            out.append(abs(reals[0] - upper[0]))
        elif kind == "complex-complex" and upper.size >= 2:
            out.append(abs(upper[1] - upper[0]))
        else:
            skipped += 1
    values = np.asarray(out, dtype=float)
    if values.size == 0:
        raise ValueError(f"no matrix has a {kind} pair")
    if not values.mean() > 0:
        raise ValueError("all FALS spacings are zero")
    values = values / values.mean()
    return SpacingSample(values, proto[kind], Scaling.PER_MATRIX_THEN_GLOBAL, skipped, [1] * values.size)


def density_sample(spectra, scaling: DensityScaling | str = DensityScaling.MEAN_POSITIVE,
                   real_only: bool = False) -> DensitySample:
    """Pooled eigenvalues scaled by E-bar (mean of positives) or by max |E|.

    ``real_only`` keeps just the exactly-real eigenvalues of complex spectra.
    """
    scaling = DensityScaling(scaling)
    parts = []
    for sp in spectra:
        v = _vals(sp)
        if real_only and np.iscomplexobj(v):
            v = v.real[v.imag == 0]
        parts.append(_real_vals(v).ravel())
    e = np.concatenate(parts) if parts else np.empty(0)
    if e.size == 0:
        raise ValueError("no eigenvalues")
    if scaling is DensityScaling.MEAN_POSITIVE:
        pos = e[e > 0]
        if pos.size == 0:
            raise ValueError("no positive eigenvalues to set the scale")
        scale = float(pos.mean())
    else:
        scale = float(np.abs(e).max())
        if scale == 0:
            raise ValueError("all eigenvalues are zero")
    return DensitySample(e / scale, scaling, scale)


def histogram(sample, bins: int = 50, range: tuple | None = None) -> Histogram:
    """Equal-width histogram normalized by the full sample size.

    Default range: ``[0, max]`` for nonnegative samples and ``[-r, r]`` with
    ``r = max |x|`` for density samples. Values outside an explicit range are
    counted in ``n_outside`` and still enter the normalization, so the
    density integrates to the in-range fraction.
    """
    x = np.asarray(getattr(sample, "values", sample), dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    if int(bins) < 1:
        raise ValueError("bins must be >= 1")
    if range is None:
        if isinstance(sample, DensitySample) or x.min() < 0:
            r = float(np.abs(x).max()) or 1.0
            range = (-r, r)
        else:
            hi = float(x.max())
            range = (0.0, hi if hi > 0 else 1.0)
    counts, edges = np.histogram(x, bins=int(bins), range=range)
    density = counts / (x.size * np.diff(edges))
    return Histogram(edges, density, counts, int(x.size), int(x.size - counts.sum()), float(x.mean()))


def spacing_sample(spectra, protocol: Protocol | str, scaling=Scaling.PER_MATRIX, **kw) -> SpacingSample:
    """Dispatch on a protocol token."""
    protocol = Protocol(protocol)
    if protocol is Protocol.NLM:
        return spacings_nlm(spectra, scaling, **kw)
    if protocol is Protocol.NLE:
        return spacings_nle(spectra)
    if protocol in (Protocol.FALS_RR, Protocol.FALS_RC, Protocol.FALS_CC):
        return fals(spectra, protocol.value[-2:])
    return spacings_complex(spectra, protocol, scaling=scaling, **kw)
