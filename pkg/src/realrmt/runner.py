"""Experiment pipeline: ensemble -> spectra -> statistic -> histogram -> fits.

:func:`run_experiment` does the numerical work and returns an
:class:`ExperimentResult`; :func:`write_outputs` turns it into files.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import models
from .eigen import ensemble_spectra
from .fitting import FitResult, fit, get_model, goodness
from .matrices import EnsembleSpec, MatrixFamily, SYMMETRIC_FAMILIES
from .sampler import PdfFamily, PdfSpec
from .spacing import (
    DensityScaling,
    Protocol,
    Scaling,
    density_sample,
    histogram,
    spacing_sample,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "run_experiment",
    "write_outputs",
    "reference_curve",
    "REFERENCE_CURVES",
    "histogram_csv",
]

DENSITY = "density"
GENERAL_N_CAP = 200
_COMPLEX_STATS = {"complex", "re", "im", "mod", "upper", "fals_rr", "fals_rc", "fals_cc"}
_POSITIVE_FAMILIES = {MatrixFamily.Q, MatrixFamily.D, MatrixFamily.S}


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: str
    n: int = 100
    N: int = 1000
    pdf: str = "gaussian"
    scale: float = 1.0
    seed: int = 0
    stat: str = "nlm"
    bins: int | None = None
    range: tuple | None = None
    scaling: str | None = None
    fit: tuple = ()
    reference: str | None = None
    pairs: str = "keep"
    drop_degenerate: bool = False
    real_only: bool = False
    fast: bool = True
    method: str = "lapack"
    workers: int = 1
    allow_large: bool = False

    def __post_init__(self):
        if self.range is not None:
            object.__setattr__(self, "range", tuple(float(v) for v in self.range))
        if isinstance(self.fit, str):
            object.__setattr__(self, "fit", tuple(m for m in self.fit.split(",") if m))
        else:
            object.__setattr__(self, "fit", tuple(self.fit))

    # resolved defaults -------------------------------------------------------
    @property
    def is_density(self) -> bool:
        return self.stat == DENSITY

    @property
    def resolved_scaling(self) -> str:
        if self.scaling:
            return self.scaling
        if self.is_density:
            return DensityScaling.MEAN_POSITIVE.value
        if MatrixFamily(self.ensemble) in (MatrixFamily.R1, MatrixFamily.R2):
            return Scaling.GLOBAL.value
        return Scaling.PER_MATRIX.value

    @property
    def resolved_bins(self) -> int:
        if self.bins:
            return int(self.bins)
        return 60 if self.is_density else 50

    @property
    def resolved_range(self) -> tuple:
        if self.range is not None:
            return self.range
        if not self.is_density:
            return (0.0, 4.0)
        if self.resolved_scaling == DensityScaling.MAX_ABS.value:
            return (0.0, 1.0) if MatrixFamily(self.ensemble) in _POSITIVE_FAMILIES else (-1.0, 1.0)
        return (-1.2, 1.2)

    def ensemble_spec(self) -> EnsembleSpec:
        return EnsembleSpec(self.ensemble, int(self.n), int(self.N), PdfSpec(self.pdf, self.scale), int(self.seed))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fit"] = list(self.fit)
        d["range"] = list(self.range) if self.range is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    def validate(self) -> None:
        try:
            fam = MatrixFamily(self.ensemble)
        except ValueError:
            raise ConfigError(f"unknown ensemble {self.ensemble!r}") from None
        try:
            PdfFamily(self.pdf)
        except ValueError:
            raise ConfigError(f"unknown pdf {self.pdf!r}") from None
        try:
            self.ensemble_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.stat != DENSITY:
            try:
                Protocol(self.stat)
            except ValueError:
                raise ConfigError(f"unknown statistic {self.stat!r}") from None
        if self.is_density:
            try:
                DensityScaling(self.resolved_scaling)
            except ValueError:
                raise ConfigError(f"density scaling must be mean_positive or max_abs") from None
        else:
            try:
                Scaling(self.resolved_scaling)
            except ValueError:
                raise ConfigError("spacing scaling must be per_matrix, per_matrix_global or global") from None
        if self.stat in _COMPLEX_STATS and fam in SYMMETRIC_FAMILIES:
            raise ConfigError(f"statistic {self.stat} needs a non-symmetric family, got {fam.value}")
        if self.pairs not in ("keep", "dedup"):
            raise ConfigError("pairs must be keep or dedup")
        if self.resolved_bins < 1:
            raise ConfigError("bins must be >= 1")
        lo, hi = self.resolved_range
        if not hi > lo:
            raise ConfigError("range must satisfy lo < hi")
        for m in self.fit:
            try:
                get_model(m)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.reference is not None:
            try:
                reference_curve(self.reference)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        dense_general = fam in (MatrixFamily.R, MatrixFamily.T) or (fam is MatrixFamily.C and not self.fast)
        if dense_general and self.n > GENERAL_N_CAP and not self.allow_large:
            raise ConfigError(
                f"non-symmetric dense solves are capped at n={GENERAL_N_CAP}; pass --allow-large to override"
            )
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


# --- reference curves ----------------------------------------------------------


def _clip_unit(f):
    def g(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 1, f(np.clip(x, -1, 1)), 0.0)

    return g


REFERENCE_CURVES = {
    "wigner": models.p_wigner,
    "poisson": lambda s: models.p_poisson(1.0, s),
    "half_gaussian": lambda s: models.p_half_gaussian(1 / math.pi, s),
    "semicircle": _clip_unit(models.semicircle),
    "bose_mitra": models.bose_mitra,
}


def reference_curve(name: str):
    """Named curve: a key of ``REFERENCE_CURVES``, ``p2x2:<r1|r2>:<pdf>`` or ``g2x2:<r1|r2>``."""
    if name in REFERENCE_CURVES:
        return REFERENCE_CURVES[name]
    parts = name.split(":")
    if parts[0] == "p2x2" and len(parts) == 3:
        return models.p2x2(parts[1], parts[2])
    if parts[0] == "g2x2" and len(parts) == 2:
        return models.g2x2(parts[1])
    raise ValueError(f"unknown reference curve {name!r}")


# --- running -------------------------------------------------------------------


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    hist: object
    values: np.ndarray
    fits: list = field(default_factory=list)
    reference: dict | None = None
    skipped: int = 0
    scale: float | None = None  # E-bar or E_max for density statistics
    n_spectra: int = 0
    seconds: float = 0.0

    def fit_for(self, model: str) -> FitResult:
        for f in self.fits:
            if f.model.lower() == model.lower():
                return f
        raise KeyError(model)


def compute_spectra(cfg: ExperimentConfig):
    return ensemble_spectra(cfg.ensemble_spec(), fast=cfg.fast, method=cfg.method, workers=cfg.workers)


def run_experiment(cfg: ExperimentConfig, spectra=None) -> ExperimentResult:
    """Run one configuration. ``spectra`` may be passed to reuse a computed ensemble."""
    cfg.validate()
    t0 = time.perf_counter()
    if spectra is None:
        spectra = compute_spectra(cfg)
    scale = None
    skipped = 0
    if cfg.is_density:
        ds = density_sample(spectra, cfg.resolved_scaling, real_only=cfg.real_only)
        values, scale = ds.values, ds.scale
    else:
        kw = {}
        if cfg.stat == "nlm" and cfg.drop_degenerate:
            kw["drop_degenerate"] = True
        if cfg.stat in ("re", "im", "mod"):
            kw["pairs"] = cfg.pairs
        sample = spacing_sample(spectra, cfg.stat, cfg.resolved_scaling, **kw)
        values, skipped = sample.values, sample.skipped
    hist = histogram(values, cfg.resolved_bins, cfg.resolved_range)
    fits = [fit(hist, m) for m in cfg.fit]
    ref = None
    if cfg.reference:
        ref = goodness(hist, reference_curve(cfg.reference))
        ref["name"] = cfg.reference
    return ExperimentResult(
        cfg, hist, values, fits, ref, skipped, scale, len(spectra), time.perf_counter() - t0
    )


# --- files ---------------------------------------------------------------------


def histogram_csv(hist) -> str:
    lines = ["bin_left,bin_right,density,count"]
    e = hist.bin_edges
    for k in range(hist.n_bins):
        lines.append(f"{e[k]:.12g},{e[k + 1]:.12g},{hist.density[k]:.12g},{int(hist.counts[k])}")
    return "\n".join(lines) + "\n"


def curve_csv(xs, ys, header="s,p") -> str:
    return header + "\n" + "".join(f"{x:.10g},{y:.10g}\n" for x, y in zip(xs, ys))


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_outputs(result: ExperimentResult, out_dir: str, extra_manifest: dict | None = None) -> list[str]:
    """Write histogram, fits, fitted curves and the manifest; returns file names."""
    cfg, hist = result.config, result.hist
    written = []
    _write(os.path.join(out_dir, "histogram.csv"), histogram_csv(hist))
    written.append("histogram.csv")
    fit_text = "\n".join(f.to_text() for f in result.fits)
    if result.reference:
        r = result.reference
        fit_text += (
            ("\n" if fit_text else "")
            + f"reference: {r['name']}\nsse: {r['sse']:.12g}\nsup_norm: {r['sup_norm']:.12g}\nchi2: {r['chi2']:.12g}\n"
        )
    _write(os.path.join(out_dir, "fit.txt"), fit_text)
    written.append("fit.txt")
    lo, hi = hist.bin_edges[0], hist.bin_edges[-1]
    xs = np.linspace(lo, hi, 401)
    for f in result.fits:
        m = get_model(f.model)
        name = f"curve_{m.name}.csv"
        _write(os.path.join(out_dir, name), curve_csv(xs, m(xs, f.params)))
        written.append(name)
    if cfg.reference:
        curve = reference_curve(cfg.reference)
        name = "curve_reference.csv"
        _write(os.path.join(out_dir, name), curve_csv(xs, np.asarray(curve(xs), dtype=float)))
        written.append(name)
    manifest = {
        "command": "run",
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "resolved": {
            "scaling": cfg.resolved_scaling,
            "bins": cfg.resolved_bins,
            "range": list(cfg.resolved_range),
        },
        "skipped_matrices": int(result.skipped),
        "n_spectra": result.n_spectra,
        "n_values": int(result.values.size),
        "n_outside_range": int(hist.n_outside),
        "scale": result.scale,
        "wall_time_s": round(result.seconds, 3),
        "status": "ok",
        "outputs": written,
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    _write(os.path.join(out_dir, "manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return written + ["manifest.json"]
