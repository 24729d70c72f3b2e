"""Named presets that regenerate each table and figure of the study.

A recipe is a list of jobs. ``run`` jobs are :class:`ExperimentConfig`
instances; ``analytic2x2`` and ``g2x2`` jobs compare the exact 2x2 curves
with Monte Carlo ensembles. Targets are the published values the job is
meant to reproduce; they are reported next to the computed ones.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import models
from .eigen import ensemble_spectra
from .fitting import goodness
from .matrices import EnsembleSpec
from .runner import ExperimentConfig, compute_spectra, curve_csv, histogram_csv, run_experiment, write_outputs
from .sampler import PdfSpec
from .spacing import density_sample, histogram, spacings_nlm

__all__ = ["Job", "Recipe", "RECIPES", "run_job", "run_recipe", "analytic2x2", "g2x2_check", "DEFAULT_SEED"]

DEFAULT_SEED = 12345

PDF_TOKENS = {
    "G": "gaussian",
    "U": "uniform",
    "E": "exponential",
    "SG": "supergaussian",
    "T": "triangular",
    "P": "parabolic",
    "S": "semicircle",
    "H_G": "half_gaussian",
    "H_U": "half_uniform",
    "H_E": "half_exponential",
    "H_SG": "half_supergaussian",
    "H_T": "half_triangular",
    "P2": "p2",
    "P3": "p3",
}


@dataclass
class Job:
    label: str
    kind: str  # "run", "analytic2x2" or "g2x2"
    config: ExperimentConfig | None = None
    params: dict = field(default_factory=dict)  # for the 2x2 kinds
    targets: dict = field(default_factory=dict)  # {"PAB": {"A": 1.77, ...}, "alpha": 1.23, ...}

    @property
    def pdf(self) -> str:
        return self.config.pdf if self.config is not None else self.params.get("pdf", "gaussian")


@dataclass
class Recipe:
    name: str
    description: str
    jobs: list


def _run(label, ensemble, pdf, stat, fit=(), targets=None, **kw) -> Job:
    kw.setdefault("seed", DEFAULT_SEED)
    cfg = ExperimentConfig(ensemble=ensemble, pdf=pdf, stat=stat, fit=tuple(fit), **kw)
    return Job(label, "run", cfg, targets=targets or {})


# --- tables --------------------------------------------------------------------

_T1 = {  # pdf: (R A, R B, R' A, R' B)
    "G": (1.77, 0.93, 1.77, 0.93),
    "U": (1.77, 0.92, 1.76, 0.92),
    "E": (1.75, 0.93, 1.77, 0.93),
    "SG": (1.76, 0.92, 1.77, 0.92),
    "T": (1.76, 0.92, 1.78, 0.93),
    "P": (1.79, 0.93, 1.77, 0.92),
}
_T2 = {
    "H_G": (27.40, 14.41, 50.11, 26.23),
    "H_U": (43.99, 22.94, 81.50, 42.66),
    "H_E": (30.13, 15.89, 17.15, 9.09),
    "H_SG": (36.23, 18.94, 67.25, 35.16),
    "H_T": (56.51, 29.57, 30.62, 16.02),
    "P2": (9.72, 5.09, 5.96, 3.12),
    "P3": (27.16, 14.23, 15.30, 8.01),
}
_T3_COLS = [  # (label, family, statistic)
    ("rsym_direct-nle", "rsym_direct", "nle"),
    ("rsym-nle", "rsym", "nle"),
    ("q", "q", "nlm"),
    ("csym", "csym", "nlm"),
    ("tsym", "tsym", "nlm"),
    ("tprime", "tprime", "nlm"),
    ("toeplitz", "toeplitz", "nlm"),
]
_T3 = {
    "G": (1.14, 1.14, 1.19, 1.29, 1.12, 1.20, 1.35),
    "U": (1.14, 1.15, 1.17, 1.27, 0.99, 1.02, 1.34),
    "E": (1.17, 1.16, 1.24, 1.28, 1.11, 1.09, 1.32),
    "T": (1.14, 1.14, 1.18, 1.26, 1.05, 1.25, 1.35),
    "P": (1.15, 1.15, 1.18, 1.29, 1.04, 1.13, 1.34),
    "S": (1.13, 1.15, 1.17, 1.28, 1.01, 1.07, 1.35),
    "SG": (1.14, 1.15, 1.18, 1.27, 1.07, 1.06, 1.35),
}
_T4_COLS = [(fam, part) for fam in ("r", "c", "t") for part in ("re", "im", "mod")]
_T4 = {
    "G": (0.49, 0.89, 0.59, 0.65, 1.35, 0.63, 0.92, 0.60, 0.96),
    "U": (0.49, 0.89, 0.59, 0.65, 1.35, 0.63, 0.79, 0.58, 0.85),
    "E": (0.49, 0.89, 0.58, 0.65, 1.35, 0.63, 0.83, 0.62, 0.87),
    "T": (0.49, 0.90, 0.59, 0.63, 1.35, 0.63, 0.85, 0.58, 0.87),
    "P": (0.49, 0.90, 0.59, 0.64, 1.34, 0.63, 0.84, 0.58, 0.88),
    "S": (0.49, 0.89, 0.59, 0.65, 1.35, 0.62, 0.82, 0.59, 0.86),
    "SG": (0.49, 0.89, 0.59, 0.64, 1.35, 0.62, 0.83, 0.59, 0.87),
}


def _table_ab(name, table):
    jobs = []
    for row, (ra, rb, pa, pb) in table.items():
        pdf = PDF_TOKENS[row]
        jobs.append(_run(f"{name}/rsym/{pdf}", "rsym", pdf, "nlm", ["PAB"], {"PAB": {"A": ra, "B": rb}}))
        jobs.append(_run(f"{name}/rsym_direct/{pdf}", "rsym_direct", pdf, "nlm", ["PAB"], {"PAB": {"A": pa, "B": pb}}))
    return jobs


def _table3():
    jobs = []
    for row, vals in _T3.items():
        pdf = PDF_TOKENS[row]
        for (label, fam, stat), mu in zip(_T3_COLS, vals):
            jobs.append(_run(f"table3/{label}/{pdf}", fam, pdf, stat, ["Poisson"], {"Poisson": {"mu": mu}}))
    return jobs


def _table4():
    jobs = []
    for row, vals in _T4.items():
        pdf = PDF_TOKENS[row]
        for (fam, part), mu in zip(_T4_COLS, vals):
            jobs.append(_run(f"table4/{fam}-{part}/{pdf}", fam, pdf, part, ["Poisson"], {"Poisson": {"mu": mu}}))
    return jobs


# --- figures -------------------------------------------------------------------


def _fig2x2(name, pdf, alphas):
    return [
        Job(
            f"{name}/{fam}/{pdf}",
            "analytic2x2",
            params={"matrix": fam, "pdf": pdf, "mc": 100_000, "bins": 50, "grid": 400, "seed": DEFAULT_SEED},
            targets={"alpha": a},
        )
        for fam, a in zip(("r1", "r2"), alphas)
    ]


def _figures():
    figs = {}
    figs["fig1"] = ("2x2 spacing laws, uniform elements, with Monte Carlo overlay",
                    _fig2x2("fig1", "uniform", (1.23, (1.01, 1.09))))
    figs["fig2"] = ("2x2 spacing laws, exponential elements", _fig2x2("fig2", "exponential", (4.05, 2.91)))
    figs["fig3"] = ("2x2 spacing laws, super-Gaussian elements", _fig2x2("fig3", "supergaussian", (1.30, 0.91)))
    figs["fig4"] = (
        "eigenvalue density of 2x2 Gaussian matrices, eps = E / E-bar",
        [
            Job(f"fig4/{fam}", "g2x2",
                params={"matrix": fam, "mc": 80_000, "bins": 60, "range": (-4.0, 4.0), "seed": DEFAULT_SEED},
                targets={"E_bar": (4 + math.pi) / (4 * math.sqrt(math.pi))} if fam == "r2" else {})
            for fam in ("r1", "r2")
        ],
    )
    figs["fig5"] = (
        "R + R^t spacings for the parabolic law and its skewed variants",
        [
            _run("fig5/parabolic", "rsym", "parabolic", "nlm", ["PAB"], {"PAB": {"A": 1.79, "B": 0.92}}),
            _run("fig5/p2", "rsym", "p2", "nlm", ["PAB"], {"PAB": {"A": 9.72, "B": 5.09}}),
            _run("fig5/p3", "rsym", "p3", "nlm", ["PAB"], {"PAB": {"A": 27.25, "B": 14.23}}),
        ],
    )
    figs["fig6"] = (
        "real parts of tridiagonal eigenvalues, Poisson fit",
        [_run("fig6/t-re", "t", "gaussian", "re", ["Poisson"], {"Poisson": {"mu": 0.90}})],
    )
    figs["fig7"] = (
        "the two real eigenvalues of circulants: spacing (a) and density (b)",
        [
            _run("fig7/fals_rr", "c", "uniform", "fals_rr", ["HalfGaussian"], {"HalfGaussian": {"b": 1 / math.pi}},
                 n=1000, N=5000, bins=16, range=(0.0, 4.0), reference="half_gaussian"),
            _run("fig7/real-density", "c", "uniform", "density", ["Gaussian"], {"Gaussian": {"a": 1.68, "b": 8.72}},
                 n=1000, N=5000, scaling="max_abs", real_only=True, range=(-1.0, 1.0)),
        ],
    )
    figs["fig8"] = (
        "sub-exponential spacing laws of C C^t and T T^t",
        [
            _run("fig8/s/uniform", "s", "uniform", "nlm", ["SubExp"], {"SubExp": {"a": 4.6, "b": 0.3}},
                 drop_degenerate=True),
            _run("fig8/s/gaussian", "s", "gaussian", "nlm", ["SubExp"], {"SubExp": {"a": 4.6, "b": 0.3}},
                 drop_degenerate=True),
            _run("fig8/d/gaussian", "d", "gaussian", "nlm", ["SubExp"], {"SubExp": {"a": 2.0, "b": 0.5}},
                 drop_degenerate=True),
        ],
    )
    figs["fig9"] = (
        "complex eigenvalues ordered by real part, S = |E_{k+1} - E_k|",
        [
            _run("fig9/c", "c", "uniform", "complex", ["ShiftedGaussianLinear"],
                 {"ShiftedGaussianLinear": {"a": 1.18, "c": 0.28, "d": 0.39, "w": 2.0}}, reference="wigner"),
            _run("fig9/t", "t", "uniform", "complex", ["ShiftedGaussianLinear"],
                 {"ShiftedGaussianLinear": {"a": 0.08, "c": 7.8, "d": 0.68, "w": 0.82}}, reference="wigner"),
            _run("fig9/r", "r", "uniform", "complex", ["PowerStretched"], {}, reference="wigner"),
        ],
    )
    figs["fig10"] = (
        "upper-half-plane eigenvalues ordered by real part",
        [
            _run("fig10/c", "c", "gaussian", "upper", ["LinearStretched"],
                 {"LinearStretched": {"a": 14.4, "b": 3.50, "c": 0.57}}, reference="wigner"),
            _run("fig10/t", "t", "gaussian", "upper", ["LinearStretched"],
                 {"LinearStretched": {"a": 4.42, "b": 2.31, "c": 0.89}}, reference="wigner"),
            _run("fig10/r", "r", "gaussian", "upper", ["PowerStretched"],
                 {"PowerStretched": {"a": 895.0, "b": 3.10, "c": 7.26, "d": 0.57}}, reference="wigner"),
        ],
    )
    dens = dict(stat="density", scaling="max_abs", N=1)
    figs["fig11"] = (
        "single large matrices, eps = E / E_max (reduced orders for dense solves)",
        [
            _run("fig11/rsym", "rsym", "gaussian", fit=[], n=2000, reference="semicircle", **dens),
            _run("fig11/csym", "csym", "gaussian", fit=["BoseMitraFit"], targets={"BoseMitraFit": {"a": 7.08}},
                 n=10_000, **dens),
            _run("fig11/toeplitz", "toeplitz", "gaussian", fit=["Gaussian"],
                 targets={"Gaussian": {"a": 1.20, "b": 4.23}}, n=4000, **dens),
            _run("fig11/tsym", "tsym", "gaussian", fit=["SuperGaussianQuartic"],
                 targets={"SuperGaussianQuartic": {"a": 0.94, "b": 8.06}}, n=10_000, **dens),
            _run("fig11/tprime", "tprime", "gaussian", fit=["SuperGaussianQuartic"],
                 targets={"SuperGaussianQuartic": {"a": 1.03, "b": 11.63}}, n=10_000, **dens),
            _run("fig11/d", "d", "gaussian", fit=["ExponentialD"],
                 targets={"ExponentialD": {"a": 9.33, "b": 9.33}}, n=10_000, **dens),
        ],
    )
    return figs


def _registry():
    reg = {
        "table1": Recipe("table1", "p_AB fits for R + R^t and R', symmetric element laws", _table_ab("table1", _T1)),
        "table2": Recipe("table2", "p_AB fits for R + R^t and R', skewed element laws", _table_ab("table2", _T2)),
        "table3": Recipe("table3", "Poisson fits: NLE for R-type, NLM for Q, Csym, Tsym, T', Toeplitz", _table3()),
        "table4": Recipe("table4", "Poisson fits of Re, Im and |.| statistics for R, C, T", _table4()),
    }
    for name, (desc, jobs) in _figures().items():
        reg[name] = Recipe(name, desc, jobs)
    return reg


RECIPES: dict[str, Recipe] = _registry()


# --- 2x2 jobs ------------------------------------------------------------------


def _mc_2x2_values(matrix, pdf, mc, seed, scale=1.0, workers=1):
    spec = EnsembleSpec(matrix, 2, int(mc), PdfSpec(pdf, scale), int(seed))
    return ensemble_spectra(spec, workers=workers)


def analytic2x2(matrix, pdf, grid=400, mc=0, bins=50, seed=DEFAULT_SEED, workers=1) -> dict:
    """Exact curve, slope at 0 and (optionally) a Monte Carlo comparison."""
    curve = models.p2x2(matrix, pdf)
    out = {"curve": curve, "S_bar": curve.mean, "mass": curve.mass}
    try:
        out["alpha"] = models.slope_at_zero(curve)
        out["behaviour"] = "linear"
    except models.SuperLinearRepulsion as exc:
        out["alpha"] = None
        out["behaviour"] = exc.kind
        out["order"] = exc.order
    hi = min(curve.support[1], 4.0)
    out["grid"] = np.linspace(0.0, hi, int(grid))
    if mc:
        spectra = _mc_2x2_values(matrix, pdf, mc, seed, workers=workers)
        sample = spacings_nlm(spectra, "global")
        h = histogram(sample, bins, (0.0, 4.0))
        out["hist"] = h
        out["goodness"] = goodness(h, curve)
    return out


def g2x2_check(matrix, mc=80_000, bins=60, range=(-4.0, 4.0), seed=DEFAULT_SEED, workers=1) -> dict:
    """Exact 2x2 eigenvalue density vs Monte Carlo (elements ~ exp(-x^2))."""
    curve = models.g2x2(matrix)
    spectra = _mc_2x2_values(matrix, "gaussian", mc, seed, scale=1 / math.sqrt(2), workers=workers)
    ds = density_sample(spectra, "mean_positive")
    h = histogram(ds, bins, range)
    return {"curve": curve, "E_bar_exact": curve.mean, "E_bar_mc": ds.scale, "hist": h, "goodness": goodness(h, curve)}


# --- running recipes -------------------------------------------------------------


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run_job(job: Job, out_dir: str | None = None, cache: dict | None = None, workers: int = 1) -> dict:
    """Execute one job; writes its files under ``out_dir`` when given."""
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    if job.kind == "run":
        cfg = job.config if workers == 1 else replace(job.config, workers=workers)
        key = (cfg.ensemble, cfg.n, cfg.N, cfg.pdf, cfg.scale, cfg.seed, cfg.fast, cfg.method)
        spectra = None
        if cache is not None:
            spectra = cache.get(key)
            if spectra is None:
                cfg.validate()
                spectra = cache[key] = compute_spectra(cfg)
        res = run_experiment(cfg, spectra)
        if out_dir:
            write_outputs(res, out_dir, {"recipe_job": job.label, "targets": job.targets})
        summary = {f.model: dict(f.params, sup_norm=f.sup_norm, converged=f.converged) for f in res.fits}
        if res.reference:
            summary["reference"] = {"name": res.reference["name"], "sup_norm": res.reference["sup_norm"]}
        return {"label": job.label, "result": res, "summary": summary}
    if job.kind == "analytic2x2":
        p = job.params
        res = analytic2x2(p["matrix"], p["pdf"], p.get("grid", 400), p.get("mc", 0), p.get("bins", 50),
                          p.get("seed", DEFAULT_SEED), workers)
        if out_dir:
            write_analytic2x2(res, out_dir, p)
        summary = {"alpha": res["alpha"], "behaviour": res["behaviour"], "S_bar": res["S_bar"]}
        if "goodness" in res:
            summary["mc_sup_norm"] = res["goodness"]["sup_norm"]
        return {"label": job.label, "result": res, "summary": summary}
    if job.kind == "g2x2":
        p = job.params
        res = g2x2_check(p["matrix"], p.get("mc", 80_000), p.get("bins", 60), p.get("range", (-4.0, 4.0)),
                         p.get("seed", DEFAULT_SEED), workers)
        if out_dir:
            _write(os.path.join(out_dir, "histogram.csv"), histogram_csv(res["hist"]))
            xs = res["hist"].centers
            _write(os.path.join(out_dir, "curve.csv"), curve_csv(xs, res["curve"](xs), "eps,D"))
            _write(os.path.join(out_dir, "manifest.json"), json.dumps({
                "command": "g2x2", "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in p.items()},
                "E_bar_exact": res["E_bar_exact"], "E_bar_mc": res["E_bar_mc"],
                "sup_norm": res["goodness"]["sup_norm"], "status": "ok",
            }, indent=2, sort_keys=True) + "\n")
        summary = {"E_bar_exact": res["E_bar_exact"], "E_bar_mc": res["E_bar_mc"],
                   "sup_norm": res["goodness"]["sup_norm"]}
        return {"label": job.label, "result": res, "summary": summary}
    raise ValueError(f"unknown job kind {job.kind!r}")


def write_analytic2x2(res: dict, out_dir: str, params: dict) -> list[str]:
    files = ["curve.csv", "alpha.txt"]
    xs = res["grid"]
    _write(os.path.join(out_dir, "curve.csv"), curve_csv(xs, res["curve"](xs)))
    lines = [f"matrix: {params['matrix']}", f"pdf: {params['pdf']}",
             f"S_bar: {res['S_bar']:.12g}", f"mass: {res['mass']:.12g}"]
    if res["alpha"] is None:
        lines += [f"alpha: {res['behaviour']}", f"order: {res['order']:.4f}"]
    else:
        lines.append(f"alpha: {res['alpha']:.12g}")
    if "hist" in res:
        g = res["goodness"]
        lines += [f"mc_sup_norm: {g['sup_norm']:.12g}", f"mc_sse: {g['sse']:.12g}"]
        _write(os.path.join(out_dir, "mc_histogram.csv"), histogram_csv(res["hist"]))
        files.append("mc_histogram.csv")
    _write(os.path.join(out_dir, "alpha.txt"), "\n".join(lines) + "\n")
    return files


def select_jobs(recipe: Recipe, pdfs=None, only=None) -> list:
    jobs = recipe.jobs
    if pdfs:
        wanted = {PDF_TOKENS.get(p, p) for p in pdfs}
        jobs = [j for j in jobs if j.pdf in wanted]
    if only:
        jobs = [j for j in jobs if only in j.label]
    return jobs


def override(job: Job, **kw) -> Job:
    kw = {k: v for k, v in kw.items() if v is not None}
    if not kw:
        return job
    if job.kind == "run":
        return replace(job, config=replace(job.config, **kw))
    params = dict(job.params)
    if "N" in kw:
        params["mc"] = kw["N"]
    if "seed" in kw:
        params["seed"] = kw["seed"]
    return replace(job, params=params)


def run_recipe(name: str, out_dir: str, pdfs=None, only=None, workers: int = 1, **overrides) -> list[dict]:
    """Run every (selected) job of a recipe; writes one directory per job and ``summary.txt``."""
    recipe = RECIPES[name]
    jobs = [override(j, **overrides) for j in select_jobs(recipe, pdfs, only)]
    cache: dict = {}
    results = []
    t0 = time.perf_counter()
    for job in jobs:
        sub = os.path.join(out_dir, *job.label.split("/"))
        results.append(run_job(job, sub, cache, workers))
    lines = [f"recipe: {name}", f"jobs: {len(results)}"]
    for job, r in zip(jobs, results):
        lines.append(f"[{job.label}]")
        for key, val in r["summary"].items():
            lines.append(f"  {key}: {json.dumps(val, sort_keys=True, default=float)}")
        for key, val in job.targets.items():
            lines.append(f"  target.{key}: {json.dumps(val, sort_keys=True)}")
    _write(os.path.join(out_dir, "summary.txt"), "\n".join(lines) + "\n")
    blocks = []
    for job, r in zip(jobs, results):
        if job.kind == "run" and r["result"].fits:
            blocks.append(f"[{job.label}]\n" + "\n".join(f.to_text() for f in r["result"].fits))
    _write(os.path.join(out_dir, "fit.txt"), "\n".join(blocks))
    _write(os.path.join(out_dir, "manifest.json"), json.dumps({
        "command": "recipes run", "recipe": name, "jobs": [j.label for j in jobs],
        "overrides": {k: v for k, v in overrides.items() if v is not None},
        "pdfs": list(pdfs) if pdfs else None, "only": only,
        "wall_time_s": round(time.perf_counter() - t0, 3), "status": "ok",
    }, indent=2, sort_keys=True) + "\n")
    return results
