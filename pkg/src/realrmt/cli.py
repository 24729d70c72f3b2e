"""Command line entry point: ``realrmt run|analytic2x2|recipes|rerun``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import models
from .eigen import ConvergenceError
from .recipes import DEFAULT_SEED, RECIPES, run_recipe, select_jobs, write_analytic2x2, analytic2x2
from .runner import ConfigError, ExperimentConfig, run_experiment, write_outputs

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _range(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("range must be lo,hi")
    return float(parts[0]), float(parts[1])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="realrmt", description="Spacing statistics of real random matrix ensembles.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one ensemble experiment")
    r.add_argument("--ensemble", required=True)
    r.add_argument("--n", type=int, default=100)
    r.add_argument("--N", type=int, default=1000)
    r.add_argument("--pdf", default="gaussian")
    r.add_argument("--scale", type=float, default=1.0)
    r.add_argument("--stat", default="nlm", help="spacing protocol token or 'density'")
    r.add_argument("--bins", type=int)
    r.add_argument("--range", type=_range, help="lo,hi")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--scaling")
    r.add_argument("--fit", default="", help="comma separated model names")
    r.add_argument("--reference")
    r.add_argument("--pairs", default="keep", choices=["keep", "dedup"])
    r.add_argument("--drop-degenerate", action="store_true")
    r.add_argument("--real-only", action="store_true")
    r.add_argument("--method", default="lapack", choices=["lapack", "native"])
    r.add_argument("--no-fast", action="store_true", help="disable structured fast paths")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--allow-large", action="store_true")
    r.add_argument("--out", required=True)

    a = sub.add_parser("analytic2x2", help="exact 2x2 spacing law, slope at 0, optional Monte Carlo overlay")
    a.add_argument("--matrix", required=True, choices=["r1", "r2"])
    a.add_argument("--pdf", required=True)
    a.add_argument("--grid", type=int, default=400)
    a.add_argument("--mc", type=int, default=0)
    a.add_argument("--bins", type=int, default=50)
    a.add_argument("--seed", type=int, default=DEFAULT_SEED)
    a.add_argument("--out", required=True)

    rc = sub.add_parser("recipes", help="list or run named table/figure presets")
    rsub = rc.add_subparsers(dest="action", required=True)
    ls = rsub.add_parser("list")
    ls.add_argument("--jobs", action="store_true", help="also list every job")
    rr = rsub.add_parser("run")
    rr.add_argument("name")
    rr.add_argument("--pdf", action="append", help="restrict to rows with this pdf (repeatable)")
    rr.add_argument("--only", help="restrict to jobs whose label contains this text")
    rr.add_argument("--n", type=int)
    rr.add_argument("--N", type=int)
    rr.add_argument("--seed", type=int)
    rr.add_argument("--workers", type=int, default=1)
    rr.add_argument("--out", required=True)

    m = sub.add_parser("rerun", help="repeat a run from its manifest.json")
    m.add_argument("--manifest", required=True)
    m.add_argument("--out", required=True)
    return p


def _check_out(path: str) -> None:
    if not os.path.isdir(path):
        raise ConfigError(f"output directory {path!r} does not exist")
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path!r} is not writable")


def _fail_manifest(out: str, command: str, payload: dict, exc: Exception, t0: float) -> None:
    manifest = dict(payload, command=command, status="failed", error=f"{type(exc).__name__}: {exc}",
                    wall_time_s=round(time.perf_counter() - t0, 3))
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _cmd_run(cfg: ExperimentConfig, out: str) -> int:
    cfg.validate()
    _check_out(out)
    t0 = time.perf_counter()
    try:
        result = run_experiment(cfg)
    except (ConvergenceError, RuntimeError, FloatingPointError) as exc:
        _fail_manifest(out, "run", {"config": cfg.to_dict(), "seed": cfg.seed}, exc, t0)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_outputs(result, out)
    for f in result.fits:
        vals = " ".join(f"{k}={v:.6g}" for k, v in f.params.items())
        print(f"{f.model}: {vals} sup_norm={f.sup_norm:.4g}")
    if result.reference:
        print(f"reference {result.reference['name']}: sup_norm={result.reference['sup_norm']:.4g}")
    return EXIT_OK


def _cmd_analytic(params: dict, out: str) -> int:
    try:
        models.raw_p2x2(params["matrix"], params["pdf"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _check_out(out)
    t0 = time.perf_counter()
    try:
        res = analytic2x2(params["matrix"], params["pdf"], params["grid"], params["mc"], params["bins"], params["seed"])
    except (ConvergenceError, RuntimeError, FloatingPointError) as exc:
        _fail_manifest(out, "analytic2x2", {"params": params}, exc, t0)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    files = write_analytic2x2(res, out, params)
    manifest = {"command": "analytic2x2", "params": params, "S_bar": res["S_bar"], "mass": res["mass"],
                "alpha": res["alpha"], "behaviour": res["behaviour"], "outputs": files, "status": "ok",
                "wall_time_s": round(time.perf_counter() - t0, 3)}
    if "order" in res:
        manifest["order"] = res["order"]
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    alpha = f"{res['alpha']:.6g}" if res["alpha"] is not None else f"{res['behaviour']} (order {res['order']:.3f})"
    print(f"{params['matrix']} {params['pdf']}: S_bar={res['S_bar']:.6g} alpha={alpha}")
    return EXIT_OK


def _cmd_recipes_run(name, out, pdfs=None, only=None, workers=1, n=None, N=None, seed=None) -> int:
    if name not in RECIPES:
        raise ConfigError(f"unknown recipe {name!r}; see 'realrmt recipes list'")
    if not select_jobs(RECIPES[name], pdfs, only):
        raise ConfigError("selection matches no jobs")
    _check_out(out)
    t0 = time.perf_counter()
    try:
        run_recipe(name, out, pdfs=pdfs, only=only, workers=workers, n=n, N=N, seed=seed)
    except (ConvergenceError, RuntimeError, FloatingPointError) as exc:
        _fail_manifest(out, "recipes run", {"recipe": name}, exc, t0)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    with open(os.path.join(out, "summary.txt")) as fh:
        sys.stdout.write(fh.read())
    return EXIT_OK


def _cmd_rerun(manifest_path: str, out: str) -> int:
    try:
        with open(manifest_path) as fh:
            man = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest: {exc}") from None
    cmd = man.get("command")
    if cmd == "run":
        return _cmd_run(ExperimentConfig.from_dict(man["config"]), out)
    if cmd == "analytic2x2":
        return _cmd_analytic(man["params"], out)
    if cmd == "recipes run":
        ov = man.get("overrides", {})
        return _cmd_recipes_run(man["recipe"], out, man.get("pdfs"), man.get("only"), 1,
                                ov.get("n"), ov.get("N"), ov.get("seed"))
    raise ConfigError(f"manifest command {cmd!r} cannot be rerun")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = ExperimentConfig(
                ensemble=args.ensemble, n=args.n, N=args.N, pdf=args.pdf, scale=args.scale, seed=args.seed,
                stat=args.stat, bins=args.bins, range=args.range, scaling=args.scaling, fit=args.fit,
                reference=args.reference, pairs=args.pairs, drop_degenerate=args.drop_degenerate,
                real_only=args.real_only, fast=not args.no_fast, method=args.method, workers=args.workers,
                allow_large=args.allow_large,
            )
            return _cmd_run(cfg, args.out)
        if args.command == "analytic2x2":
            params = {"matrix": args.matrix, "pdf": args.pdf, "grid": args.grid, "mc": args.mc,
                      "bins": args.bins, "seed": args.seed}
            return _cmd_analytic(params, args.out)
        if args.command == "recipes":
            if args.action == "list":
                for name, rec in RECIPES.items():
                    n_jobs = len(rec.jobs)
                    print(f"{name}: {rec.description} ({n_jobs} job{'' if n_jobs == 1 else 's'})")
                    if args.jobs:
                        for j in rec.jobs:
                            print(f"  {j.label}")
                return EXIT_OK
            return _cmd_recipes_run(args.name, args.out, args.pdf, args.only, args.workers, args.n, args.N, args.seed)
        if args.command == "rerun":
            return _cmd_rerun(args.manifest, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
