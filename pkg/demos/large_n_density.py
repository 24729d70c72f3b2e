"""Eigenvalue density of one large symmetric matrix.

A single n=2000 real symmetric matrix already traces the semicircle;
the symmetric Toeplitz matrix does not, and a Gaussian fits it instead.

    python3 demos/large_n_density.py
"""

import numpy as np

from realrmt import models
from realrmt.recipes import DEFAULT_SEED
from realrmt.runner import ExperimentConfig, run_experiment

res = run_experiment(ExperimentConfig(ensemble="rsym", n=2000, N=1, stat="density", scaling="max_abs",
                                      reference="semicircle", seed=DEFAULT_SEED))
h = res.hist
print(f"rsym n=2000: semicircle sup-norm {res.reference['sup_norm']:.4f}")
for c, d in list(zip(h.centers, h.density))[::6]:
    bar = "#" * int(40 * d)
    print(f"{c:+.2f} {d:.3f} {float(models.semicircle(np.clip(c, -1, 1))):.3f} {bar}")

res = run_experiment(ExperimentConfig(ensemble="toeplitz", n=1500, N=1, stat="density", scaling="max_abs",
                                      fit="Gaussian", seed=DEFAULT_SEED))
p = res.fits[0].params
print(f"toeplitz n=1500: Gaussian a={p['a']:.3f} b={p['b']:.3f}")
