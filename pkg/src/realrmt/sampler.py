"""Element distributions for random matrix entries.

Every family is stored in standardized form (unit width) and stretched by
``scale``. Densities are always the normalized ones; the unnormalized
shapes quoted in the literature only differ by a constant, which drops out
once spacings are rescaled to unit mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import special

__all__ = ["PdfFamily", "PdfSpec", "Pdf", "make_pdf", "sample", "density"]


class PdfFamily(str, Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    EXPONENTIAL = "exponential"
    SUPERGAUSSIAN = "supergaussian"
    MAXWELLIAN = "maxwellian"
    TRIANGULAR = "triangular"
    PARABOLIC = "parabolic"
    SEMICIRCLE = "semicircle"
    HALF_GAUSSIAN = "half_gaussian"
    HALF_UNIFORM = "half_uniform"
    HALF_EXPONENTIAL = "half_exponential"
    HALF_SUPERGAUSSIAN = "half_supergaussian"
    HALF_TRIANGULAR = "half_triangular"
    P2 = "p2"
    P3 = "p3"


_SG_NORM = 2.0 * special.gamma(1.25)  # integral of exp(-x**4) over the real line


@dataclass(frozen=True)
class PdfSpec:
    family: PdfFamily
    scale: float = 1.0

    def __post_init__(self):
        try:
            fam = PdfFamily(self.family)
        except ValueError:
            raise ValueError(f"unknown pdf family {self.family!r}") from None
        object.__setattr__(self, "family", fam)
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")


# --- standardized shapes -------------------------------------------------


def _in(u, lo, hi):
    return (u >= lo) & (u <= hi)


def _exp_inv(p):
    # inverse cdf of the two-sided exponential (Laplace) law
    return np.where(p < 0.5, np.log(2 * p), -np.log(2 * (1 - p)))


def _tri_inv(p):
    return np.where(p < 0.5, -1 + np.sqrt(2 * p), 1 - np.sqrt(2 * (1 - p)))


def _rejection(shape_fn: Callable, peak: float) -> Callable:
    """Accept-reject from the box [-1, 1] x [0, peak]."""

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.empty(n)
        filled = 0
        while filled < n:
            need = n - filled
            batch = int(need * 1.6) + 16
            u = rng.uniform(-1.0, 1.0, batch)
            y = rng.uniform(0.0, peak, batch)
            acc = u[y < shape_fn(u)][:need]
            out[filled : filled + acc.size] = acc
            filled += acc.size
        return out

    return draw


def _sg_draw(rng, n):
    # |x|**4 ~ Gamma(1/4) when x has density proportional to exp(-x**4)
    mag = rng.gamma(0.25, 1.0, n) ** 0.25
    return np.where(rng.random(n) < 0.5, -mag, mag)


def _parabolic(u):
    return np.where(_in(u, -1, 1), 0.75 * (1 - u * u), 0.0)


def _semicircle(u):
    return np.where(_in(u, -1, 1), (2 / np.pi) * np.sqrt(np.clip(1 - u * u, 0, None)), 0.0)


def _p2(u):
    return np.where(_in(u, -1, 1), 0.75 * (1 - u * u) * (1 + u), 0.0)


def _p3(u):
    return np.where(_in(u, -1, 1), 0.625 * (1 - u * u) * (1 + u) ** 2, 0.0)


def _poly_cdf(antideriv, mass):
    def cdf(u):
        uc = np.clip(u, -1, 1)
        return (antideriv(uc) - antideriv(-1.0)) / mass

    return cdf


@dataclass(frozen=True)
class _Shape:
    density: Callable
    cdf: Callable
    draw: Callable
    support: tuple
    symmetric: bool


def _halved(base: _Shape, draw=None) -> _Shape:
    """Fold a symmetric shape onto [0, inf)."""
    return _Shape(
        density=lambda u: np.where(u >= 0, 2 * base.density(u), 0.0),
        cdf=lambda u: np.where(u >= 0, 2 * base.cdf(u) - 1, 0.0),
        draw=draw or (lambda rng, n: np.abs(base.draw(rng, n))),
        support=(0.0, base.support[1]),
        symmetric=False,
    )


_GAUSS = _Shape(
    density=lambda u: np.exp(-0.5 * u * u) / np.sqrt(2 * np.pi),
    cdf=lambda u: special.ndtr(u),
    draw=lambda rng, n: rng.standard_normal(n),
    support=(-np.inf, np.inf),
    symmetric=True,
)
_UNIF = _Shape(
    density=lambda u: np.where(_in(u, -1, 1), 0.5, 0.0),
    cdf=lambda u: np.clip((u + 1) / 2, 0, 1),
    draw=lambda rng, n: rng.uniform(-1.0, 1.0, n),
    support=(-1.0, 1.0),
    symmetric=True,
)
_EXPO = _Shape(
    density=lambda u: 0.5 * np.exp(-np.abs(u)),
    cdf=lambda u: np.where(u < 0, 0.5 * np.exp(-np.abs(u)), 1 - 0.5 * np.exp(-np.abs(u))),
    draw=lambda rng, n: _exp_inv(rng.random(n)),
    support=(-np.inf, np.inf),
    symmetric=True,
)
_SG = _Shape(
    density=lambda u: np.exp(-(u**4)) / _SG_NORM,
    cdf=lambda u: 0.5 + 0.5 * np.sign(u) * special.gammainc(0.25, u**4),
    draw=_sg_draw,
    support=(-np.inf, np.inf),
    symmetric=True,
)
_TRI = _Shape(
    density=lambda u: np.clip(1 - np.abs(u), 0, None),
    cdf=lambda u: np.where(
        u < 0, 0.5 * np.clip(1 + u, 0, None) ** 2, 1 - 0.5 * np.clip(1 - u, 0, None) ** 2
    ),
    draw=lambda rng, n: _tri_inv(rng.random(n)),
    support=(-1.0, 1.0),
    symmetric=True,
)

_SHAPES: dict[PdfFamily, _Shape] = {
    PdfFamily.GAUSSIAN: _GAUSS,
    PdfFamily.UNIFORM: _UNIF,
    PdfFamily.EXPONENTIAL: _EXPO,
    PdfFamily.SUPERGAUSSIAN: _SG,
    PdfFamily.MAXWELLIAN: _Shape(
        density=lambda u: np.where(u >= 0, 2 * u * np.exp(-u * u), 0.0),
        cdf=lambda u: np.where(u >= 0, -np.expm1(-np.clip(u, 0, None) ** 2), 0.0),
        draw=lambda rng, n: np.sqrt(rng.standard_exponential(n)),
        support=(0.0, np.inf),
        symmetric=False,
    ),
    PdfFamily.TRIANGULAR: _TRI,
    PdfFamily.PARABOLIC: _Shape(
        density=_parabolic,
        cdf=_poly_cdf(lambda u: 0.75 * (u - u**3 / 3), 1.0),
        draw=_rejection(_parabolic, 0.75),
        support=(-1.0, 1.0),
        symmetric=True,
    ),
    PdfFamily.SEMICIRCLE: _Shape(
        density=_semicircle,
        cdf=_poly_cdf(lambda u: (u * np.sqrt(1 - u * u) + np.arcsin(u)) / np.pi, 1.0),
        draw=_rejection(_semicircle, 2 / np.pi),
        support=(-1.0, 1.0),
        symmetric=True,
    ),
    PdfFamily.P2: _Shape(
        density=_p2,
        cdf=_poly_cdf(lambda u: u + u**2 / 2 - u**3 / 3 - u**4 / 4, 4 / 3),
        draw=_rejection(_p2, 0.75 * 32 / 27),
        support=(-1.0, 1.0),
        symmetric=False,
    ),
    PdfFamily.P3: _Shape(
        density=_p3,
        cdf=_poly_cdf(lambda u: u + u**2 - u**4 / 2 - u**5 / 5, 8 / 5),
        draw=_rejection(_p3, 0.625 * 27 / 16),
        support=(-1.0, 1.0),
        symmetric=False,
    ),
    PdfFamily.HALF_GAUSSIAN: _halved(_GAUSS),
    PdfFamily.HALF_UNIFORM: _halved(_UNIF, draw=lambda rng, n: rng.random(n)),
    PdfFamily.HALF_EXPONENTIAL: _halved(_EXPO, draw=lambda rng, n: rng.standard_exponential(n)),
    PdfFamily.HALF_SUPERGAUSSIAN: _halved(_SG),
    PdfFamily.HALF_TRIANGULAR: _halved(_TRI, draw=lambda rng, n: 1 - np.sqrt(1 - rng.random(n))),
}


class Pdf:
    """A normalized element distribution, scaled by ``spec.scale``.

    Immutable; safe to share between threads. Randomness comes only from the
    generator passed to :meth:`sample`.
    """

    def __init__(self, spec: PdfSpec):
        self.spec = spec
        self._shape = _SHAPES[spec.family]

    @property
    def family(self) -> PdfFamily:
        return self.spec.family

    @property
    def scale(self) -> float:
        return self.spec.scale

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self._shape.support
        return lo * self.scale, hi * self.scale

    @property
    def symmetric(self) -> bool:
        return self._shape.symmetric

    def density(self, x):
        u = np.asarray(x, dtype=float) / self.scale
        out = self._shape.density(u) / self.scale
        return out if np.ndim(out) else float(out)

    def cdf(self, x):
        u = np.asarray(x, dtype=float) / self.scale
        out = np.clip(self._shape.cdf(u), 0.0, 1.0)
        return out if np.ndim(out) else float(out)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the distribution; ``size=None`` returns a single float."""
        if size is None:
            return float(self._shape.draw(rng, 1)[0] * self.scale)
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        return (self._shape.draw(rng, n) * self.scale).reshape(shape)

    def __repr__(self):
        return f"Pdf({self.family.value}, scale={self.scale:g})"


def make_pdf(spec: PdfSpec | str, scale: float = 1.0) -> Pdf:
    if not isinstance(spec, PdfSpec):
        spec = PdfSpec(spec, scale)
    return Pdf(spec)


def sample(pdf: Pdf, rng: np.random.Generator, size=None):
    return pdf.sample(rng, size)


def density(pdf: Pdf, x):
    return pdf.density(x)
