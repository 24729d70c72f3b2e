"""Spacing statistics and eigenvalue densities of real random matrices."""

from .sampler import PdfFamily, PdfSpec, Pdf, make_pdf
from .seeding import seed_stream
from .matrices import MatrixFamily, EnsembleSpec, build, build_from_draws
from .eigen import Spectrum, eig_symmetric, eig_general, circulant_eigs_dft, eig_2x2, ensemble_spectra
from .spacing import (
    Protocol,
    Scaling,
    DensityScaling,
    spacings_nlm,
    spacings_nle,
    spacings_complex,
    fals,
    density_sample,
    histogram,
)

__version__ = "0.1.0"
