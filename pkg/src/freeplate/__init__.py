"""Ritz spectra, closed-form bounds and Fourier-argument checks for free plates."""

from .bounds import (
    BoundInput,
    F_ratio,
    kroger_eig_bound,
    kroger_sum_bound,
    plate_eig_bound,
    plate_sum_bound,
    sum_lemma_holds,
)
from .domains import DomainSpec, QuadratureRule, quadrature, unit_ball_volume, volume
from .eigensolver import solve_generalized
from .exact_spectra import disk_neumann, free_beam, rectangle_neumann
from .ritz import NotConverged, Operator, Spectrum, assemble, compute_spectrum, zero_mode_count

__version__ = "0.1.0"
