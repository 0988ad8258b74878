"""Spectral tools for the strongly damped wave equation and its dispersive estimates."""
from .spectral import (
    Grid,
    SpectralField,
    make_grid,
    forward_transform,
    inverse_transform,
    lp_norm,
    dilate,
)
from .symbols import (
    StateVector,
    lambda_delta,
    lambda_derivatives,
    propagator_kernel,
    semigroup_entries,
    apply_multiplier,
    apply_semigroup,
)
from .littlewood_paley import BesovParams, build_partition, shell_project, besov_norm

__version__ = "0.1.0"
