"""Pseudo-spectral solver and verification harness for the 2D viscous Boussinesq system on the torus."""
from .dynamics import (
    SimState,
    Stepper,
    advect_scalar,
    advect_velocity,
    buoyancy_term,
    rhs,
    step,
    taylor_time_derivatives,
)
from .kernels import BACKEND
from .sobolev import NormSpec, commutator_residual, mixed_time_norm, norm, q_project, sobolev_norm
from .spectral import (
    Grid,
    SpectralScalar,
    SpectralVector,
    dealias,
    derivative,
    fractional_laplacian,
    grid,
    leray_project,
    stokes_apply,
    taylor_green,
    to_physical,
    to_spectral,
    truncate,
)

__version__ = "0.1.0"
