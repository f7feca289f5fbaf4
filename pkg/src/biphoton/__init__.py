"""Transverse two-photon state of SPDC: analytic model, entanglement diagnostics, grid oracles."""
from .model import (
    CoordCoeffs,
    GridSpec,
    MomentumCoeffs,
    OpticalConfig,
    coord_coeffs,
    momentum_coeffs,
    mode_function_momentum,
    pump_wavenumber,
    reference_config,
    sinc_gaussian_residual,
    wave_function_coord,
)

__version__ = "0.1.0"
