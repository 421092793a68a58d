"""Triangular waveguide meshes and finite-difference schemes with allpass dispersion warping."""

from .analysis import (
    DispersionCurve,
    ModeMatch,
    dispersion_curve,
    direction_spread,
    find_peaks,
    match_modes,
    predicted_modes,
    spectrum,
    theoretical_modes,
    twm_dispersion_omega,
    warped_dispersion_curve,
)
from .cost import CostBasis, CostReport, cost_report, verify_basis_against_simulator
from .errors import ConfigError, JunctionLookupError, NumericalDomainError, SchemeMismatchError, WarpMeshError
from .lattice import TriangularLattice, build_square_lattice
from .sim import MeshState, ProbeRecord, Scheme, excite_impulse, rest_state, run_impulse_response, step
from .warp import AllpassSpec, dc_realignment, phase_delay, warp_frequency, warp_frequency_inverse

__version__ = "0.1.0"

__all__ = [
    "AllpassSpec", "ConfigError", "CostBasis", "CostReport", "DispersionCurve", "JunctionLookupError",
    "MeshState", "ModeMatch", "NumericalDomainError", "ProbeRecord", "Scheme", "SchemeMismatchError",
    "TriangularLattice", "WarpMeshError", "build_square_lattice", "cost_report", "dc_realignment",
    "direction_spread", "dispersion_curve", "excite_impulse", "find_peaks", "match_modes", "phase_delay",
    "predicted_modes", "rest_state", "run_impulse_response", "spectrum", "step", "theoretical_modes",
    "twm_dispersion_omega", "verify_basis_against_simulator", "warp_frequency", "warp_frequency_inverse",
    "warped_dispersion_curve",
]
