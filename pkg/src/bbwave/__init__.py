"""Pseudospectral solver for two-dimensional Boussinesq/Boussinesq interfacial wave systems."""
from .config import ConfigError, RunConfig, load_config, parse_config
from .dynamics import State, functionals, hamiltonian, rhs, symmetry_defect
from .model import (
    ModelCoeffs,
    ModellingKnobs,
    PhysicalParams,
    SystemClass,
    bbm_bbm_coeffs,
    classify,
    derive_coeffs,
    derive_physical,
    dispersion_omega,
    eigen_basis,
)
from .spectral import Grid2D
from .timestepper import ImrConfig, NonConvergenceError, imr_step, integrate
from .waves import exact_speed, solitary_constants, solitary_state

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "RunConfig", "load_config", "parse_config",
    "State", "functionals", "hamiltonian", "rhs", "symmetry_defect",
    "ModelCoeffs", "ModellingKnobs", "PhysicalParams", "SystemClass", "bbm_bbm_coeffs",
    "classify", "derive_coeffs", "derive_physical", "dispersion_omega", "eigen_basis",
    "Grid2D", "ImrConfig", "NonConvergenceError", "imr_step", "integrate",
    "exact_speed", "solitary_constants", "solitary_state",
]
