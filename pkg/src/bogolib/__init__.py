"""Numerics for the dilute Bose gas on the unit torus in the Gross-Pitaevskii scaling.

The package solves the box-truncated zero-energy scattering equation,
computes Bogoliubov dispersions and predicted excitation spectra, realizes
the second-quantized Hamiltonian and its renormalization generators as
exact sparse matrices on occupation-number bases, and cross-checks the
algebraic identities and spectral predictions by exact diagonalization.
"""

__version__ = "0.1.0"

from .lattice import (
    LatticeVector,
    MomentumLattice,
    PotentialSpec,
    QuadratureError,
    convolve,
    fourier_coefficient,
    scaled_coefficient,
)
from .scattering import (
    ScatteringSolution,
    SolverError,
    WCoefficients,
    box_scattering_length,
    continuum_scattering_length,
    solve_scattering_equation,
    truncate_phi,
    w_coefficients,
)
from .bogoliubov import (
    BogoliubovData,
    SpectrumReport,
    dispersion,
    e_infinity_levels,
    excitation_spectrum,
    ground_state_energy,
    tau_coefficients,
)

__all__ = [
    "LatticeVector",
    "MomentumLattice",
    "PotentialSpec",
    "QuadratureError",
    "convolve",
    "fourier_coefficient",
    "scaled_coefficient",
    "ScatteringSolution",
    "SolverError",
    "WCoefficients",
    "box_scattering_length",
    "continuum_scattering_length",
    "solve_scattering_equation",
    "truncate_phi",
    "w_coefficients",
    "BogoliubovData",
    "SpectrumReport",
    "dispersion",
    "e_infinity_levels",
    "excitation_spectrum",
    "ground_state_energy",
    "tau_coefficients",
    "__version__",
]
