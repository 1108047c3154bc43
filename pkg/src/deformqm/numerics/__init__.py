"""Grid Hamiltonians, banded eigensolver and special functions."""

from ..fdeform import GridOperator, GridSpec
from .compare import ComparisonRow, ComparisonTable, ToleranceProfile, dispersion_laplacian, spectrum_compare
from .eigen import EigenResult, eigensolve
from .hamiltonians import assemble_hamiltonian, cap_grid, morse_lowering_matrix, pt_kinetic_cap
from .special import bessel_j, gamma_real, lgamma_real, log_bessel_j

__all__ = [
    "ComparisonRow",
    "ComparisonTable",
    "EigenResult",
    "GridOperator",
    "GridSpec",
    "ToleranceProfile",
    "assemble_hamiltonian",
    "bessel_j",
    "cap_grid",
    "dispersion_laplacian",
    "eigensolve",
    "gamma_real",
    "lgamma_real",
    "log_bessel_j",
    "morse_lowering_matrix",
    "pt_kinetic_cap",
    "spectrum_compare",
]
