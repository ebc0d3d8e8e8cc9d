"""Modal spectral laboratory for abstract thermoelastic plate semigroups.

The generator acts diagonally on the eigenbasis of A, so every quantity
reduces to 3x3 blocks indexed by the eigenvalues of A.
"""

from platelab.errors import (
    JacobiConvergenceError,
    PlateLabError,
    SingularSystemError,
    SpectrumFileError,
)
from platelab.spectrum import EigenModel, eigenvalue, frac_power_coeff, resonant_mode
from platelab.modal import ModalState, ModeBlock, dissipation_rate, generator_block, weighted_inner

__version__ = "0.1.0"

__all__ = [
    "EigenModel",
    "JacobiConvergenceError",
    "ModalState",
    "ModeBlock",
    "PlateLabError",
    "SingularSystemError",
    "SpectrumFileError",
    "dissipation_rate",
    "eigenvalue",
    "frac_power_coeff",
    "generator_block",
    "resonant_mode",
    "weighted_inner",
]
