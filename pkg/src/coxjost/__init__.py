"""Spectral analysis of multichannel Cox potentials.

The package locates every zero of the Jost-matrix determinant of an
N-channel supersymmetric partner of the zero potential, classifies the
zeros, approximates them at weak coupling, solves the two-channel inverse
problem in closed form, and evaluates the potential and scattering data.
"""
from .errors import CoxError
from .model import (
    ChannelModel,
    Momenta,
    SheetSignature,
    all_sheets,
    b_matrix,
    jost_matrix,
    momenta_from_k1,
    sheet_of,
    validate,
)
from .spectrum import (
    Tolerances,
    count_bound_states,
    eigenvalue_curves,
    imaginary_axis_zeros,
    solve_spectrum,
    tally,
)

__all__ = [
    "ChannelModel",
    "CoxError",
    "Momenta",
    "SheetSignature",
    "Tolerances",
    "all_sheets",
    "b_matrix",
    "count_bound_states",
    "eigenvalue_curves",
    "imaginary_axis_zeros",
    "jost_matrix",
    "momenta_from_k1",
    "sheet_of",
    "solve_spectrum",
    "tally",
    "validate",
]
