"""Spectral toolbox for semilinear parabolic PDEs with rough random data:
scaling classification, Gaussian initial conditions, Wick-exact stochastic
objects, weighted-space Picard solvers, and the mode-ODE blow-up model.
"""

__version__ = "0.1.0"

from .spectral import SpectralField, TorusLattice, convolve, sup_norm
from .lp import BesovParams, DyadicPartition, besov_norm
from .equations import EquationSpec, LinearOperator, catalogue, nonlinearity
from .criticality import classify, chi_exponents

__all__ = [
    "SpectralField", "TorusLattice", "convolve", "sup_norm",
    "BesovParams", "DyadicPartition", "besov_norm",
    "EquationSpec", "LinearOperator", "catalogue", "nonlinearity",
    "classify", "chi_exponents", "__version__",
]
