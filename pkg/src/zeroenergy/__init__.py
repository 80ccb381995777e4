"""Zero-energy bound states of fractional Schrodinger operators: explicit
eigenpairs, fractional Laplacian quadrature, Levy path simulation and
decay-rate diagnostics."""

__version__ = "0.1.0"

from .eigenpair import DecayClass, EigenpairSpec, decay_class, eigenfunction_value, potential_value
from .fraclap import QuadConfig, frac_laplacian, residual
from .levysim import MCEstimate, PathConfig, ProcessSpec
from .potentials import PotentialModel
from .rates import RateFunction
from .specfun import hyp2f1_reg, ln_gamma

__all__ = [
    "__version__",
    "DecayClass",
    "EigenpairSpec",
    "MCEstimate",
    "PathConfig",
    "PotentialModel",
    "ProcessSpec",
    "QuadConfig",
    "RateFunction",
    "decay_class",
    "eigenfunction_value",
    "frac_laplacian",
    "hyp2f1_reg",
    "ln_gamma",
    "potential_value",
    "residual",
]
