"""Legendre spectral-Galerkin discretization with a tamed semi-implicit Euler stepper for
nonlinear SPDEs (stochastic Allen-Cahn type) driven by Q-Wiener noise on (0,1)^d, d = 1, 2."""

from .basis import BasisSet, QuadratureRule, gauss_lobatto_rule
from .dynamics import DiffusionSpec, ReactionSpec
from .experiments import ErrorTable, spatial_study, stability_sweep, strong_error, temporal_study
from .noise import BrownianLattice, QWienerSpec, coarsen, sample_lattice
from .operators import EigenSystem, OperatorSpec
from .stepper import DivergenceError, RunConfig, SolverState, l2_error, solve_path

__all__ = [
    "BasisSet", "QuadratureRule", "gauss_lobatto_rule", "DiffusionSpec", "ReactionSpec",
    "ErrorTable", "spatial_study", "stability_sweep", "strong_error", "temporal_study",
    "BrownianLattice", "QWienerSpec", "coarsen", "sample_lattice", "EigenSystem", "OperatorSpec",
    "DivergenceError", "RunConfig", "SolverState", "l2_error", "solve_path",
]
