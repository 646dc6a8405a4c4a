"""Spectral simulator and verification lab for H = |p| + V on periodic grids."""
from .errors import (CallbackError, CheckpointError, ConfigError, DilationRangeError, FilterDegreeError,
                     GridError, KrylovStepError, MaxvelError, PreconditionError, QuadratureError,
                     RepresentationError, SolverError, SymbolError)
from .grid import Field, Grid, inner_product, make_grid, norm, normalized
from .operators import HamiltonianSpec, PotentialSpec, make_hamiltonian
from .profiles import SmoothStep, make_smooth_step

__version__ = "0.1.0"

__all__ = [
    "CallbackError", "CheckpointError", "ConfigError", "DilationRangeError", "FilterDegreeError",
    "GridError", "KrylovStepError", "MaxvelError", "PreconditionError", "QuadratureError",
    "RepresentationError", "SolverError", "SymbolError",
    "Field", "Grid", "inner_product", "make_grid", "norm", "normalized",
    "HamiltonianSpec", "PotentialSpec", "make_hamiltonian",
    "SmoothStep", "make_smooth_step",
]
