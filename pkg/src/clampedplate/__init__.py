"""Finite-difference clamped-plate eigenvalues and checks of universal gap bounds."""
from .eigensolver import Spectrum, solve_dense, solve_shift_invert
from .functionals import EigenfunctionFunctionals, compute_functionals, constant_C
from .grid import Domain, Grid, build_grid
from .operators import Stencils, assemble_biharmonic
from .study import solve_grid

__all__ = [
    "Domain",
    "EigenfunctionFunctionals",
    "Grid",
    "Spectrum",
    "Stencils",
    "assemble_biharmonic",
    "build_grid",
    "compute_functionals",
    "constant_C",
    "solve_dense",
    "solve_grid",
    "solve_shift_invert",
]
