"""hjlab: a numerical laboratory for superquadratic viscous Hamilton-Jacobi equations.

Subsolutions of degenerate elliptic equations with superquadratic gradient
growth are Holder continuous with exponent (m-2)/(m-1); this package builds
the explicit barrier supersolutions behind that estimate, certifies them on
grids, solves the associated stationary / evolution / ergodic / cell
problems with monotone finite differences, and measures the predicted
regularity and homogenization behavior on desk-scale 1D and 2D grids.
"""

from .fields import Diffusion, Field, make_field
from .problem import (
    Ball,
    Box,
    ClassPReport,
    DirichletBC,
    DomainError,
    GrowthFunction,
    Interval,
    InvalidSpecError,
    PeriodicBC,
    PowerHamiltonian,
    ProblemSpec,
    QuasilinearHamiltonian,
    StateConstraintBC,
    Torus,
    check_ellipticity,
    check_superquadratic_bound,
    evaluate_operator,
    rewrite_quasilinear,
    tail_integral,
    validate_class_p,
)

__version__ = "0.1.0"
