"""Guaranteed lower bounds for 2D Maxwell eigenvalues with lowest-order Nedelec elements."""

from ._core import (
    Mesh,
    MeshError,
    SolverError,
    bounds,
    cli,
    constants,
    eigenvalues,
    kappa,
    lower_bound,
    lshape,
    parse_mesh,
    read_mesh,
    square,
    validate,
)

__all__ = [
    "Mesh",
    "MeshError",
    "SolverError",
    "bounds",
    "cli",
    "constants",
    "eigenvalues",
    "kappa",
    "lower_bound",
    "lshape",
    "parse_mesh",
    "read_mesh",
    "square",
    "validate",
]
