"""Verification engine for an explicit family of Ricci-flat metrics of holonomy SU(2(n+1))."""

from .curvature import curvature, ricci_components
from .holonomy import build_omega, check_closed, complex_structure, holonomy_dimension
from .liealg import build_algebra, exterior_derivative_table, translate_basis
from .metrics import (
    MetricAnsatz,
    RadialProfile,
    boundary_slope,
    family_G,
    integrate_ode,
    ode_residual,
    profile_W,
)

__version__ = "0.1.0"

__all__ = [
    "MetricAnsatz",
    "RadialProfile",
    "boundary_slope",
    "build_algebra",
    "build_omega",
    "check_closed",
    "complex_structure",
    "curvature",
    "exterior_derivative_table",
    "family_G",
    "holonomy_dimension",
    "integrate_ode",
    "ode_residual",
    "profile_W",
    "ricci_components",
    "translate_basis",
]
