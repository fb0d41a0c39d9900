"""2D compressible Navier-Stokes flux reconstruction with immersed boundaries."""
from .gas import GasModel, PositivityError
from .mesh import CartesianMesh, build_mesh, uniform_mesh
from .solver import (
    FarField,
    FlowField,
    Periodic,
    fr_gradient,
    ldg_viscous_flux,
    rhs_eval,
    rk_step,
    rusanov_flux,
    strang_step,
)
from .diagnostics import compute_forces, locate_probe, probe_sample, strouhal, surface_cp
from .simulation import NumericalFailure, Simulation

__all__ = [
    "CartesianMesh", "FarField", "FlowField", "GasModel", "NumericalFailure", "Periodic",
    "PositivityError", "Simulation", "build_mesh", "compute_forces", "fr_gradient",
    "ldg_viscous_flux", "locate_probe", "probe_sample", "rhs_eval", "rk_step", "rusanov_flux",
    "strang_step", "strouhal", "surface_cp", "uniform_mesh",
]
