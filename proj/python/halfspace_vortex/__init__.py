"""Pseudo-spectral vorticity solver on the half space with norm tracking and viscosity sweeps."""

from ._core import (
    ConfigError,
    Grid,
    NumericalError,
    cumulative_norm,
    heat_dirichlet,
    heat_neumann,
    initial_vorticity,
    kinetic_energy,
    make_grid,
    manifest_json,
    parse_config,
    robin_g1,
    robin_residual,
    run_inviscid_limit,
    run_norm_tracking,
    solve_navier_stokes,
    velocity,
    weight_w,
)

__all__ = [
    "ConfigError",
    "Grid",
    "NumericalError",
    "cumulative_norm",
    "heat_dirichlet",
    "heat_neumann",
    "initial_vorticity",
    "kinetic_energy",
    "make_grid",
    "manifest_json",
    "parse_config",
    "robin_g1",
    "robin_residual",
    "run_inviscid_limit",
    "run_norm_tracking",
    "solve_navier_stokes",
    "velocity",
    "weight_w",
]
