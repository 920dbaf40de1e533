"""Topology optimization of steady-state heat conduction.

Density-based design with SIMP conductivity on structured finite-volume
grids, multigrid-preconditioned conjugate gradient solvers with selectable
stopping measures, a one-shot single-iteration mode, and windowed Galerkin
reduced-order surrogates for the forward and adjoint systems.
"""

from .assembly import (
    SimpParams,
    assemble_diffusion,
    assemble_filter,
    simp_conductivity,
    simp_derivative,
    source_rhs,
)
from .config import RunConfig, parse_config, preset_config, render_config
from .driver import IterationRecord, RunResult, SolverStrategy, run_optimization
from .grid import BoundaryPatch, StructuredGrid, build_grid, neighbors
from .krylov import Criterion, SolveReport, StopCriterion, operator_inf_norm, pcg_solve
from .mma import MmaState, mma_update
from .multigrid import MgHierarchy, MgTopology, build_hierarchy, build_topology, v_cycle
from .rom import ReducedBasis, assess, basis_append, reduced_solve
from .topopt import ObjectiveSpec, design_gradient, objective, volume_constraint

__version__ = "0.1.0"

__all__ = [
    "BoundaryPatch",
    "Criterion",
    "IterationRecord",
    "MgHierarchy",
    "MgTopology",
    "MmaState",
    "ObjectiveSpec",
    "ReducedBasis",
    "RunConfig",
    "RunResult",
    "SimpParams",
    "SolveReport",
    "SolverStrategy",
    "StopCriterion",
    "StructuredGrid",
    "assemble_diffusion",
    "assemble_filter",
    "assess",
    "basis_append",
    "build_grid",
    "build_hierarchy",
    "build_topology",
    "design_gradient",
    "mma_update",
    "neighbors",
    "objective",
    "operator_inf_norm",
    "parse_config",
    "pcg_solve",
    "preset_config",
    "reduced_solve",
    "render_config",
    "run_optimization",
    "simp_conductivity",
    "simp_derivative",
    "source_rhs",
    "v_cycle",
    "volume_constraint",
]
