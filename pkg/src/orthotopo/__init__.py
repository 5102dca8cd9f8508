"""Topology optimization of per-element orthotropic elastic properties on a tetrahedral cube."""

from .cases import CASE_NAMES, DEFAULT_CASES, CaseSpec, build_case
from .config import RunConfig, parse_config, serialize_config
from .energy import HField, compute_H_complementary, compute_H_direct, total_energy
from .errors import (
    ConfigError,
    DegenerateRadius,
    EmptyRegion,
    IrreparableElement,
    KappaOutOfRange,
    NearSingular,
    NonConvergence,
    OrthoTopoError,
    SingularSystem,
)
from .export import export_history, export_vtk
from .fem import BoundarySpec, SolutionField, assemble, compliance, solve
from .material import (
    OrthotropicProps,
    PoissonMode,
    PropertyBounds,
    check_constraints,
    complete_poisson,
    compliance_matrix,
    stiffness_matrix,
)
from .mesh import Mesh, Region, build_structured_tet_mesh, select_nodes
from .optimizer import (
    OptimConfig,
    RunResult,
    apply_freezing,
    base_update,
    check_convergence,
    compute_alpha,
    enforce_constraints,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "CASE_NAMES", "DEFAULT_CASES", "CaseSpec", "build_case",
    "RunConfig", "parse_config", "serialize_config",
    "HField", "compute_H_complementary", "compute_H_direct", "total_energy",
    "ConfigError", "DegenerateRadius", "EmptyRegion", "IrreparableElement", "KappaOutOfRange",
    "NearSingular", "NonConvergence", "OrthoTopoError", "SingularSystem",
    "export_history", "export_vtk",
    "BoundarySpec", "SolutionField", "assemble", "compliance", "solve",
    "OrthotropicProps", "PoissonMode", "PropertyBounds", "check_constraints", "complete_poisson",
    "compliance_matrix", "stiffness_matrix",
    "Mesh", "Region", "build_structured_tet_mesh", "select_nodes",
    "OptimConfig", "RunResult", "apply_freezing", "base_update", "check_convergence",
    "compute_alpha", "enforce_constraints", "run",
]
