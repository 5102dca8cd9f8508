"""The four benchmark load cases on the generator cube.

Region radii are not fixed by the benchmark description; the defaults below
are fractions of the side length and every value can be overridden.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DegenerateRadius
from .fem import BoundarySpec
from .mesh import Mesh, Region, select_nodes

CASE_NAMES = ("tube", "elbow", "chair", "torsion")


@dataclass(frozen=True)
class CaseSpec:
    """Geometry (as fractions of the side length), load and default ``k``."""

    name: str
    force: float = 10000.0
    k: float = 15.0
    crown_inner: float = 0.25
    crown_outer: float = 0.45
    disk_radius: float = 0.20
    leg_radius: float = 0.10
    leg_offset: float = 0.20
    force_sign: float = 1.0

    def __post_init__(self):
        if self.name not in CASE_NAMES:
            raise ValueError(f"unknown case {self.name!r}; expected one of {CASE_NAMES}")

    @property
    def k_vector(self) -> tuple:
        return (float(self.k),) * 6

    def with_overrides(self, overrides: dict) -> "CaseSpec":
        known = {f.name for f in fields(self)} - {"name"}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown case parameters: {sorted(unknown)}")
        return replace(self, **overrides)


DEFAULT_CASES = {
    "tube": CaseSpec("tube", k=15.0),
    "elbow": CaseSpec("elbow", k=20.0),
    "chair": CaseSpec("chair", k=30.0, force_sign=-1.0),
    "torsion": CaseSpec("torsion", k=20.0),
}


def _center(mesh: Mesh):
    half = 0.5 * mesh.side_length
    return (half, half)


def _even_split(nodes: np.ndarray, total: np.ndarray) -> np.ndarray:
    return np.tile(np.asarray(total, dtype=float) / len(nodes), (len(nodes), 1))


def tube(mesh: Mesh, spec: CaseSpec = DEFAULT_CASES["tube"]) -> BoundarySpec:
    """Clamped bottom crown, axial load spread over the top crown."""
    L = mesh.side_length
    crown = dict(kind="annulus_on_face", center=_center(mesh),
                 r_inner=spec.crown_inner * L, r_outer=spec.crown_outer * L)
    fixed = select_nodes(mesh, Region(face="z-", **crown))
    loaded = select_nodes(mesh, Region(face="z+", **crown))
    forces = _even_split(loaded, [0.0, 0.0, spec.force_sign * spec.force])
    return BoundarySpec.clamped(fixed, loaded, forces)


def elbow(mesh: Mesh, spec: CaseSpec = DEFAULT_CASES["elbow"]) -> BoundarySpec:
    """Clamped disk on the x = 0 face, axial (z) load on a top-face disk."""
    L = mesh.side_length
    r = spec.disk_radius * L
    fixed = select_nodes(mesh, Region("disk_on_face", "x-", _center(mesh), 0.0, r))
    loaded = select_nodes(mesh, Region("disk_on_face", "z+", _center(mesh), 0.0, r))
    forces = _even_split(loaded, [0.0, 0.0, spec.force_sign * spec.force])
    return BoundarySpec.clamped(fixed, loaded, forces)


def chair(mesh: Mesh, spec: CaseSpec = DEFAULT_CASES["chair"]) -> BoundarySpec:
    """Four clamped leg disks on the bottom face, seat load on a top disk."""
    L = mesh.side_length
    a, b = spec.leg_offset * L, (1.0 - spec.leg_offset) * L
    legs = []
    for c in ((a, a), (b, a), (a, b), (b, b)):
        legs.append(select_nodes(mesh, Region("disk_on_face", "z-", c, 0.0, spec.leg_radius * L)))
    fixed = np.unique(np.concatenate(legs))
    if len(fixed) != sum(len(g) for g in legs):
        raise ValueError("chair leg disks overlap")
    loaded = select_nodes(mesh, Region("disk_on_face", "z+", _center(mesh), 0.0, spec.disk_radius * L))
    forces = _even_split(loaded, [0.0, 0.0, spec.force_sign * spec.force])
    return BoundarySpec.clamped(fixed, loaded, forces)


def tangential_forces(mesh: Mesh, nodes: np.ndarray, total: float) -> np.ndarray:
    """Equal-magnitude forces perpendicular to the radius from the top-face centre.

    The sense makes ``(r x f) . e_z`` positive at every node; the magnitudes
    add up to ``total``.
    """
    cx, cy = _center(mesh)
    r = mesh.nodes[nodes, :2] - np.array([cx, cy])
    norm = np.hypot(r[:, 0], r[:, 1])
    if np.any(norm <= 1e-9 * mesh.side_length):
        raise DegenerateRadius("a loaded node coincides with the face centre")
    t = np.column_stack([-r[:, 1], r[:, 0], np.zeros(len(nodes))]) / norm[:, None]
    return t * (abs(total) / len(nodes))


def torsion(mesh: Mesh, spec: CaseSpec = DEFAULT_CASES["torsion"]) -> BoundarySpec:
    """Clamped bottom crown, twisting tangential load on the top crown."""
    L = mesh.side_length
    crown = dict(kind="annulus_on_face", center=_center(mesh),
                 r_inner=spec.crown_inner * L, r_outer=spec.crown_outer * L)
    fixed = select_nodes(mesh, Region(face="z-", **crown))
    loaded = select_nodes(mesh, Region(face="z+", **crown))
    return BoundarySpec.clamped(fixed, loaded, tangential_forces(mesh, loaded, spec.force))


BUILDERS = {"tube": tube, "elbow": elbow, "chair": chair, "torsion": torsion}


def build_case(name: str, mesh: Mesh, overrides: dict | None = None) -> tuple[BoundarySpec, CaseSpec]:
    if name not in BUILDERS:
        raise ValueError(f"unknown case {name!r}; expected one of {CASE_NAMES}")
    spec = DEFAULT_CASES[name]
    if overrides:
        spec = spec.with_overrides(overrides)
    return BUILDERS[name](mesh, spec), spec


def torque_about_z(mesh: Mesh, bc: BoundarySpec) -> float:
    cx, cy = _center(mesh)
    r = mesh.nodes[bc.neumann_nodes, :2] - np.array([cx, cy])
    f = bc.neumann_forces
    return float(np.sum(r[:, 0] * f[:, 1] - r[:, 1] * f[:, 0]))
