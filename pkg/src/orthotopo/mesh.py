"""Structured tetrahedral discretization of the generator cube.

The cube ``[0, L]^3`` is split into ``n_div^3`` hexahedral cells and every
cell into five linear tetrahedra.  The split alternates with the parity of
the cell index so that the diagonals drawn on shared cell faces coincide and
the mesh is conforming.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegion

# Local corner ids inside one hexahedral cell, keyed by (a, b, c) offsets.
_CORNER = {(a, b, c): a + 2 * b + 4 * c for c in (0, 1) for b in (0, 1) for a in (0, 1)}


def _tets_for_parity(parity: int) -> np.ndarray:
    if parity == 0:
        corners = [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
        central = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]
    else:
        corners = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]
        central = [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
    tets = []
    for c in corners:
        neighbours = []
        for axis in range(3):
            n = list(c)
            n[axis] = 1 - n[axis]
            neighbours.append(tuple(n))
        tets.append([_CORNER[c]] + [_CORNER[n] for n in neighbours])
    tets.append([_CORNER[c] for c in central])
    return np.array(tets, dtype=np.int64)


_LOCAL_TETS = (_tets_for_parity(0), _tets_for_parity(1))

# face name -> (normal axis, side, in-face axes)
FACES = {
    "x-": (0, 0, (1, 2)),
    "x+": (0, 1, (1, 2)),
    "y-": (1, 0, (0, 2)),
    "y+": (1, 1, (0, 2)),
    "z-": (2, 0, (0, 1)),
    "z+": (2, 1, (0, 1)),
}


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray
    elements: np.ndarray
    element_volume: np.ndarray
    side_length: float
    n_div: int

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def volume(self) -> float:
        return float(self.element_volume.sum())


@dataclass(frozen=True)
class Region:
    """A disk, annulus or whole face on one side of the cube.

    ``center`` is given in the face's own in-plane coordinates, i.e. (y, z)
    for x-faces, (x, z) for y-faces and (x, y) for z-faces.  ``tol=None``
    resolves to ``1e-6 * side_length`` at selection time.
    """

    kind: str
    face: str
    center: tuple[float, float] = (0.0, 0.0)
    r_inner: float = 0.0
    r_outer: float = 0.0
    tol: float | None = None

    def __post_init__(self):
        if self.kind not in ("disk_on_face", "annulus_on_face", "full_face"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.face not in FACES:
            raise ValueError(f"unknown face {self.face!r}")
        if self.kind != "full_face":
            if not 0.0 <= self.r_inner <= self.r_outer:
                raise ValueError("region radii must satisfy 0 <= r_inner <= r_outer")
            if self.kind == "annulus_on_face" and not self.r_inner < self.r_outer:
                raise ValueError("annulus needs r_inner < r_outer")
        if self.tol is not None and self.tol <= 0:
            raise ValueError("region tolerance must be positive")


def _tet_volumes(nodes: np.ndarray, elements: np.ndarray) -> np.ndarray:
    x = nodes[elements]
    edges = x[:, 1:, :] - x[:, :1, :]
    return np.linalg.det(edges) / 6.0


def build_structured_tet_mesh(n_div: int, side_length: float) -> Mesh:
    """Mesh the cube ``[0, side_length]^3`` with ``5 * n_div**3`` tetrahedra."""
    if int(n_div) != n_div or n_div < 1:
        raise ValueError("n_div must be a positive integer")
    if not side_length > 0:
        raise ValueError("side_length must be positive")
    n_div = int(n_div)
    n1 = n_div + 1
    coords = np.linspace(0.0, side_length, n1)
    # node id = i + n1*j + n1^2*k
    zz, yy, xx = np.meshgrid(coords, coords, coords, indexing="ij")
    nodes = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])

    offsets = np.zeros(8, dtype=np.int64)
    for (a, b, c), local_id in _CORNER.items():
        offsets[local_id] = a + n1 * b + n1 * n1 * c

    elements = []
    for k in range(n_div):
        for j in range(n_div):
            for i in range(n_div):
                base = i + n1 * j + n1 * n1 * k
                local = _LOCAL_TETS[(i + j + k) % 2]
                elements.append(base + offsets[local])
    elements = np.concatenate(elements, axis=0)

    vol = _tet_volumes(nodes, elements)
    flip = vol < 0
    elements[flip] = elements[flip][:, [0, 1, 3, 2]]
    vol = np.abs(vol)
    return Mesh(nodes=nodes, elements=elements, element_volume=vol,
                side_length=float(side_length), n_div=n_div)


def face_coordinates(mesh: Mesh, face: str) -> tuple[np.ndarray, np.ndarray]:
    """Return (signed distance of every node to the face plane, in-face 2D coords)."""
    axis, side, inplane = FACES[face]
    plane = mesh.side_length * side
    return mesh.nodes[:, axis] - plane, mesh.nodes[:, list(inplane)]


def select_nodes(mesh: Mesh, region: Region) -> np.ndarray:
    """Ascending indices of the nodes of ``mesh`` that lie inside ``region``."""
    tol = region.tol if region.tol is not None else 1e-6 * mesh.side_length
    dist, uv = face_coordinates(mesh, region.face)
    on_face = np.abs(dist) <= tol
    if region.kind == "full_face":
        inside = on_face
    else:
        r = np.hypot(uv[:, 0] - region.center[0], uv[:, 1] - region.center[1])
        inside = on_face & (r >= region.r_inner - tol) & (r <= region.r_outer + tol)
    ids = np.flatnonzero(inside)
    if ids.size == 0:
        raise EmptyRegion(f"region {region} selects no node")
    return ids


def integration_data(mesh: Mesh, e: int | np.ndarray | slice = slice(None)):
    """One-point rule for constant-strain tetrahedra.

    Returns ``(points, weights)`` with shapes ``(..., 1, 3)`` and ``(..., 1)``,
    where every weight equals ``J_p * w_p`` and sums to the element volume.
    """
    points = mesh.nodes[mesh.elements[e]].mean(axis=-2)[..., None, :]
    weights = np.asarray(mesh.element_volume[e])[..., None]
    return points, weights


def boundary_faces(mesh: Mesh, face: str, tol: float | None = None) -> np.ndarray:
    """Triangles (node triples) of the tetrahedra lying on one cube face."""
    tol = tol if tol is not None else 1e-6 * mesh.side_length
    dist, _ = face_coordinates(mesh, face)
    on = np.abs(dist) <= tol
    tris = []
    for drop in range(4):
        keep = [a for a in range(4) if a != drop]
        t = mesh.elements[:, keep]
        tris.append(t[on[t].all(axis=1)])
    return np.concatenate(tris, axis=0)


def face_incidence(mesh: Mesh) -> dict[tuple[int, int, int], int]:
    """Map each (sorted) triangular face to the number of tetrahedra sharing it."""
    faces = np.sort(mesh.elements[:, [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]], axis=2)
    keys, counts = np.unique(faces.reshape(-1, 3), axis=0, return_counts=True)
    return {tuple(int(v) for v in k): int(c) for k, c in zip(keys, counts)}
