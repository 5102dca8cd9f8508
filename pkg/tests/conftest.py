import numpy as np
import pytest

from orthotopo.fem import BoundarySpec, face_traction_loads
from orthotopo.mesh import build_structured_tet_mesh, face_coordinates


def roller_patch_bc(mesh, traction_z):
    """Symmetry rollers on x=0, y=0, z=0 and a uniform z-traction on z=L."""
    tol = 1e-9 * mesh.side_length
    x = mesh.nodes
    values = np.full((mesh.n_nodes, 3), np.nan)
    for axis in range(3):
        values[np.abs(x[:, axis]) < tol, axis] = 0.0
    nodes = np.flatnonzero(~np.all(np.isnan(values), axis=1))
    load_nodes, forces = face_traction_loads(mesh, "z+", [0.0, 0.0, traction_z])
    return BoundarySpec(nodes, values[nodes], load_nodes, forces)


def dilatation_bc(mesh, c):
    """Every boundary node displaced by ``u = c x`` (uniform strain state)."""
    L, tol = mesh.side_length, 1e-9 * mesh.side_length
    x = mesh.nodes
    on = np.any((np.abs(x) < tol) | (np.abs(x - L) < tol), axis=1)
    nodes = np.flatnonzero(on)
    return BoundarySpec(nodes, c * x[nodes], np.zeros(0, dtype=int), np.zeros((0, 3)))


@pytest.fixture(scope="session")
def mesh4():
    return build_structured_tet_mesh(4, 100.0)


@pytest.fixture(scope="session")
def mesh2():
    return build_structured_tet_mesh(2, 100.0)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
