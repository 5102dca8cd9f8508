import numpy as np
import pytest

from orthotopo.errors import EmptyRegion
from orthotopo.mesh import (
    Region,
    boundary_faces,
    build_structured_tet_mesh,
    face_incidence,
    integration_data,
    select_nodes,
)


@pytest.fixture(scope="module")
def mesh12():
    return build_structured_tet_mesh(12, 100.0)


def test_full_scale_counts(mesh12):
    assert mesh12.n_elements == 8640
    assert mesh12.n_nodes == 2197


def test_single_cell():
    m = build_structured_tet_mesh(1, 100.0)
    assert m.n_elements == 5
    assert m.n_nodes == 8
    assert m.volume == pytest.approx(1e6, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 12])
def test_positive_volumes_sum_to_cube(n):
    m = build_structured_tet_mesh(n, 7.5)
    assert np.all(m.element_volume > 0)
    assert m.volume == pytest.approx(7.5 ** 3, rel=1e-9)


def test_node_numbering():
    m = build_structured_tet_mesh(3, 30.0)
    i, j, k = 1, 2, 3
    np.testing.assert_allclose(m.nodes[i + 4 * j + 16 * k], [10.0, 20.0, 30.0])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_conforming(n):
    m = build_structured_tet_mesh(n, 1.0)
    counts = np.array(list(face_incidence(m).values()))
    assert set(counts.tolist()) <= {1, 2}
    # the only unshared faces are the 2 n^2 triangles on each of the 6 cube faces
    assert (counts == 1).sum() == 12 * n * n
    total = sum(len(boundary_faces(m, f)) for f in ("x-", "x+", "y-", "y+", "z-", "z+"))
    assert total == 12 * n * n


def test_full_face_selection(mesh12):
    nodes = select_nodes(mesh12, Region("full_face", "z-"))
    assert len(nodes) == 169
    assert np.all(mesh12.nodes[nodes, 2] == 0.0)
    assert np.all(np.diff(nodes) > 0)


def test_degenerate_disk_selects_one_node(mesh12):
    nodes = select_nodes(mesh12, Region("disk_on_face", "z+", (50.0, 50.0), 0.0, 0.0))
    assert len(nodes) == 1
    np.testing.assert_allclose(mesh12.nodes[nodes[0]], [50.0, 50.0, 100.0])


def test_annulus_beyond_half_diagonal_is_empty(mesh12):
    with pytest.raises(EmptyRegion):
        select_nodes(mesh12, Region("annulus_on_face", "z-", (50.0, 50.0), 71.0, 80.0))


def test_annulus_radii(mesh12):
    nodes = select_nodes(mesh12, Region("annulus_on_face", "z+", (50.0, 50.0), 25.0, 45.0))
    r = np.hypot(mesh12.nodes[nodes, 0] - 50.0, mesh12.nodes[nodes, 1] - 50.0)
    assert np.all((r >= 25.0 - 1e-4) & (r <= 45.0 + 1e-4))
    assert np.all(mesh12.nodes[nodes, 2] == 100.0)


def test_in_face_coordinates_on_x_face(mesh12):
    # x-faces use (y, z) as in-plane coordinates
    nodes = select_nodes(mesh12, Region("disk_on_face", "x-", (25.0, 75.0), 0.0, 0.0))
    np.testing.assert_allclose(mesh12.nodes[nodes[0]], [0.0, 25.0, 75.0])


def test_region_validation():
    with pytest.raises(ValueError):
        Region("disk_on_face", "z+", (0, 0), 2.0, 1.0)
    with pytest.raises(ValueError):
        Region("annulus_on_face", "z+", (0, 0), 1.0, 1.0)
    with pytest.raises(ValueError):
        Region("disk_on_face", "w+", (0, 0), 0.0, 1.0)


def test_one_point_rule_regular_tet():
    from orthotopo.mesh import Mesh
    nodes = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    vol = 8.0 / 3.0  # edge 2*sqrt(2): a^3 / (6 sqrt 2)
    m = Mesh(nodes, np.array([[0, 1, 2, 3]]), np.array([vol]), 2.0, 1)
    pts, w = integration_data(m, 0)
    assert w.sum() == pytest.approx(vol, rel=1e-14)
    np.testing.assert_allclose(pts.reshape(3), [0, 0, 0], atol=1e-15)


def test_weights_match_volumes(mesh12):
    _, w = integration_data(mesh12)
    assert np.all(w > 0)
    np.testing.assert_allclose(w.sum(axis=1), mesh12.element_volume, rtol=1e-12)
