import numpy as np
import pytest

from orthotopo.cases import CASE_NAMES, DEFAULT_CASES, build_case, tangential_forces, torque_about_z
from orthotopo.errors import DegenerateRadius, EmptyRegion
from orthotopo.fem import BoundarySpec, compliance, solve
from orthotopo.material import OrthotropicProps
from orthotopo.mesh import build_structured_tet_mesh


@pytest.fixture(scope="module")
def mesh12():
    return build_structured_tet_mesh(12, 100.0)


@pytest.mark.parametrize("name,k", [("tube", 15.0), ("elbow", 20.0), ("chair", 30.0), ("torsion", 20.0)])
def test_default_k(name, k):
    assert DEFAULT_CASES[name].k_vector == (k,) * 6


@pytest.mark.parametrize("name", CASE_NAMES)
def test_regions_and_force(mesh12, name):
    bc, _ = build_case(name, mesh12)
    assert len(bc.dirichlet_nodes) >= 3 and len(bc.neumann_nodes) > 0
    assert np.all(bc.dirichlet_values == 0.0)
    mags = np.linalg.norm(bc.neumann_forces, axis=1)
    assert mags.sum() == pytest.approx(10000.0, rel=1e-12)
    np.testing.assert_allclose(mags, 10000.0 / len(bc.neumann_nodes), rtol=1e-12)
    assert not set(bc.dirichlet_nodes) & set(bc.neumann_nodes)


def test_tube(mesh12):
    bc, _ = build_case("tube", mesh12)
    np.testing.assert_allclose(bc.total_force, [0.0, 0.0, 10000.0], atol=1e-9)
    assert np.all(mesh12.nodes[bc.dirichlet_nodes, 2] == 0.0)
    assert np.all(mesh12.nodes[bc.neumann_nodes, 2] == 100.0)


def test_elbow(mesh12):
    bc, _ = build_case("elbow", mesh12)
    np.testing.assert_allclose(bc.total_force, [0.0, 0.0, 10000.0], atol=1e-9)
    assert np.all(mesh12.nodes[bc.dirichlet_nodes, 0] == 0.0)


def test_elbow_compliance_sign_invariant():
    m = build_structured_tet_mesh(6, 100.0)
    p = OrthotropicProps.isotropic(np.full(m.n_elements, 200e3), 0.33)
    up, _ = build_case("elbow", m)
    down, _ = build_case("elbow", m, {"force_sign": -1.0})
    a, b = compliance(up, solve(m, p, up)), compliance(down, solve(m, p, down))
    assert a > 0 and b == pytest.approx(a, rel=1e-10)


def test_chair(mesh12):
    bc, _ = build_case("chair", mesh12)
    np.testing.assert_allclose(np.abs(bc.total_force), [0.0, 0.0, 10000.0], atol=1e-9)
    xy = mesh12.nodes[bc.dirichlet_nodes, :2]
    quadrant = (xy[:, 0] > 50).astype(int) + 2 * (xy[:, 1] > 50)
    counts = np.bincount(quadrant, minlength=4)
    assert np.all(counts > 0) and len(set(counts.tolist())) == 1


def test_torsion_direction_example():
    m = build_structured_tet_mesh(2, 100.0)
    node = int(np.flatnonzero((m.nodes[:, 0] == 100) & (m.nodes[:, 1] == 50) & (m.nodes[:, 2] == 100))[0])
    f = tangential_forces(m, np.array([node]), 10000.0)
    np.testing.assert_allclose(f[0], [0.0, 10000.0, 0.0], atol=1e-12)


def test_torsion_resultants(mesh12):
    bc, _ = build_case("torsion", mesh12)
    assert np.abs(bc.total_force).max() < 1e-6
    assert torque_about_z(mesh12, bc) > 0
    r = mesh12.nodes[bc.neumann_nodes, :2] - 50.0
    np.testing.assert_allclose((r * bc.neumann_forces[:, :2]).sum(1), 0.0, atol=1e-9)


def test_torsion_center_node_rejected(mesh12):
    center = int(np.flatnonzero((mesh12.nodes[:, 0] == 50) & (mesh12.nodes[:, 1] == 50)
                                & (mesh12.nodes[:, 2] == 100))[0])
    with pytest.raises(DegenerateRadius):
        tangential_forces(mesh12, np.array([center]), 1.0)


def test_overrides():
    m = build_structured_tet_mesh(4, 100.0)
    bc, spec = build_case("tube", m, {"force": 500.0, "k": 12.0})
    assert spec.k_vector == (12.0,) * 6
    assert bc.total_force[2] == pytest.approx(500.0)
    with pytest.raises(ValueError):
        build_case("tube", m, {"radius": 1.0})
    with pytest.raises(ValueError):
        build_case("bridge", m)
    with pytest.raises(EmptyRegion):
        build_case("tube", m, {"crown_inner": 0.72, "crown_outer": 0.8})


def test_supports_are_rigid_at_full_scale(mesh12):
    p = OrthotropicProps.isotropic(np.full(mesh12.n_elements, 200e3), 0.33)
    for name in CASE_NAMES:
        bc, _ = build_case(name, mesh12)
        assert isinstance(bc, BoundarySpec)
        sol = solve(mesh12, p, bc)
        assert np.all(np.isfinite(sol.u)) and compliance(bc, sol) > 0
