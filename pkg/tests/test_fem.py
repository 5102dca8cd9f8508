import time

import numpy as np
import pytest

from conftest import roller_patch_bc
from orthotopo.errors import SingularSystem
from orthotopo.fem import (
    BoundarySpec,
    SolutionField,
    assemble,
    compliance,
    complementary_energy,
    element_energy,
    element_stiffness,
    element_strain_energy,
    face_traction_loads,
    solve,
)
from orthotopo.material import OrthotropicProps
from orthotopo.mesh import Mesh, Region, build_structured_tet_mesh, select_nodes

E, NU = 200e3, 0.33


def iso(mesh, E=E):
    return OrthotropicProps.isotropic(np.full(mesh.n_elements, E), NU)


def ortho(mesh, seed=0):
    rng = np.random.default_rng(seed)
    n = mesh.n_elements
    Ev = rng.uniform(100e3, 300e3, (n, 3))
    G = rng.uniform(20e3, 75e3, (n, 3))
    return OrthotropicProps(E=Ev, G=G, nu=np.full((n, 3), 0.25))


def clamp_bottom_push_top(mesh, fz=1000.0):
    fixed = select_nodes(mesh, Region("full_face", "z-"))
    top = select_nodes(mesh, Region("disk_on_face", "z+", (50.0, 50.0), 0.0, 30.0))
    return BoundarySpec.clamped(fixed, top, [0.3 * fz, -0.2 * fz, fz])


def test_single_tet_rigid_modes():
    nodes = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    m = Mesh(nodes, np.array([[0, 1, 2, 3]]), np.array([1.0 / 6.0]), 1.0, 1)
    Ke = element_stiffness(m, iso(m))[0]
    np.testing.assert_array_equal(Ke, Ke.T)
    w = np.linalg.eigvalsh(Ke)
    assert np.sum(np.abs(w) < 1e-9 * w.max()) == 6
    assert np.all(w > -1e-9 * w.max())


def test_translation_row_sums_vanish(mesh4):
    K = assemble(mesh4, ortho(mesh4))
    assert abs(K - K.T).max() == 0.0
    for axis in range(3):
        t = np.zeros((mesh4.n_nodes, 3))
        t[:, axis] = 1.0
        assert np.abs(K @ t.reshape(-1)).max() < 1e-9 * abs(K).max()


def test_patch_test_uniaxial(mesh4):
    sigma = 5.0  # MPa
    bc = roller_patch_bc(mesh4, sigma)
    t0 = time.perf_counter()
    sol = solve(mesh4, iso(mesh4), bc)
    elapsed = time.perf_counter() - t0
    x = mesh4.nodes
    exact = np.column_stack([-NU * sigma / E * x[:, 0], -NU * sigma / E * x[:, 1], sigma / E * x[:, 2]])
    assert np.abs(sol.u.reshape(-1, 3) - exact).max() < 1e-8
    np.testing.assert_allclose(sol.stress[:, 2], sigma, rtol=1e-9)
    assert np.abs(sol.stress[:, [0, 1, 3, 4, 5]]).max() < 1e-9 * sigma
    assert elapsed < 1.0


def test_zero_force_zero_displacement(mesh4):
    bc = clamp_bottom_push_top(mesh4, 0.0)
    sol = solve(mesh4, iso(mesh4), bc)
    assert np.all(sol.u == 0.0)
    assert compliance(bc, sol) == 0.0


def test_linearity_and_residual(mesh4):
    p = ortho(mesh4)
    bc = clamp_bottom_push_top(mesh4)
    a = solve(mesh4, p, bc)
    b = solve(mesh4, p, bc.scaled(2.0))
    np.testing.assert_allclose(b.u, 2.0 * a.u, rtol=1e-10, atol=1e-14)
    assert a.residual <= 1e-10


def test_prescribed_values_exact(mesh4):
    fixed = select_nodes(mesh4, Region("full_face", "z-"))
    top = select_nodes(mesh4, Region("full_face", "z+"))
    nodes = np.concatenate([fixed, top])
    values = np.zeros((len(nodes), 3))
    values[len(fixed):, 2] = 0.01
    bc = BoundarySpec(nodes, values, np.zeros(0, dtype=int), np.zeros((0, 3)))
    sol = solve(mesh4, iso(mesh4), bc)
    np.testing.assert_array_equal(sol.u.reshape(-1, 3)[nodes], values)


def test_cg_matches_direct(mesh4):
    p = ortho(mesh4, 3)
    bc = clamp_bottom_push_top(mesh4)
    a = solve(mesh4, p, bc)
    b = solve(mesh4, p, bc, method="cg")
    np.testing.assert_allclose(b.u, a.u, rtol=1e-7, atol=1e-9 * np.abs(a.u).max())


def test_rigid_body_motion_detected(mesh4):
    bc = BoundarySpec.clamped([0], [5], [0.0, 0.0, 1.0])
    with pytest.raises(SingularSystem):
        solve(mesh4, iso(mesh4), bc)


def test_compliance_is_twice_energy(mesh4):
    p = ortho(mesh4, 1)
    bc = clamp_bottom_push_top(mesh4)
    sol = solve(mesh4, p, bc)
    W = element_strain_energy(mesh4, p, sol.u).sum()
    assert compliance(bc, sol) == pytest.approx(2.0 * W, rel=1e-9)
    np.testing.assert_allclose(complementary_energy(mesh4, sol, p).sum(), W, rtol=1e-10)


def test_energy_split_sums_to_element_energy(mesh4):
    p = ortho(mesh4, 2)
    sol = solve(mesh4, p, clamp_bottom_push_top(mesh4))
    split = element_energy(mesh4, sol, p)
    np.testing.assert_allclose(split.sum(axis=1), element_strain_energy(mesh4, p, sol.u), rtol=1e-10)


def test_pure_shear_energy(mesh2):
    n = mesh2.n_elements
    gamma = 1e-3
    strain = np.zeros((n, 6))
    strain[:, 3] = gamma
    p = ortho(mesh2)
    sol = SolutionField(np.zeros(3 * mesh2.n_nodes), strain, strain * 0.0, 0.0)
    split = element_energy(mesh2, sol, p)
    np.testing.assert_allclose(split[:, 3], 0.5 * p.G12 * gamma ** 2 * mesh2.element_volume, rtol=1e-14)
    assert np.all(split[:, [0, 1, 2, 4, 5]] == 0.0)
    zero = SolutionField(sol.u, 0.0 * strain, 0.0 * strain, 0.0)
    assert np.all(element_energy(mesh2, zero, p) == 0.0)


def test_face_traction_resultant():
    m = build_structured_tet_mesh(3, 30.0)
    nodes, f = face_traction_loads(m, "x+", [2.0, 0.0, -1.0])
    np.testing.assert_allclose(f.sum(axis=0), [1800.0, 0.0, -900.0], rtol=1e-12)
    assert np.all(m.nodes[nodes, 0] == 30.0)


def test_boundary_spec_validation():
    with pytest.raises(ValueError):
        BoundarySpec([0, 0], np.zeros((2, 3)), [], np.zeros((0, 3)))
    with pytest.raises(ValueError):
        BoundarySpec.clamped([1], [1], [0.0, 0.0, 1.0])
    # a roller leaves the other components free for loading
    BoundarySpec([1], [[np.nan, np.nan, 0.0]], [1], [[1.0, 0.0, 0.0]])
