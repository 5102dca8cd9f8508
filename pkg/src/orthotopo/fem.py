"""Linear elastostatics on constant-strain tetrahedra.

Global DOF ``3 * node + component``.  Element matrices are ``B^T D B * vol``
with a single integration point; the global matrix is assembled in element
order through a COO -> CSR conversion, which sums duplicates in a fixed order
and keeps results bit-reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonConvergence, SingularSystem
from .material import (
    OrthotropicProps,
    compliance_matrix,
    reduced_shear,
    reduced_volumetric_direct,
    stiffness_matrix,
)
from .mesh import Mesh, boundary_faces

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundarySpec:
    """Nodal boundary data of one load case.

    ``dirichlet_values`` holds prescribed displacements (mm); a NaN entry
    leaves that component free, so roller supports are expressible.
    ``neumann_forces`` are nodal forces (N).
    """

    dirichlet_nodes: np.ndarray
    dirichlet_values: np.ndarray
    neumann_nodes: np.ndarray
    neumann_forces: np.ndarray

    def __post_init__(self):
        dn = np.asarray(self.dirichlet_nodes, dtype=np.int64).reshape(-1)
        dv = np.asarray(self.dirichlet_values, dtype=float).reshape(-1, 3)
        nn = np.asarray(self.neumann_nodes, dtype=np.int64).reshape(-1)
        nf = np.asarray(self.neumann_forces, dtype=float).reshape(-1, 3)
        if dn.shape[0] != dv.shape[0] or nn.shape[0] != nf.shape[0]:
            raise ValueError("node and value arrays must have matching lengths")
        if len(np.unique(dn)) != len(dn):
            raise ValueError("duplicate Dirichlet node")
        object.__setattr__(self, "dirichlet_nodes", dn)
        object.__setattr__(self, "dirichlet_values", dv)
        object.__setattr__(self, "neumann_nodes", nn)
        object.__setattr__(self, "neumann_forces", nf)
        # a force acting on a prescribed component would be silently lost
        prescribed = {(int(n), c) for n, v in zip(dn, dv) for c in range(3) if not np.isnan(v[c])}
        for n, f in zip(nn, nf):
            for c in range(3):
                if f[c] != 0.0 and (int(n), c) in prescribed:
                    raise ValueError(f"node {n} has both a force and a prescribed displacement on component {c}")

    @classmethod
    def clamped(cls, fixed_nodes, load_nodes, forces) -> "BoundarySpec":
        fixed_nodes = np.asarray(fixed_nodes, dtype=np.int64)
        forces = np.broadcast_to(np.asarray(forces, dtype=float), (len(load_nodes), 3))
        return cls(fixed_nodes, np.zeros((len(fixed_nodes), 3)), load_nodes, forces)

    def force_vector(self, n_nodes: int) -> np.ndarray:
        f = np.zeros((n_nodes, 3))
        np.add.at(f, self.neumann_nodes, self.neumann_forces)
        return f.reshape(-1)

    def prescribed(self, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
        """(sorted prescribed DOF ids, their values)."""
        mask = ~np.isnan(self.dirichlet_values)
        dofs = (3 * self.dirichlet_nodes[:, None] + np.arange(3))[mask]
        vals = self.dirichlet_values[mask]
        order = np.argsort(dofs, kind="stable")
        return dofs[order], vals[order]

    @property
    def total_force(self) -> np.ndarray:
        return self.neumann_forces.sum(axis=0)

    def scaled(self, c: float) -> "BoundarySpec":
        return BoundarySpec(self.dirichlet_nodes, self.dirichlet_values * c,
                            self.neumann_nodes, self.neumann_forces * c)


@dataclass
class SolutionField:
    """Displacements and per-element Voigt strain/stress.

    ``strain[:, :3]`` is the longitudinal strain ``(eps1, eps2, eps3)`` and
    ``strain[:, 3:]`` the engineering shear ``(gamma12, gamma13, gamma23)``;
    ``stress`` follows the same layout ``(sigma, tau)``.  Constant-strain
    elements carry one integration point, so no point axis is stored.
    """

    u: np.ndarray
    strain: np.ndarray
    stress: np.ndarray
    residual: float

    @property
    def eps(self):
        return self.strain[:, :3]

    @property
    def gamma(self):
        return self.strain[:, 3:]

    @property
    def sigma(self):
        return self.stress[:, :3]

    @property
    def tau(self):
        return self.stress[:, 3:]


def shape_gradients(mesh: Mesh) -> np.ndarray:
    """Cartesian gradients of the four linear shape functions, ``(n, 4, 3)``."""
    x = mesh.nodes[mesh.elements]
    A = np.swapaxes(x[:, 1:, :] - x[:, :1, :], 1, 2)  # columns are edge vectors
    Ainv = np.linalg.inv(A)  # row a = d(xi_a)/dx
    grads = np.empty((mesh.n_elements, 4, 3))
    grads[:, 1:, :] = Ainv
    grads[:, 0, :] = -Ainv.sum(axis=1)
    return grads


def strain_displacement(mesh: Mesh) -> np.ndarray:
    """Constant-strain B operators, ``(n, 6, 12)``."""
    g = shape_gradients(mesh)
    B = np.zeros((mesh.n_elements, 6, 12))
    for a in range(4):
        dx, dy, dz = g[:, a, 0], g[:, a, 1], g[:, a, 2]
        c = 3 * a
        B[:, 0, c] = dx
        B[:, 1, c + 1] = dy
        B[:, 2, c + 2] = dz
        B[:, 3, c] = dy
        B[:, 3, c + 1] = dx
        B[:, 4, c] = dz
        B[:, 4, c + 2] = dx
        B[:, 5, c + 1] = dz
        B[:, 5, c + 2] = dy
    return B


def element_dofs(mesh: Mesh) -> np.ndarray:
    return (3 * mesh.elements[:, :, None] + np.arange(3)).reshape(mesh.n_elements, 12)


def element_stiffness(mesh: Mesh, props: OrthotropicProps, B: np.ndarray | None = None) -> np.ndarray:
    """Per-element 12x12 stiffness matrices, exactly symmetric."""
    if B is None:
        B = strain_displacement(mesh)
    D = stiffness_matrix(props)
    if D.ndim == 2:
        D = np.broadcast_to(D, (mesh.n_elements, 6, 6))
    Ke = np.einsum("eia,eij,ejb->eab", B, D, B, optimize=True)
    Ke *= mesh.element_volume[:, None, None]
    return 0.5 * (Ke + np.swapaxes(Ke, 1, 2))


def assemble(mesh: Mesh, props: OrthotropicProps, B: np.ndarray | None = None) -> sp.csr_matrix:
    """Global stiffness matrix (N/mm) in CSR format."""
    Ke = element_stiffness(mesh, props, B)
    dofs = element_dofs(mesh)
    rows = np.repeat(dofs, 12, axis=1).ravel()
    cols = np.tile(dofs, (1, 12)).ravel()
    n = 3 * mesh.n_nodes
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    # duplicate summation order differs between (i, j) and (j, i)
    K = (0.5 * (K + K.T)).tocsr()
    K.sort_indices()
    return K


def _rigid_modes(nodes: np.ndarray) -> np.ndarray:
    n = nodes.shape[0]
    R = np.zeros((3 * n, 6))
    for c in range(3):
        R[c::3, c] = 1.0
    x, y, z = nodes.T - nodes.mean(axis=0)[:, None]
    # rotations about x, y, z
    R[1::3, 3], R[2::3, 3] = -z, y
    R[0::3, 4], R[2::3, 4] = z, -x
    R[0::3, 5], R[1::3, 5] = -y, x
    return R


def _check_supports(mesh: Mesh, fixed: np.ndarray):
    if fixed.size == 0:
        raise SingularSystem("no prescribed displacement: rigid-body motion is free")
    R = _rigid_modes(mesh.nodes)[fixed]
    scale = np.abs(R).max()
    if np.linalg.matrix_rank(R, tol=1e-9 * scale * max(R.shape)) < 6:
        raise SingularSystem("prescribed displacements leave a rigid-body mode unconstrained")


REFINE_STEPS = 5


def solve_system(K: sp.spmatrix, f: np.ndarray, fixed: np.ndarray, values: np.ndarray,
                 method: str = "direct", rtol: float = 1e-10, maxiter: int = 20000) -> tuple[np.ndarray, float]:
    """Solve ``K u = f`` with the DOFs in ``fixed`` prescribed to ``values``.

    Dirichlet data is eliminated (row/column removal with substitution).  The
    direct path uses a SuperLU factorization; ``method="cg"`` runs Jacobi
    preconditioned conjugate gradients.  Returns ``(u, relative residual)``.
    """
    n = K.shape[0]
    free = np.setdiff1d(np.arange(n), fixed, assume_unique=True)
    u = np.zeros(n)
    u[fixed] = values
    K = K.tocsr()
    Kff = K[free][:, free].tocsc()
    rhs = f[free] - K[free][:, fixed] @ values
    if method == "direct":
        try:
            lu = spla.splu(Kff, permc_spec="MMD_AT_PLUS_A")
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from exc
        uf = lu.solve(rhs)
        # iterative refinement; badly conditioned stiffness may need a few steps
        scale = np.linalg.norm(rhs)
        for _ in range(REFINE_STEPS):
            r = rhs - Kff @ uf
            if np.linalg.norm(r) <= 0.1 * rtol * scale:
                break
            uf += lu.solve(r)
    elif method == "cg":
        d = Kff.diagonal()
        if np.any(d <= 0):
            raise SingularSystem("non-positive diagonal entry in reduced stiffness")
        M = sp.diags(1.0 / d)
        uf, info = spla.cg(Kff, rhs, rtol=rtol, atol=0.0, maxiter=maxiter, M=M)
        if info > 0:
            raise NonConvergence(f"CG did not reach rtol={rtol} in {maxiter} iterations")
        if info < 0:
            raise SingularSystem("CG breakdown")
    else:
        raise ValueError(f"unknown solver method {method!r}")
    if not np.all(np.isfinite(uf)):
        raise SingularSystem("non-finite displacement in solution")
    u[free] = uf
    res = rhs - Kff @ uf
    scale = np.linalg.norm(rhs)
    rel = float(np.linalg.norm(res) / scale) if scale > 0 else float(np.linalg.norm(res))
    return u, rel


def recover(mesh: Mesh, props: OrthotropicProps, u: np.ndarray, B: np.ndarray | None = None):
    """Element strains and stresses from nodal displacements."""
    if B is None:
        B = strain_displacement(mesh)
    ue = u[element_dofs(mesh)]
    strain = np.einsum("eij,ej->ei", B, ue)
    D = np.broadcast_to(stiffness_matrix(props), (strain.shape[0], 6, 6))
    stress = np.einsum("eij,ej->ei", D, strain)
    return strain, stress


def solve(mesh: Mesh, props: OrthotropicProps, bc: BoundarySpec, K: sp.spmatrix | None = None,
          B: np.ndarray | None = None, method: str = "direct") -> SolutionField:
    """Assemble (unless ``K`` is given), solve and recover strains/stresses."""
    fixed, values = bc.prescribed(mesh.n_nodes)
    _check_supports(mesh, fixed)
    if B is None:
        B = strain_displacement(mesh)
    if K is None:
        K = assemble(mesh, props, B)
    f = bc.force_vector(mesh.n_nodes)
    u, rel = solve_system(K, f, fixed, values, method=method)
    if rel > 1e-10:
        log.warning("linear solve residual %.3e above 1e-10", rel)
    strain, stress = recover(mesh, props, u, B)
    return SolutionField(u=u, strain=strain, stress=stress, residual=rel)


def compliance(bc: BoundarySpec, sol: SolutionField) -> float:
    """External work ``f . u`` of the applied nodal forces (N mm)."""
    u = sol.u.reshape(-1, 3)
    return float(np.sum(bc.neumann_forces * u[bc.neumann_nodes]))


def _quad(v: np.ndarray, M: np.ndarray) -> np.ndarray:
    M = np.broadcast_to(M, (v.shape[0],) + M.shape[-2:])
    return np.einsum("ei,eij,ej->e", v, M, v)


def element_energy(mesh: Mesh, sol: SolutionField, props: OrthotropicProps) -> np.ndarray:
    """Six-way split of every element's strain energy (N mm), shape ``(n, 6)``.

    Columns 0-2 are ``1/2 eps . (E_i Dhat_i) eps * vol`` (each a third of the
    longitudinal energy); columns 3-5 are ``1/2 G_ij gamma_ij^2 * vol``.
    """
    vol = mesh.element_volume
    out = np.empty((mesh.n_elements, 6))
    eps, gam = sol.eps, sol.gamma
    for i in range(3):
        Mi = reduced_volumetric_direct(props, i) * props.E[..., i][..., None, None]
        out[:, i] = 0.5 * _quad(eps, Mi) * vol
    for s, pair in enumerate((12, 13, 23)):
        Ms = reduced_shear(pair) * props.G[..., s][..., None, None]
        out[:, 3 + s] = 0.5 * _quad(gam, Ms) * vol
    return out


def element_strain_energy(mesh: Mesh, props: OrthotropicProps, u: np.ndarray) -> np.ndarray:
    """``1/2 u_e^T K_e u_e`` per element, assembled independently of the strain path."""
    Ke = element_stiffness(mesh, props)
    ue = u[element_dofs(mesh)]
    return 0.5 * np.einsum("ea,eab,eb->e", ue, Ke, ue)


def complementary_energy(mesh: Mesh, sol: SolutionField, props: OrthotropicProps) -> np.ndarray:
    """``1/2 sigma . S sigma * vol`` per element using the compliance matrix directly."""
    S = compliance_matrix(props)
    return 0.5 * _quad(sol.stress, S) * mesh.element_volume


def face_traction_loads(mesh: Mesh, face: str, traction) -> tuple[np.ndarray, np.ndarray]:
    """Consistent nodal forces of a uniform traction (MPa) on one cube face.

    Each boundary triangle passes a third of ``traction * area`` to each of
    its vertices.  Returns ``(nodes, forces)``.
    """
    tris = boundary_faces(mesh, face)
    x = mesh.nodes[tris]
    area = 0.5 * np.linalg.norm(np.cross(x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]), axis=1)
    f = np.zeros((mesh.n_nodes, 3))
    share = area[:, None] / 3.0 * np.asarray(traction, dtype=float)[None, :]
    for a in range(3):
        np.add.at(f, tris[:, a], share)
    nodes = np.unique(tris)
    return nodes, f[nodes]
