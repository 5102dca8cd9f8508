"""Linear orthotropic constitutive model.

Material axes 1, 2, 3 coincide with the global x, y, z axes.  Voigt strain is
ordered ``(eps1, eps2, eps3, gamma12, gamma13, gamma23)`` with engineering
shear strains, which makes the constitutive matrix block diagonal: a 3x3
longitudinal ("volumetric") block coupling the Young moduli through the
Poisson ratios, and a diagonal shear block.

Every function is vectorized over a leading element axis: the fields of
:class:`OrthotropicProps` may be arrays of shape ``(3,)`` (one element) or
``(n, 3)``.  Units are MPa.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import KappaOutOfRange, NearSingular

PAIRS = ((0, 1), (0, 2), (1, 2))  # 12, 13, 23
SLOT_NAMES = ("E1", "E2", "E3", "G12", "G13", "G23")
H_NAMES = ("H1", "H2", "H3", "H12", "H13", "H23")


def _as3(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = np.full(3, float(a))
    return a


@dataclass(frozen=True)
class OrthotropicProps:
    """Elastic state of one element or of a whole element field.

    ``nu = (nu12, nu13, nu23)`` are the independent Poisson ratios and
    ``nu_minor = (nu21, nu31, nu32)`` the dependent ones; when ``nu_minor`` is
    omitted it is completed through ``nu_ji = nu_ij * E_j / E_i``.
    """

    E: np.ndarray
    G: np.ndarray
    nu: np.ndarray
    nu_minor: np.ndarray = field(default=None)

    def __post_init__(self):
        E, G, nu = _as3(self.E), _as3(self.G), _as3(self.nu)
        E, G, nu = np.broadcast_arrays(E, G, nu)
        object.__setattr__(self, "E", np.array(E))
        object.__setattr__(self, "G", np.array(G))
        object.__setattr__(self, "nu", np.array(nu))
        if self.nu_minor is None:
            object.__setattr__(self, "nu_minor", symmetric_minor(self.E, self.nu))
        else:
            object.__setattr__(self, "nu_minor",
                               np.array(np.broadcast_to(_as3(self.nu_minor), self.E.shape)))

    @classmethod
    def uniform(cls, n: int, E, G, nu) -> "OrthotropicProps":
        E, G, nu = _as3(E), _as3(G), _as3(nu)
        return cls(E=np.tile(E, (n, 1)), G=np.tile(G, (n, 1)), nu=np.tile(nu, (n, 1)))

    @classmethod
    def isotropic(cls, E, nu, n: int | None = None) -> "OrthotropicProps":
        E = np.asarray(E, dtype=float)
        G = E / (2.0 * (1.0 + nu))
        if n is None and E.ndim == 0:
            return cls(E=np.full(3, float(E)), G=np.full(3, float(G)), nu=np.full(3, nu))
        E = np.broadcast_to(E, (n,) if n is not None else E.shape)
        G = np.broadcast_to(G, E.shape)
        return cls(E=np.repeat(E[:, None], 3, axis=1), G=np.repeat(G[:, None], 3, axis=1),
                   nu=np.full((E.shape[0], 3), nu))

    @property
    def moduli(self) -> np.ndarray:
        """The six optimized slots ``(E1, E2, E3, G12, G13, G23)``."""
        return np.concatenate([self.E, self.G], axis=-1)

    def with_moduli(self, moduli: np.ndarray, poisson: "PoissonMode | None" = None) -> "OrthotropicProps":
        moduli = np.asarray(moduli, dtype=float)
        p = replace(self, E=moduli[..., :3].copy(), G=moduli[..., 3:].copy(), nu_minor=None)
        if poisson is not None:
            p = complete_poisson(p, poisson)
        return p

    def __len__(self):
        return 1 if self.E.ndim == 1 else self.E.shape[0]

    def __getitem__(self, idx) -> "OrthotropicProps":
        return OrthotropicProps(E=self.E[idx], G=self.G[idx], nu=self.nu[idx],
                                nu_minor=self.nu_minor[idx])

    # Named accessors, handy in tests and reports.
    E1 = property(lambda self: self.E[..., 0])
    E2 = property(lambda self: self.E[..., 1])
    E3 = property(lambda self: self.E[..., 2])
    G12 = property(lambda self: self.G[..., 0])
    G13 = property(lambda self: self.G[..., 1])
    G23 = property(lambda self: self.G[..., 2])
    nu12 = property(lambda self: self.nu[..., 0])
    nu13 = property(lambda self: self.nu[..., 1])
    nu23 = property(lambda self: self.nu[..., 2])
    nu21 = property(lambda self: self.nu_minor[..., 0])
    nu31 = property(lambda self: self.nu_minor[..., 1])
    nu32 = property(lambda self: self.nu_minor[..., 2])


@dataclass(frozen=True)
class PropertyBounds:
    E_min: float
    E_max: float
    G_min: float
    G_max: float

    def __post_init__(self):
        if not 0 < self.E_min < self.E_max:
            raise ValueError("need 0 < E_min < E_max")
        if not 0 < self.G_min < self.G_max:
            raise ValueError("need 0 < G_min < G_max")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.E_min] * 3 + [self.G_min] * 3)

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.E_max] * 3 + [self.G_max] * 3)


@dataclass(frozen=True)
class PoissonMode:
    mode: str = "symmetry"
    kappa: float = 0.66

    def __post_init__(self):
        if self.mode not in ("symmetry", "kappa_sum"):
            raise ValueError(f"unknown Poisson mode {self.mode!r}")
        if self.mode == "kappa_sum" and not abs(self.kappa) < 2.0:
            raise KappaOutOfRange(f"|kappa| must be < 2, got {self.kappa}")


def symmetric_minor(E: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """``(nu21, nu31, nu32)`` from ``(nu12, nu13, nu23)`` by reciprocity."""
    E = np.asarray(E, dtype=float)
    nu = np.asarray(nu, dtype=float)
    out = np.empty(np.broadcast_shapes(E.shape, nu.shape))
    for s, (i, j) in enumerate(PAIRS):
        out[..., s] = nu[..., s] * E[..., j] / E[..., i]
    return out


def complete_poisson(p: OrthotropicProps, mode: PoissonMode) -> OrthotropicProps:
    """Fill in the dependent Poisson ratios for the current Young moduli.

    ``symmetry`` keeps ``nu12, nu13, nu23`` and applies reciprocity.
    ``kappa_sum`` imposes ``nu_ij + nu_ik = kappa`` for every direction ``i``
    together with reciprocity and solves the resulting 3x3 linear system for
    ``(nu12, nu13, nu23)``.
    """
    if mode.mode == "symmetry":
        return replace(p, nu_minor=symmetric_minor(p.E, p.nu))
    if not abs(mode.kappa) < 2.0:
        raise KappaOutOfRange(f"|kappa| must be < 2, got {mode.kappa}")
    E = np.atleast_2d(p.E)
    r21 = E[:, 1] / E[:, 0]
    r31 = E[:, 2] / E[:, 0]
    r32 = E[:, 2] / E[:, 1]
    # unknowns (nu12, nu13, nu23):
    #   nu12 + nu13 = k ; nu21 + nu23 = k ; nu31 + nu32 = k
    A = np.zeros((E.shape[0], 3, 3))
    A[:, 0, 0] = 1.0
    A[:, 0, 1] = 1.0
    A[:, 1, 0] = r21
    A[:, 1, 2] = 1.0
    A[:, 2, 1] = r31
    A[:, 2, 2] = r32
    rhs = np.full((E.shape[0], 3, 1), mode.kappa)
    nu = np.linalg.solve(A, rhs)[..., 0].reshape(p.E.shape)
    return replace(p, nu=nu, nu_minor=symmetric_minor(p.E, nu))


def volumetric_compliance(p: OrthotropicProps) -> np.ndarray:
    """Longitudinal compliance block, shape ``(..., 3, 3)`` in 1/MPa."""
    E = p.E
    S = np.empty(E.shape[:-1] + (3, 3))
    S[..., 0, 0] = 1.0 / E[..., 0]
    S[..., 1, 1] = 1.0 / E[..., 1]
    S[..., 2, 2] = 1.0 / E[..., 2]
    S[..., 0, 1] = -p.nu21 / E[..., 1]
    S[..., 0, 2] = -p.nu31 / E[..., 2]
    S[..., 1, 2] = -p.nu32 / E[..., 2]
    S[..., 1, 0] = -p.nu12 / E[..., 0]
    S[..., 2, 0] = -p.nu13 / E[..., 0]
    S[..., 2, 1] = -p.nu23 / E[..., 1]
    return S


def volumetric_stiffness(p: OrthotropicProps, max_cond: float = 1e12) -> np.ndarray:
    """Longitudinal stiffness block, the numerical inverse of the compliance block.

    The result is symmetrized so that assembled stiffness matrices are exactly
    symmetric.  Raises :class:`NearSingular` when the compliance block is too
    ill-conditioned.
    """
    S = volumetric_compliance(p)
    cond = np.linalg.cond(S)
    if np.any(~np.isfinite(cond)) or np.any(cond > max_cond):
        raise NearSingular(f"compliance block condition number {np.max(cond):.3e} > {max_cond:.1e}")
    D = np.linalg.inv(S)
    return 0.5 * (D + np.swapaxes(D, -1, -2))


def shear_stiffness(p: OrthotropicProps) -> np.ndarray:
    G = p.G
    D = np.zeros(G.shape[:-1] + (3, 3))
    for s in range(3):
        D[..., s, s] = G[..., s]
    return D


def shear_compliance(p: OrthotropicProps) -> np.ndarray:
    G = p.G
    S = np.zeros(G.shape[:-1] + (3, 3))
    for s in range(3):
        S[..., s, s] = 1.0 / G[..., s]
    return S


def stiffness_matrix(p: OrthotropicProps) -> np.ndarray:
    """Full 6x6 Voigt stiffness ``blockdiag(D^v, D^d)``."""
    Dv = volumetric_stiffness(p)
    D = np.zeros(Dv.shape[:-2] + (6, 6))
    D[..., :3, :3] = Dv
    D[..., 3:, 3:] = shear_stiffness(p)
    return D


def compliance_matrix(p: OrthotropicProps) -> np.ndarray:
    S = np.zeros(p.E.shape[:-1] + (6, 6))
    S[..., :3, :3] = volumetric_compliance(p)
    S[..., 3:, 3:] = shear_compliance(p)
    return S


def reduced_volumetric_direct(p: OrthotropicProps, i: int) -> np.ndarray:
    """Dimensionless ``D^v / (3 E_i)`` for direction ``i`` in {0, 1, 2}.

    Summing ``E_i`` times these over the three directions restores ``D^v``;
    the split is not explicit in ``E_i`` since ``D^v`` couples all moduli.
    """
    return volumetric_stiffness(p) / (3.0 * p.E[..., i])[..., None, None]


def reduced_volumetric_complementary(i: int, p: OrthotropicProps) -> np.ndarray:
    """Single-column matrix holding ``(1, -nu_ij, -nu_ik)`` in column ``i``.

    Column ``i`` of the compliance block multiplied by ``E_i``, hence free of
    ``E_i``; ``sum_i M_i / E_i`` is the compliance block.
    """
    column = {
        0: (1.0, -p.nu12, -p.nu13),
        1: (-p.nu21, 1.0, -p.nu23),
        2: (-p.nu31, -p.nu32, 1.0),
    }[i]
    M = np.zeros(p.E.shape[:-1] + (3, 3))
    for r, v in enumerate(column):
        M[..., r, i] = v
    return M


def reduced_shear(pair: int | str) -> np.ndarray:
    """Unit matrix selecting the shear component of ``pair`` (12, 13 or 23)."""
    index = {12: 0, 13: 1, 23: 2}[int(pair)]
    M = np.zeros((3, 3))
    M[index, index] = 1.0
    return M


@dataclass
class ConstraintReport:
    satisfied: np.ndarray
    violations: list[str]
    pair_margin: np.ndarray
    triple_margin: np.ndarray

    def __bool__(self):
        return bool(np.all(self.satisfied))


def pair_margin(E: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """``sqrt(E_i/E_j) - |nu_ij|`` for the pairs 12, 13, 23 (positive = admissible)."""
    out = np.empty(np.broadcast_shapes(E.shape, nu.shape))
    for s, (i, j) in enumerate(PAIRS):
        out[..., s] = np.sqrt(E[..., i] / E[..., j]) - np.abs(nu[..., s])
    return out


def triple_margin(p: OrthotropicProps) -> np.ndarray:
    """``1/2 (1 - nu12 nu21 - nu13 nu31 - nu23 nu32) - nu12 nu23 nu31``."""
    return (0.5 * (1.0 - p.nu12 * p.nu21 - p.nu13 * p.nu31 - p.nu23 * p.nu32)
            - p.nu12 * p.nu23 * p.nu31)


def check_constraints(p: OrthotropicProps) -> ConstraintReport:
    """Evaluate the orthotropic admissibility conditions.

    Checks non-negative Young and shear moduli, ``|nu_ij| < sqrt(E_i/E_j)`` for
    the three pairs and the triple-product condition.  Violations are listed
    as ``"<clause>@<element>"`` strings (element index omitted for a single
    element).
    """
    E, G = np.atleast_2d(p.E), np.atleast_2d(p.G)
    pm = pair_margin(p.E, p.nu)
    tm = triple_margin(p)
    pm2, tm1 = np.atleast_2d(pm), np.atleast_1d(tm)
    ok_E = E >= 0
    ok_G = G >= 0
    ok_pair = pm2 > 0
    ok_triple = tm1 > 0
    satisfied = ok_E.all(1) & ok_G.all(1) & ok_pair.all(1) & ok_triple
    violations = []
    single = p.E.ndim == 1
    for e in np.flatnonzero(~satisfied):
        tag = "" if single else f"@{e}"
        for s in range(3):
            if not ok_E[e, s]:
                violations.append(f"E{s + 1}>=0{tag}")
        for s, name in enumerate(("12", "13", "23")):
            if not ok_G[e, s]:
                violations.append(f"G{name}>=0{tag}")
        for s, name in enumerate(("12", "13", "23")):
            if not ok_pair[e, s]:
                violations.append(f"|nu{name}|<sqrt(E{name[0]}/E{name[1]}){tag}")
        if not ok_triple[e]:
            violations.append(f"triple-product{tag}")
    if single:
        satisfied = satisfied[0]
    return ConstraintReport(satisfied=np.asarray(satisfied), violations=violations,
                            pair_margin=pm, triple_margin=tm)
