"""Per-element energy variables ("H") in strain and stress flavor.

A strain-flavored field satisfies ``psi = sum_i E_i H_i + sum_ij G_ij H_ij``
(volume-averaged density), a stress-flavored one ``psi = sum_i H_i / E_i +
sum_ij H_ij / G_ij``.  Columns follow :data:`orthotopo.material.H_NAMES`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fem import SolutionField
from .material import (
    OrthotropicProps,
    reduced_shear,
    reduced_volumetric_complementary,
    reduced_volumetric_direct,
)
from .mesh import Mesh, integration_data

log = logging.getLogger(__name__)

# Relative spread below which a slot counts as already homogeneous.
HOMOGENEOUS_RTOL = 1e-10


@dataclass
class HField:
    flavor: str  # "strain" | "stress"
    values: np.ndarray  # (n, 6)

    def __post_init__(self):
        if self.flavor not in ("strain", "stress"):
            raise ValueError(f"unknown H flavor {self.flavor!r}")


@dataclass
class HStats:
    mean: np.ndarray
    std: np.ndarray


def _averaged_quadratic(vec: np.ndarray, M: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sum_p v.M v J_p w_p / (2 sum_p J_p w_p)`` with a point axis of length 1."""
    v = vec[:, None, :]  # (n, n_p, 3)
    M = np.broadcast_to(M, (vec.shape[0], 3, 3))
    q = np.einsum("epi,eij,epj->ep", v, M, v)
    return (q * weights).sum(axis=1) / (2.0 * weights.sum(axis=1))


def compute_H_direct(sol: SolutionField, props: OrthotropicProps, mesh: Mesh) -> HField:
    """Strain-based variables from ``Dhat_i = D^v / (3 E_i)`` and the unit shear matrices."""
    _, w = integration_data(mesh)
    H = np.empty((mesh.n_elements, 6))
    for i in range(3):
        H[:, i] = _averaged_quadratic(sol.eps, reduced_volumetric_direct(props, i), w)
    for s, pair in enumerate((12, 13, 23)):
        H[:, 3 + s] = _averaged_quadratic(sol.gamma, reduced_shear(pair), w)
    neg = H[:, :3] < 0
    if neg.any():
        log.info("%d negative direct volumetric H values", int(neg.sum()))
    return HField("strain", H)


def compute_H_complementary(sol: SolutionField, props: OrthotropicProps, mesh: Mesh) -> HField:
    """Stress-based variables from the single-column compliance matrices."""
    _, w = integration_data(mesh)
    H = np.empty((mesh.n_elements, 6))
    for i in range(3):
        H[:, i] = _averaged_quadratic(sol.sigma, reduced_volumetric_complementary(i, props), w)
    for s, pair in enumerate((12, 13, 23)):
        H[:, 3 + s] = _averaged_quadratic(sol.tau, reduced_shear(pair), w)
    return HField("stress", H)


def to_strain_flavor(h: HField, props: OrthotropicProps) -> HField:
    """Convert stress-flavored H through ``H_eps = H_sigma / modulus**2``."""
    if h.flavor == "strain":
        return h
    return HField("strain", h.values / props.moduli ** 2)


def density_terms(h: HField, props: OrthotropicProps) -> np.ndarray:
    """Per-slot volume-averaged energy densities ``(n, 6)``."""
    m = props.moduli
    return h.values * m if h.flavor == "strain" else h.values / m


def energy_density(h: HField, props: OrthotropicProps) -> np.ndarray:
    return density_terms(h, props).sum(axis=1)


def total_energy(h: HField, props: OrthotropicProps, mesh: Mesh) -> float:
    """``sum_e psi_e * vol_e`` in N mm."""
    return float(np.dot(energy_density(h, props), mesh.element_volume))


def stats(h: HField | np.ndarray, active: np.ndarray | None = None) -> HStats:
    """Mean and population standard deviation per slot over active elements.

    ``active`` is an ``(n, m)`` boolean mask; a slot with no active element
    reports zero mean and zero spread.  A spread below ``HOMOGENEOUS_RTOL``
    times the largest active value of the whole field is reported as zero;
    strain-flavored slots share units, so one scale serves all of them.
    """
    values = h.values if isinstance(h, HField) else np.asarray(h, dtype=float)
    if active is None:
        active = np.ones(values.shape, dtype=bool)
    n_act = active.sum(axis=0)
    safe = np.maximum(n_act, 1)
    mean = np.where(active, values, 0.0).sum(axis=0) / safe
    dev = np.where(active, values - mean, 0.0)
    std = np.sqrt((dev ** 2).sum(axis=0) / safe)
    # round-off noise around a uniform field must not drive updates
    scale = np.where(active, np.abs(values), 0.0).max(initial=0.0)
    std = np.where(std <= HOMOGENEOUS_RTOL * scale, 0.0, std)
    return HStats(mean=mean, std=std)
