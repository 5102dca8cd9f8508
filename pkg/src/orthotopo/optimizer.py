"""Elastic-property update loop.

Each iteration solves the equilibrium problem with the current moduli,
measures the spread of the per-element energy variables and moves every
modulus towards homogenizing them:

* direct approach:        ``M <- M * (1 + alpha)``
* complementary approach: ``M <- M / (1 - alpha)``

with ``alpha = (H - mean(H)) / (std(H) * k)`` per slot.  Updated moduli are
clamped to the bound box, the orthotropic admissibility conditions are
restored, and slots sitting on a bound are frozen for the rest of the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import energy as en
from .errors import IrreparableElement, NonConvergence
from .fem import BoundarySpec, SolutionField, compliance, solve, strain_displacement
from .material import (
    PAIRS,
    OrthotropicProps,
    PoissonMode,
    PropertyBounds,
    check_constraints,
    complete_poisson,
    pair_margin,
    triple_margin,
)
from .mesh import Mesh

log = logging.getLogger(__name__)

ALPHA_CAP = 1.0 - 1e-6
REPAIR_MARGIN = 1e-6
REPAIR_SWEEPS = 10

GPA = 1000.0  # MPa per GPa

DEFAULT_BOUNDS = PropertyBounds(E_min=50 * GPA, E_max=500 * GPA, G_min=7.519 * GPA, G_max=75.19 * GPA)


@dataclass(frozen=True)
class OptimConfig:
    approach: str = "complementary"
    material_mode: str = "orthotropic"
    k: tuple = (15.0,) * 6
    bounds: PropertyBounds = DEFAULT_BOUNDS
    poisson: PoissonMode = PoissonMode()
    epsilon: float = 0.01
    max_iters: int = 100
    high_energy_factor: float = 1.0
    stats_over_frozen: bool = False
    solver: str = "direct"

    def __post_init__(self):
        if self.approach not in ("direct", "complementary"):
            raise ValueError(f"unknown approach {self.approach!r}")
        if self.material_mode not in ("isotropic", "orthotropic"):
            raise ValueError(f"unknown material mode {self.material_mode!r}")
        k = tuple(float(v) for v in np.broadcast_to(np.asarray(self.k, dtype=float), (6,)))
        if any(v <= 0 for v in k):
            raise ValueError("update parameters k must be positive")
        object.__setattr__(self, "k", k)
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be an integer >= 1")
        if not self.high_energy_factor > 0:
            raise ValueError("high_energy_factor must be positive")

    @property
    def n_slots(self) -> int:
        return 1 if self.material_mode == "isotropic" else 6


@dataclass
class IterationRecord:
    iter: int
    W_total: float
    compliance: float
    s_H: np.ndarray
    frozen_count: int
    repairs: int


@dataclass
class FreezeMask:
    frozen: np.ndarray
    value: np.ndarray

    @classmethod
    def empty(cls, n: int, m: int) -> "FreezeMask":
        return cls(np.zeros((n, m), dtype=bool), np.full((n, m), np.nan))

    @property
    def count(self) -> int:
        return int(self.frozen.sum())


@dataclass
class IterationState:
    """What a ``run`` callback sees after each solve (before the update)."""

    iter: int
    props: OrthotropicProps
    solution: SolutionField
    H_direct: en.HField
    H_complementary: en.HField
    H_strain: np.ndarray
    record: IterationRecord
    mask: FreezeMask


@dataclass
class RunResult:
    props: OrthotropicProps
    history: list[IterationRecord]
    converged: bool
    mask: FreezeMask
    solution: SolutionField
    H_strain: en.HField
    density: np.ndarray

    @property
    def iterations(self) -> int:
        return len(self.history)

    @property
    def compliance(self) -> float:
        return self.history[-1].compliance


def compute_alpha(h: np.ndarray | en.HField, st: en.HStats, k) -> np.ndarray:
    """``(H - mean) / (std * k)`` per slot; zero where the slot is homogeneous."""
    values = h.values if isinstance(h, en.HField) else np.asarray(h, dtype=float)
    k = np.broadcast_to(np.asarray(k, dtype=float), st.std.shape)
    denom = st.std * k
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, (values - st.mean) / safe, 0.0)


def update_moduli(moduli: np.ndarray, alpha: np.ndarray, approach: str,
                  lower, upper, frozen: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Apply the base update rule and clamp; frozen slots keep their value.

    Returns the new moduli and the number of complementary steps whose
    ``alpha`` had to be capped below 1.
    """
    moduli = np.asarray(moduli, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    capped = 0
    if approach == "direct":
        new = moduli * (1.0 + alpha)
    elif approach == "complementary":
        over = alpha >= ALPHA_CAP
        if frozen is not None:
            over &= ~frozen
        capped = int(over.sum())
        if capped:
            log.debug("capping %d complementary update steps with alpha >= 1", capped)
        new = moduli / (1.0 - np.minimum(alpha, ALPHA_CAP))
    else:
        raise ValueError(f"unknown approach {approach!r}")
    new = np.clip(new, lower, upper)
    if frozen is not None:
        new = np.where(frozen, moduli, new)
    return new, capped


def base_update(props: OrthotropicProps, alpha: np.ndarray, approach: str, bounds: PropertyBounds,
                mask: FreezeMask | None = None, poisson: PoissonMode = PoissonMode()) -> OrthotropicProps:
    """One orthotropic base stiffness update of all six moduli."""
    frozen = None if mask is None else mask.frozen
    new, _ = update_moduli(props.moduli, alpha, approach, bounds.lower, bounds.upper, frozen)
    return props.with_moduli(new, poisson)


def apply_freezing(moduli: np.ndarray, lower, upper, mask: FreezeMask) -> FreezeMask:
    """Freeze every slot sitting on a bound; already frozen slots stay frozen."""
    moduli = np.asarray(moduli, dtype=float)
    at_bound = (moduli <= lower) | (moduli >= upper)
    newly = at_bound & ~mask.frozen
    frozen = mask.frozen | newly
    value = np.where(newly, moduli, mask.value)
    return FreezeMask(frozen, value)


def check_convergence(W_prev: float | None, W_curr: float, epsilon: float) -> bool:
    if W_prev is None:
        return False
    if W_prev == 0.0:
        # unloaded structure: nothing to optimize once the energy stays at zero
        return W_curr == 0.0
    return abs(W_curr - W_prev) / W_prev <= epsilon


# -- admissibility repair -----------------------------------------------------

def _complete(E: np.ndarray, nu: np.ndarray, poisson: PoissonMode) -> OrthotropicProps:
    p = OrthotropicProps(E=E, G=np.ones(3), nu=nu)
    return complete_poisson(p, poisson)


def _admissible(E, nu, poisson, margin=REPAIR_MARGIN) -> bool:
    # the triple-product margin is proportional to det of the compliance block
    p = _complete(E, nu, poisson)
    return bool(np.all(pair_margin(p.E, p.nu) > 0) and triple_margin(p) >= margin)


# bisections aim past the acceptance margin so round-off cannot undo them
_AIM = 2.0 * REPAIR_MARGIN


def _bisect_modulus(E, nu, slot, target, poisson, steps=60):
    """Move ``E[slot]`` from its value towards ``target`` just far enough to be admissible."""
    E_far = E.copy()
    E_far[slot] = target
    if not _admissible(E_far, nu, poisson, _AIM):
        return None
    lo, hi = np.log(E[slot]), np.log(target)  # lo infeasible, hi feasible
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        trial = E.copy()
        trial[slot] = np.exp(mid)
        if _admissible(trial, nu, poisson, _AIM):
            hi = mid
        else:
            lo = mid
    out = E.copy()
    out[slot] = np.exp(hi)
    return out


def _retreat(E, nu, previous, poisson, steps=60):
    """Smallest log-space step from ``E`` back toward admissible ``previous``."""
    if previous is None:
        return None
    # never demand more than the previous state offers, so margins cannot decay
    margin = min(_AIM, float(triple_margin(_complete(previous, nu, poisson))))
    if not margin > 0 or not _admissible(previous, nu, poisson, margin):
        return None
    a, b = np.log(E), np.log(previous)
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if _admissible(np.exp(a + mid * (b - a)), nu, poisson, margin):
            hi = mid
        else:
            lo = mid
    if hi == 1.0:
        return np.array(previous, dtype=float)
    # slots that agree (frozen ones) must survive the log round trip bit-exactly
    return np.where(E == previous, E, np.exp(a + hi * (b - a)))


def _repair_element(E, nu, high, frozen, bounds, poisson, previous=None):
    """Restore admissibility of one element's Young moduli; returns (E, moves).

    Single-modulus moves are tried first.  If they cannot succeed (a move may
    need two moduli at once) the element falls back toward ``previous``, its
    last admissible state, which shares the frozen values.
    """
    E = E.copy()
    moves = 0
    for _ in range(REPAIR_SWEEPS):
        if _admissible(E, nu, poisson):
            return E, moves
        for s, (i, j) in enumerate(PAIRS):
            p = _complete(E, nu, poisson)
            if pair_margin(p.E, p.nu)[s] > 0:
                continue
            n2 = p.nu[s] ** 2
            stiffen = (i, min(n2 * E[j] * (1 + REPAIR_MARGIN), bounds.E_max))
            soften = (j, max(E[i] / n2 * (1 - REPAIR_MARGIN), bounds.E_min))
            for slot, value in ((stiffen, soften) if high else (soften, stiffen)):
                if frozen[slot]:
                    continue
                E[slot] = value
                moves += 1
                break
        p = _complete(E, nu, poisson)
        if np.all(pair_margin(p.E, p.nu) > 0) and triple_margin(p) < REPAIR_MARGIN:
            up = [(s, bounds.E_max) for s in np.argsort(E, kind="stable")]
            down = [(s, bounds.E_min) for s in np.argsort(-E, kind="stable")]
            for slot, target in (up + down if high else down + up):
                if frozen[slot]:
                    continue
                fixed = _bisect_modulus(E, nu, slot, target, poisson)
                if fixed is not None:
                    E = fixed
                    moves += 1
                    break
    if _admissible(E, nu, poisson):
        return E, moves
    fallback = _retreat(E, nu, previous, poisson)
    if fallback is not None:
        return fallback, moves + 1
    raise IrreparableElement(f"could not restore admissibility for E={E}, nu={nu}")


def enforce_constraints(props: OrthotropicProps, density: np.ndarray, mean_density: float,
                        high_energy_factor: float, bounds: PropertyBounds,
                        poisson: PoissonMode = PoissonMode(),
                        frozen: np.ndarray | None = None,
                        previous: OrthotropicProps | None = None) -> tuple[OrthotropicProps, int]:
    """Adjust Young moduli of inadmissible elements.

    Elements whose energy density reaches ``high_energy_factor * mean_density``
    are repaired by stiffening (raising the smaller modulus of a violated pair
    to ``nu_ij^2 E_j``); the others by softening (lowering the larger one to
    ``E_i / nu_ij^2``), each with a relative margin of 1e-6.  A remaining
    triple-product violation is resolved by bisecting the extreme modulus.
    Admissible elements whose triple margin fell below that same margin are
    treated like violators, keeping every compliance block well conditioned.
    Frozen slots are never touched; the alternative move is used instead.
    When no single-modulus move works, the element is pulled back toward its
    moduli in ``previous`` (assumed admissible).
    Returns the repaired properties and the number of elements changed.
    """
    report = check_constraints(props)
    # elements that drifted to within the margin are as fragile as violators
    bad = np.flatnonzero(~np.atleast_1d(report.satisfied)
                         | (np.atleast_1d(report.triple_margin) < REPAIR_MARGIN))
    if bad.size == 0:
        return props, 0
    E = np.array(props.E, dtype=float, copy=True)
    nu = np.array(props.nu, dtype=float, copy=True)
    if frozen is None:
        frozen = np.zeros(E.shape[:-1] + (6,), dtype=bool)
    density = np.atleast_1d(density)
    E_prev = None if previous is None else np.asarray(previous.E, dtype=float)
    for e in bad:
        high = density[e] >= high_energy_factor * mean_density
        prev = None if E_prev is None else E_prev[e]
        E[e], _ = _repair_element(E[e], nu[e], high, frozen[e, :3], bounds, poisson, prev)
    repaired = props.with_moduli(np.concatenate([E, props.G], axis=-1), poisson)
    log.debug("repaired %d inadmissible elements", bad.size)
    return repaired, int(bad.size)


# -- driver -------------------------------------------------------------------

def initial_props(n: int, config: OptimConfig, E0=200 * GPA, G0=75.19 * GPA, nu0=0.33) -> OrthotropicProps:
    if config.material_mode == "isotropic":
        return OrthotropicProps.isotropic(np.full(n, float(E0)), nu0)
    p = OrthotropicProps.uniform(n, E0, G0, nu0)
    return complete_poisson(p, config.poisson)


def _strain_H(config: OptimConfig, props, hd: en.HField, hc: en.HField) -> np.ndarray:
    """Strain-level variables that drive ``alpha`` for the configured variant."""
    if config.material_mode == "isotropic":
        # whole element energy with the single Young modulus factored out
        psi = en.energy_density(hd, props)
        return (psi / props.E[:, 0])[:, None]
    if config.approach == "direct":
        return hd.values
    return en.to_strain_flavor(hc, props).values


def run(mesh: Mesh, bc: BoundarySpec, config: OptimConfig = OptimConfig(),
        props: OrthotropicProps | None = None,
        callback: Callable[[IterationState], None] | None = None) -> RunResult:
    """Iterate solve -> measure -> update until the energy settles.

    Convergence is declared at iteration ``t >= 2`` when the relative change of
    the total elastic energy between two successive solves is at most
    ``config.epsilon``.  The returned properties are those of the last solve.
    Hitting ``max_iters`` first raises :class:`NonConvergence` carrying the
    partial :class:`RunResult` as ``result``.
    """
    n = mesh.n_elements
    iso = config.material_mode == "isotropic"
    m = config.n_slots
    if props is None:
        props = initial_props(n, config)
    if iso:
        lower, upper = np.array([config.bounds.E_min]), np.array([config.bounds.E_max])
        k = np.array(config.k[:1])
        nu_iso = float(props.nu12[0])
    else:
        lower, upper = config.bounds.lower, config.bounds.upper
        k = np.array(config.k)
    B = strain_displacement(mesh)
    mask = FreezeMask.empty(n, m)
    history: list[IterationRecord] = []
    W_prev = None
    converged = False
    vol = mesh.element_volume

    for it in range(1, config.max_iters + 1):
        sol = solve(mesh, props, bc, B=B, method=config.solver)
        hd = en.compute_H_direct(sol, props, mesh)
        hc = en.compute_H_complementary(sol, props, mesh)
        h_eps = _strain_H(config, props, hd, hc)
        if config.approach == "direct" or iso:
            W = en.total_energy(hd, props, mesh)
        else:
            W = en.total_energy(hc, props, mesh)
        C = compliance(bc, sol)
        active = np.ones_like(mask.frozen) if config.stats_over_frozen else ~mask.frozen
        st = en.stats(h_eps, active)
        converged = check_convergence(W_prev, W, config.epsilon)
        record = IterationRecord(iter=it, W_total=W, compliance=C, s_H=st.std.copy(),
                                 frozen_count=mask.count, repairs=0)
        if callback is not None:
            callback(IterationState(it, props, sol, hd, hc, h_eps, record, mask))
        history.append(record)
        log.info("iter %3d  W=%.6g  C=%.6g  frozen=%d", it, W, C, mask.count)
        density = en.energy_density(hd, props)
        if converged or it == config.max_iters:
            break

        alpha = compute_alpha(h_eps, st, k)
        moduli = props.E[:, :1] if iso else props.moduli
        new, _ = update_moduli(moduli, alpha, config.approach, lower, upper, mask.frozen)
        if iso:
            props = OrthotropicProps.isotropic(new[:, 0], nu_iso)
            repairs = 0
        else:
            before = props
            props = props.with_moduli(new, config.poisson)
            mean_density = float(np.dot(density, vol) / vol.sum())
            props, repairs = enforce_constraints(props, density, mean_density, config.high_energy_factor,
                                                 config.bounds, config.poisson, mask.frozen, before)
        moduli = props.E[:, :1] if iso else props.moduli
        mask = apply_freezing(moduli, lower, upper, mask)
        record.frozen_count = mask.count
        record.repairs = repairs
        W_prev = W

    result = RunResult(props=props, history=history, converged=converged, mask=mask, solution=sol,
                       H_strain=en.HField("strain", h_eps), density=density)
    if not converged:
        raise NonConvergence(f"no convergence within {config.max_iters} iterations", result)
    return result
