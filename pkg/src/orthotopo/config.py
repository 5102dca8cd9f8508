"""JSON run configuration.

Moduli are given in GPa in the document and converted to MPa when building
the optimizer objects.  Every key is optional; unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from .cases import CASE_NAMES, DEFAULT_CASES, CaseSpec
from .errors import ConfigError
from .material import PoissonMode, PropertyBounds
from .optimizer import GPA, OptimConfig

MATERIAL_ALIASES = {"iso": "isotropic", "ortho": "orthotropic",
                    "isotropic": "isotropic", "orthotropic": "orthotropic"}


@dataclass
class RunConfig:
    case: str = "tube"
    material_mode: str = "orthotropic"
    approach: str = "complementary"
    n_div: int = 12
    side_length: float = 100.0
    E0: float = 200.0
    G0: float = 75.19
    nu0: float = 0.33
    E_min: float = 50.0
    E_max: float = 500.0
    G_min: float = 7.519
    G_max: float = 75.19
    k: list | None = None  # None: the case default, six equal entries
    epsilon: float = 0.01
    max_iters: int = 100
    poisson_mode: str = "symmetry"
    kappa: float = 0.66
    high_energy_factor: float = 1.0
    stats_over_frozen: bool = False
    solver: str = "direct"
    geometry: dict = field(default_factory=dict)
    output_dir: str = "out"
    export_every: int = 0  # 0: final state only

    def case_spec(self) -> CaseSpec:
        return DEFAULT_CASES[self.case].with_overrides(self.geometry)

    def k_vector(self) -> tuple:
        if self.k is None:
            return self.case_spec().k_vector
        return tuple(float(v) for v in self.k)

    def bounds(self) -> PropertyBounds:
        return PropertyBounds(self.E_min * GPA, self.E_max * GPA, self.G_min * GPA, self.G_max * GPA)

    def optim_config(self) -> OptimConfig:
        return OptimConfig(approach=self.approach, material_mode=self.material_mode, k=self.k_vector(),
                           bounds=self.bounds(), poisson=PoissonMode(self.poisson_mode, self.kappa),
                           epsilon=self.epsilon, max_iters=self.max_iters,
                           high_energy_factor=self.high_energy_factor,
                           stats_over_frozen=self.stats_over_frozen, solver=self.solver)


_NUMBER = (int, float)


def _is_num(v) -> bool:
    return isinstance(v, _NUMBER) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def validate(cfg: RunConfig) -> list[str]:
    """One message per offending field; empty when the config is usable."""
    errs = []

    def need(ok, name, msg):
        if not ok:
            errs.append(f"{name}: {msg}")
        return ok

    need(cfg.case in CASE_NAMES, "case", f"must be one of {list(CASE_NAMES)}, got {cfg.case!r}")
    need(cfg.material_mode in ("isotropic", "orthotropic"), "material_mode",
         f"must be 'isotropic' or 'orthotropic', got {cfg.material_mode!r}")
    need(cfg.approach in ("direct", "complementary"), "approach",
         f"must be 'direct' or 'complementary', got {cfg.approach!r}")
    need(cfg.solver in ("direct", "cg"), "solver", f"must be 'direct' or 'cg', got {cfg.solver!r}")
    need(cfg.poisson_mode in ("symmetry", "kappa_sum"), "poisson_mode",
         f"must be 'symmetry' or 'kappa_sum', got {cfg.poisson_mode!r}")
    if need(_is_int(cfg.n_div), "n_div", "must be an integer"):
        need(cfg.n_div >= 1, "n_div", "must be >= 1")
    if need(_is_int(cfg.max_iters), "max_iters", "must be an integer"):
        need(cfg.max_iters >= 1, "max_iters", "must be >= 1")
    if need(_is_int(cfg.export_every), "export_every", "must be an integer"):
        need(cfg.export_every >= 0, "export_every", "must be >= 0")
    positive = ("side_length", "E0", "G0", "E_min", "E_max", "G_min", "G_max", "epsilon", "high_energy_factor")
    for name in positive:
        v = getattr(cfg, name)
        if need(_is_num(v), name, "must be a finite number"):
            need(v > 0, name, f"must be > 0, got {v}")
    for name in ("nu0", "kappa"):
        need(_is_num(getattr(cfg, name)), name, "must be a finite number")
    need(isinstance(cfg.stats_over_frozen, bool), "stats_over_frozen", "must be true or false")
    if not errs:
        need(cfg.E_min < cfg.E_max, "E_max", "must exceed E_min")
        need(cfg.G_min < cfg.G_max, "G_max", "must exceed G_min")
        need(cfg.E_min <= cfg.E0 <= cfg.E_max, "E0", "must lie within [E_min, E_max]")
        if cfg.material_mode == "orthotropic":
            need(cfg.G_min <= cfg.G0 <= cfg.G_max, "G0", "must lie within [G_min, G_max]")
        need(-1.0 < cfg.nu0 < 0.5, "nu0", "must lie in (-1, 0.5) for an admissible initial state")
        if cfg.poisson_mode == "kappa_sum":
            need(abs(cfg.kappa) < 2.0, "kappa", "must satisfy |kappa| < 2")
    if cfg.k is not None:
        ok = isinstance(cfg.k, list) and len(cfg.k) == 6 and all(_is_num(v) for v in cfg.k)
        if need(ok, "k", "must be a list of six numbers"):
            need(all(v > 0 for v in cfg.k), "k", "entries must be > 0")
    if need(isinstance(cfg.geometry, dict), "geometry", "must be an object"):
        known = {f.name for f in fields(CaseSpec)} - {"name"}
        for key, v in cfg.geometry.items():
            if need(key in known, f"geometry.{key}", f"unknown key; expected one of {sorted(known)}"):
                need(_is_num(v), f"geometry.{key}", "must be a finite number")
    need(isinstance(cfg.output_dir, str) and cfg.output_dir != "", "output_dir", "must be a non-empty string")
    return errs


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(["<root>: must be a JSON object"])
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError([f"{key}: unknown key" for key in unknown])
    data = dict(data)
    if isinstance(data.get("material_mode"), str):
        data["material_mode"] = MATERIAL_ALIASES.get(data["material_mode"], data["material_mode"])
    cfg = RunConfig(**data)
    errs = validate(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON document; blank text yields the defaults."""
    if not text.strip():
        return from_dict({})
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"<document>: invalid JSON ({exc})"]) from exc
    return from_dict(data)


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n"
