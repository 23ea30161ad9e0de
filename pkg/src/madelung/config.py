"""
Experiment configuration: a strict pydantic schema plus builders that turn
named initial-data families into solver inputs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, field_validator

from .density_geometry import CotangentPoint, CotangentTangent
from .field_core import ComplexField, PeriodicGrid, RealField
from .sampling import random_cotangent_point, random_tangent
from .wave_geometry import WaveFunction

PRESETS = ("nls-hydro", "hs2-fs", "filament-nls", "sfr-fs", "compressible-spinor")

DEFAULT_TOLERANCES: Dict[str, float] = {
    "nls-hydro": 1e-4,
    "hs2-fs": 1e-5,
    "filament-nls": 1e-3,
    "sfr-fs": 1e-6,
    "compressible-spinor": 1e-3,
}


class ConfigError(ValueError):
    """The configuration is well-formed JSON but cannot be turned into a run."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Strict):
    n: int = 128
    L: PositiveFloat = float(2 * np.pi)

    @field_validator("n")
    @classmethod
    def _even(cls, n: int) -> int:
        if n < 8 or n % 2:
            raise ValueError("n must be an even integer >= 8")
        return n

    def build(self) -> PeriodicGrid:
        return PeriodicGrid(self.n, self.L)


class ScalingConfig(_Strict):
    alpha: PositiveFloat = 1.0
    beta: PositiveFloat = 1.0
    gamma: PositiveFloat = 1.0


class SolverConfig(_Strict):
    dt: PositiveFloat = 1e-4
    T: float = Field(0.5, ge=0)
    output_stride: Optional[PositiveInt] = None


class NonlinearityConfig(_Strict):
    kind: Literal["none", "cubic", "quartic"] = "cubic"
    kappa: float = 1.0


class InitialData(_Strict):
    """Named analytic family with parameters, or a CSV file.

    Families: ``cosine-density`` (rho_amp, theta_amp, mode), ``gaussian-bump``
    (amp, width, theta_amp), ``plane-wave`` (mode), ``random`` (band,
    rho_amp, theta_amp), ``circle`` (radius), ``perturbed-circle`` (eps,
    mode) and ``file`` (``path`` to an ``x,rho,theta`` CSV).
    """

    family: Literal["cosine-density", "gaussian-bump", "plane-wave", "random",
                    "circle", "perturbed-circle", "file"] = "cosine-density"
    params: Dict[str, float] = Field(default_factory=dict)
    path: Optional[str] = None


class VelocityConfig(_Strict):
    amplitude: float = Field(0.5, ge=0)
    band: PositiveInt = 4
    horizontal: bool = False


class ExperimentConfig(_Strict):
    kind: Literal["verify", "evolve", "compare", "geodesic", "filament"] = "verify"
    grid: GridConfig = GridConfig()
    scaling: ScalingConfig = ScalingConfig()
    solver: Optional[SolverConfig] = None
    system: Literal["nls", "hydro"] = "nls"
    nonlinearity: NonlinearityConfig = NonlinearityConfig()
    initial: Optional[InitialData] = None
    velocity: VelocityConfig = VelocityConfig()
    preset: Optional[Literal[PRESETS]] = None
    seed: int = 42
    samples: PositiveInt = 100
    write_snapshots: bool = False
    tolerances: Dict[str, PositiveFloat] = Field(default_factory=dict)

    @field_validator("tolerances")
    @classmethod
    def _known_tolerances(cls, tol: Dict[str, float]) -> Dict[str, float]:
        unknown = set(tol) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance names: {sorted(unknown)}")
        return tol

    def resolved(self) -> "ExperimentConfig":
        """Copy with every default made explicit (solver, initial data, tolerances)."""
        solver = self.solver or SolverConfig(**_default_solver(self))
        initial = self.initial or InitialData(**_default_initial(self))
        tol = {**DEFAULT_TOLERANCES, **self.tolerances}
        return self.model_copy(update=dict(solver=solver, initial=initial, tolerances=tol))

    def echo(self) -> dict:
        return self.resolved().model_dump(mode="json")


def _default_solver(cfg: ExperimentConfig) -> dict:
    if cfg.kind == "filament":
        return dict(dt=1e-4, T=0.2)
    if cfg.kind == "geodesic":
        return dict(dt=1e-3, T=0.3)
    if cfg.kind == "compare":
        return {
            "nls-hydro": dict(dt=1e-4, T=0.5),
            "hs2-fs": dict(dt=1e-3, T=0.3),
            "filament-nls": dict(dt=1e-4, T=0.2),
            "sfr-fs": dict(dt=1e-3, T=0.3),
            "compressible-spinor": dict(dt=1e-4, T=0.1),
        }.get(cfg.preset or "", dict(dt=1e-4, T=0.5))
    return dict(dt=1e-4, T=0.5)


def _default_initial(cfg: ExperimentConfig) -> dict:
    if cfg.kind == "filament" or cfg.preset == "filament-nls":
        return dict(family="perturbed-circle", params=dict(eps=0.05, mode=3))
    if cfg.kind == "geodesic" or cfg.preset in ("hs2-fs", "sfr-fs"):
        return dict(family="random", params=dict(band=4, rho_amp=0.3, theta_amp=0.5))
    return dict(family="cosine-density", params=dict(rho_amp=0.2, theta_amp=0.1, mode=1))


def load_config(path: Union[str, Path, None], **overrides: Any) -> ExperimentConfig:
    """Read a JSON config (or start from defaults) and apply non-``None`` overrides."""
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.model_validate(data)


# -- initial-data builders -----------------------------------------------------------


def _param(p: Dict[str, float], name: str, default: float) -> float:
    return float(p.get(name, default))


def _check_params(init: InitialData, allowed) -> None:
    unknown = set(init.params) - set(allowed)
    if unknown:
        raise ConfigError(f"family {init.family!r} does not take parameters {sorted(unknown)}")


def build_cotangent_point(init: InitialData, grid: PeriodicGrid, seed: int) -> CotangentPoint:
    p = init.params
    x = grid.x
    if init.family == "cosine-density":
        _check_params(init, ("rho_amp", "theta_amp", "mode"))
        m = _param(p, "mode", 1)
        rho = 1 + _param(p, "rho_amp", 0.2) * np.cos(m * x * 2 * np.pi / grid.L)
        theta = _param(p, "theta_amp", 0.1) * np.sin(m * x * 2 * np.pi / grid.L)
    elif init.family == "gaussian-bump":
        _check_params(init, ("amp", "width", "theta_amp"))
        w = _param(p, "width", 0.5)
        c = grid.L / 2
        rho = 1 + _param(p, "amp", 0.5) * np.exp(-((x - c) ** 2) / (2 * w**2))
        theta = _param(p, "theta_amp", 0.1) * np.sin(x * 2 * np.pi / grid.L)
    elif init.family == "random":
        _check_params(init, ("band", "rho_amp", "theta_amp"))
        return random_cotangent_point(grid, seed, int(_param(p, "band", 6)),
                                      _param(p, "rho_amp", 0.3), _param(p, "theta_amp", 1.0))
    elif init.family == "file":
        if not init.path:
            raise ConfigError("family 'file' needs a path")
        try:
            return CotangentPoint.from_csv(init.path)
        except OSError as exc:
            raise ConfigError(str(exc)) from None
    else:
        raise ConfigError(f"family {init.family!r} does not describe a density-phase pair")
    if np.min(rho) <= 0:
        raise ConfigError("initial density is not positive")
    return CotangentPoint.gauged(RealField(grid, rho), RealField(grid, theta))


def build_wave(init: InitialData, grid: PeriodicGrid, seed: int, s=None) -> WaveFunction:
    from .madelung_maps import madelung_forward

    if init.family == "plane-wave":
        _check_params(init, ("mode",))
        m = _param(init.params, "mode", 1)
        return WaveFunction(ComplexField(grid, np.exp(1j * m * grid.x * 2 * np.pi / grid.L)))
    p = build_cotangent_point(init, grid, seed)
    return madelung_forward(p) if s is None else madelung_forward(p, s)


def build_tangent(vel: VelocityConfig, p: CotangentPoint, seed: int) -> CotangentTangent:
    return random_tangent(p, np.random.default_rng([seed, 1]), vel.band, vel.amplitude, vel.horizontal)


def build_curve(init: InitialData, n: int):
    from .dynamics.filament import ClosedCurve3D

    if init.family == "circle":
        _check_params(init, ("radius",))
        return ClosedCurve3D.circle(n, _param(init.params, "radius", 1.0))
    if init.family == "perturbed-circle":
        _check_params(init, ("eps", "mode"))
        return ClosedCurve3D.perturbed_circle(n, _param(init.params, "eps", 0.05), int(_param(init.params, "mode", 3)))
    raise ConfigError(f"family {init.family!r} does not describe a curve")
