"""Run configuration: a validated JSON document with documented defaults."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError, ParameterError
from ..fields import ExternalPotential
from ..renorm import INF, RenormParams
from ..spectral import Grid

KINDS = ("renorm_scan", "classical_run", "dress_check", "quantum_correspond", "verify_all")


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _default_sigma_grid():
    return [10.0 ** (1.0 + 0.25 * i) for i in range(13)]


class PhysicsConfig(_Model):
    M: float = Field(1.0, gt=0)
    m0: float = Field(1.0, gt=0)
    sigma0: float = Field(1.0, ge=0)
    sigma: Union[float, Literal["inf"]] = "inf"
    coupling: float = 1.0

    @model_validator(mode="after")
    def _physical(self):
        self.params()
        return self

    def params(self) -> RenormParams:
        sigma = INF if self.sigma == "inf" else float(self.sigma)
        try:
            return RenormParams(M=self.M, m0=self.m0, sigma0=self.sigma0, sigma=sigma)
        except ParameterError as exc:
            raise ValueError(str(exc)) from exc


class GridConfig(_Model):
    dim: int = Field(1, ge=1, le=3)
    n: int = 256
    L: float = Field(12.0, gt=0)

    @field_validator("n")
    @classmethod
    def _power_of_two(cls, n):
        if n < 2 or n & (n - 1):
            raise ValueError("n must be a power of two >= 2")
        return n

    def grid(self) -> Grid:
        return Grid(self.dim, self.n, self.L)


class PotentialConfig(_Model):
    kind: Literal["zero", "harmonic"] = "zero"
    omega_trap: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _trap(self):
        if self.kind == "harmonic" and self.omega_trap <= 0:
            raise ValueError("harmonic potential needs omega_trap > 0")
        return self

    def potential(self) -> ExternalPotential:
        return ExternalPotential(self.kind, self.omega_trap)


class StateConfig(_Model):
    kind: Literal["smooth", "band"] = "smooth"
    width: float = Field(1.0, gt=0)
    u_modes: int = Field(2, ge=1)
    alpha_scale: float = Field(0.5, ge=0)
    kmax: float = Field(2.0, gt=0)
    u_band: int = Field(1, ge=0)
    alpha_band: int = Field(2, ge=0)


class FlowSettings(_Model):
    dt: float = Field(1e-3, gt=0)
    t_final: float = 1.0
    record_every: int = Field(10, ge=1)
    energy_guard: float = Field(1e-3, gt=0)
    conj_residual: bool = True


class ScanConfig(_Model):
    sigma_grid: list[float] = Field(default_factory=_default_sigma_grid, min_length=1)
    fit_sigmas: list[float] = Field(default_factory=lambda: [1e2, 1e3, 1e4], min_length=2)
    v2_radii: int = Field(200, ge=2)
    r_min: float = Field(0.1, gt=0)
    r_max: float = Field(50.0, gt=0)


class DressConfig(_Model):
    n_states: int = Field(100, ge=1)
    n_symplectic: int = Field(50, ge=1)
    grid: GridConfig = GridConfig(dim=1, n=256, L=10.0)
    alpha_scale: float = Field(0.5, ge=0)


class QuantumConfig(_Model):
    grid: GridConfig = GridConfig(dim=1, n=128, L=8.0)
    omega_trap: float = Field(1.0, gt=0)
    n_nuc: int = Field(1, ge=1)
    meson_waves: list[list[int]] = Field(default_factory=lambda: [[4], [5], [6]])
    z0: list[tuple[float, float]] = Field(
        default_factory=lambda: [(0.35, 0.0), (0.2, 0.1), (0.0, -0.15), (0.1, 0.0)])
    xi: list[tuple[float, float]] = Field(
        default_factory=lambda: [(0.5, 0.0), (0.0, 0.5), (0.5, 0.0), (-0.5, 0.0)])
    t_grid: list[float] = Field(default_factory=lambda: [0.2, 0.5])
    eps_list: list[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1])
    n_max: int = Field(15, ge=1)
    K: float = Field(0.05, gt=0)
    ordering: Literal["normal", "symmetric"] = "normal"
    zero_coupling_control: bool = True

    @model_validator(mode="after")
    def _lengths(self):
        n = self.n_nuc + len(self.meson_waves)
        if len(self.z0) != n or len(self.xi) != n:
            raise ValueError(f"z0 and xi need {n} entries (one per mode)")
        if any(e <= 0 for e in self.eps_list):
            raise ValueError("eps_list entries must be positive")
        return self


class RunConfig(_Model):
    kind: Literal[KINDS] = "renorm_scan"
    seed: int = Field(0, ge=0, lt=2**64)
    out: Optional[str] = None
    plots: bool = True
    physics: PhysicsConfig = PhysicsConfig()
    grid: GridConfig = GridConfig()
    potential: PotentialConfig = PotentialConfig()
    state: StateConfig = StateConfig()
    flow: FlowSettings = FlowSettings()
    scan: ScanConfig = ScanConfig()
    dress: DressConfig = DressConfig()
    quantum: QuantumConfig = QuantumConfig()

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2)

    def config_hash(self) -> str:
        body = self.model_dump(mode="json")
        body.pop("out", None)
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _format_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{path}: {err['msg']}")
    return "; ".join(parts)


def config_from_dict(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from None


def parse_config(path) -> RunConfig:
    """Read and validate a JSON run configuration."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return config_from_dict(data)
