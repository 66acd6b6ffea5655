"""Time evolution of the undressed and dressed systems.

Grid flows: the exact free flow, Strang splitting for the Yukawa system (the
interaction sub-flow is itself a dressing flow and is applied in closed
form), and for the dressed system either conjugation by the dressing map or a
Lawson (integrating-factor) RK4 scheme on the dressed vector field.

Mode-space flows: RK4 for any polynomial symbol, with optional tangent
propagation, used for Galerkin dynamics and the reduced dressing map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .dressing import dress
from .errors import ParameterError, StepSizeError
from .fields import (
    ClassicalState,
    ExternalPotential,
    energy_dressed,
    energy_yukawa,
    grad_dressed_interaction,
    kernels,
)
from .polysym import ModeSet, PolySymbol, _harmonic_axis_modes, reduce_energy
from .renorm import INF, RenormParams
from .spectral import Grid, dispersion, inverse_plain_ft, plain_ft

__all__ = [
    "FlowConfig",
    "Trajectory",
    "free_flow",
    "strang_step",
    "evolve_yukawa",
    "evolve_dressed",
    "conjugation_residual",
    "strang_error_estimate",
    "symbol_flow",
    "symbol_flow_tangent",
    "undressed_symbol_flow",
]


@dataclass(frozen=True)
class FlowConfig:
    """Step size, final time (negative for backward runs) and integrator controls."""

    dt: float = 1e-3
    t_final: float = 1.0
    integrator: str = "strang"
    energy_guard: float = 1e-3
    record_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not np.isfinite(self.t_final):
            raise ParameterError("t_final must be finite")
        if self.integrator not in ("strang", "rk4"):
            raise ParameterError(f"unknown integrator {self.integrator!r}")
        if self.record_every < 1:
            raise ParameterError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(abs(self.t_final) / self.dt))) if self.t_final else 0

    @property
    def step(self) -> float:
        """Signed step that lands exactly on ``t_final``."""
        return self.t_final / self.n_steps if self.n_steps else 0.0


@dataclass
class Trajectory:
    """Recorded samples of a grid trajectory."""

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    @property
    def final(self) -> ClassicalState:
        return self.states[-1]

    def append(self, t, state, energy):
        self.times.append(float(t))
        self.states.append(state)
        self.mass.append(state.mass)
        self.energy.append(float(energy))

    def max_energy_drift(self) -> float:
        e = np.asarray(self.energy)
        return float(np.max(np.abs(e - e[0])) / max(1.0, abs(e[0])))

    def max_mass_drift(self) -> float:
        m = np.asarray(self.mass)
        return float(np.max(np.abs(m - m[0])))


# exact free flow

@lru_cache(maxsize=16)
def _harmonic_axis(grid: Grid, M: float, omega_trap: float):
    vals, vecs = _harmonic_axis_modes(grid, M, omega_trap)
    return vals, vecs * np.sqrt(grid.h)


@lru_cache(maxsize=64)
def _harmonic_propagator(grid: Grid, M: float, omega_trap: float, t: float):
    vals, Q = _harmonic_axis(grid, M, omega_trap)
    return (Q * np.exp(-1j * t * vals)) @ Q.T


def _apply_axis(mat, f, axis):
    return np.moveaxis(np.tensordot(mat, f, axes=([1], [axis])), 0, axis)


def _nucleon_free(u, t, grid: Grid, V: ExternalPotential, M: float):
    if V.kind == "zero":
        return inverse_plain_ft(np.exp(-1j * t * grid.k2 / (2.0 * M)) * plain_ft(u, grid), grid)
    U = _harmonic_propagator(grid, M, V.omega_trap, float(t))
    out = u
    for ax in range(grid.dim):
        out = _apply_axis(U, out, ax)
    return out


def free_flow(state: ClassicalState, t: float, V: ExternalPotential, params: RenormParams) -> ClassicalState:
    """Exact flow of ``-Lap/2M + V`` on ``u`` and of ``w`` on ``alpha``."""
    grid = state.grid
    u = _nucleon_free(state.u, t, grid, V, params.M)
    alpha = np.exp(-1j * t * dispersion(grid, params.m0)) * state.alpha
    return ClassicalState(u, alpha, grid)


# Yukawa system

def strang_step(state, h, V, params, coupling=1.0) -> ClassicalState:
    """Half free step, exact interaction flow for ``h``, half free step."""
    vertex = kernels(state.grid, params, V, coupling).yukawa
    s = free_flow(state, 0.5 * h, V, params)
    s = dress(s, vertex, h)
    return free_flow(s, 0.5 * h, V, params)


def _guard(e_new, e_old, cfg, t):
    jump = abs(e_new - e_old) / max(1.0, abs(e_old))
    if not np.isfinite(e_new) or jump > cfg.energy_guard:
        raise StepSizeError(f"energy jumped by {jump:.3e} (relative) at t={t:.6g}; reduce dt",
                            t=t, jump=jump, dt=cfg.dt)


def evolve_yukawa(state: ClassicalState, cfg: FlowConfig, V: ExternalPotential, params: RenormParams,
                  coupling: float = 1.0) -> Trajectory:
    """Strang-split Yukawa flow from ``0`` to ``cfg.t_final``."""
    if cfg.integrator != "strang":
        raise ParameterError("the grid Yukawa flow uses the strang integrator")
    energy = lambda s: energy_yukawa(s, V, params, coupling)  # noqa: E731
    traj = Trajectory()
    e_prev = energy(state)
    traj.append(0.0, state, e_prev)
    h = cfg.step
    s = state
    for n in range(1, cfg.n_steps + 1):
        s = strang_step(s, h, V, params, coupling)
        e = energy(s)
        _guard(e, e_prev, cfg, n * h)
        e_prev = e
        if n % cfg.record_every == 0 or n == cfg.n_steps:
            traj.append(n * h, s, e)
    return traj


# dressed system

def _dressing_kernel(grid, params, V, coupling):
    p = params if params.sigma is INF else params.with_sigma(INF)
    return kernels(grid, p, V, coupling).g


def _lawson_rk4_step(s, h, V, params, coupling):
    def N(z):
        gu, ga = grad_dressed_interaction(z, V, params, coupling)
        return ClassicalState(-1j * gu, -1j * ga, z.grid)

    phi_half = lambda z: free_flow(z, 0.5 * h, V, params)  # noqa: E731
    k1 = N(s)
    k2 = N(phi_half(s + k1.scale(0.5 * h)))
    s_half = phi_half(s)
    k3 = N(s_half + k2.scale(0.5 * h))
    k4 = N(phi_half(s_half) + phi_half(k3).scale(h))
    return phi_half(phi_half(s + k1.scale(h / 6.0)) + (k2 + k3).scale(h / 3.0)) + k4.scale(h / 6.0)


def evolve_dressed(state: ClassicalState, cfg: FlowConfig, V: ExternalPotential, params: RenormParams,
                   method: str = "conjugation", *, modes: ModeSet | None = None,
                   coupling: float = 1.0) -> Trajectory:
    """Dressed flow by ``conjugation`` (undress, Strang, redress), ``direct``
    Lawson-RK4 on the grid, or ``galerkin`` RK4 on ``modes``."""
    energy = lambda s: energy_dressed(s, V, params, coupling)  # noqa: E731
    if method == "conjugation":
        g = _dressing_kernel(state.grid, params, V, coupling)
        inner = evolve_yukawa(dress(state, g, 1.0), cfg, V, params, coupling)
        traj = Trajectory()
        for t, s in zip(inner.times, inner.states):
            back = dress(s, g, -1.0)
            traj.append(t, back, energy(back))
        return traj
    if method == "direct":
        traj = Trajectory()
        e_prev = energy(state)
        traj.append(0.0, state, e_prev)
        h = cfg.step
        s = state
        for n in range(1, cfg.n_steps + 1):
            s = _lawson_rk4_step(s, h, V, params, coupling)
            e = energy(s)
            _guard(e, e_prev, cfg, n * h)
            e_prev = e
            if n % cfg.record_every == 0 or n == cfg.n_steps:
                traj.append(n * h, s, e)
        return traj
    if method == "galerkin":
        if modes is None:
            raise ParameterError("galerkin method needs a mode set")
        sym = reduce_energy("dressed", modes, V, params, coupling=coupling)
        z = modes.project(state)
        traj = Trajectory()
        traj.append(0.0, modes.to_state(z), sym(z).real)
        h = cfg.step
        for n in range(1, cfg.n_steps + 1):
            z = _rk4(sym.vector_field, z, h)
            if n % cfg.record_every == 0 or n == cfg.n_steps:
                traj.append(n * h, modes.to_state(z), sym(z).real)
        return traj
    raise ParameterError(f"unknown dressed-flow method {method!r}")


def conjugation_residual(state: ClassicalState, t: float, cfg: FlowConfig, V: ExternalPotential,
                         params: RenormParams, coupling: float = 1.0) -> float:
    """``|E(t) z - D(1) Ehat(t) D(-1) z|`` with ``Ehat`` from the direct integrator."""
    run = FlowConfig(cfg.dt, t, "strang", cfg.energy_guard, max(1, cfg.n_steps))
    g = _dressing_kernel(state.grid, params, V, coupling)
    undressed = evolve_yukawa(state, run, V, params, coupling).final
    dressed = evolve_dressed(dress(state, g, -1.0), run, V, params, "direct", coupling=coupling).final
    return (undressed - dress(dressed, g, 1.0)).norm()


def strang_error_estimate(state: ClassicalState, t: float, cfg: FlowConfig, V: ExternalPotential,
                          params: RenormParams, coupling: float = 1.0) -> float:
    """Richardson estimate ``(4/3) |S_dt(t) z - S_dt/2(t) z|`` of the Strang global error at step ``cfg.dt``."""
    coarse = FlowConfig(cfg.dt, t, "strang", cfg.energy_guard, max(1, cfg.n_steps))
    fine = FlowConfig(cfg.dt / 2, t, "strang", cfg.energy_guard, max(1, 2 * cfg.n_steps))
    a = evolve_yukawa(state, coarse, V, params, coupling).final
    b = evolve_yukawa(state, fine, V, params, coupling).final
    return 4.0 / 3.0 * (a - b).norm()


# mode-space flows

def _rk4(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def symbol_flow(sym: PolySymbol, z, t: float, steps: int) -> np.ndarray:
    """RK4 solution of ``i dz/dt = dH/d(conj z)`` at time ``t``."""
    z = np.asarray(z, dtype=complex)
    if steps < 1 or t == 0:
        return z.copy()
    h = t / steps
    for _ in range(steps):
        z = _rk4(sym.vector_field, z, h)
    return z


def symbol_flow_tangent(sym: PolySymbol, z, dz, t: float, steps: int):
    """Flow of ``sym`` together with its linearization applied to ``dz``."""
    z = np.asarray(z, dtype=complex)
    dz = np.asarray(dz, dtype=complex)
    n = len(z)

    def f(y):
        x, dx = y[:n], y[n:]
        return np.concatenate([-1j * sym.gradient_zbar(x), -1j * sym.gradient_zbar_derivative(x, dx)])

    y = np.concatenate([z, dz])
    if t != 0:
        h = t / steps
        for _ in range(steps):
            y = _rk4(f, y, h)
    return y[:n], y[n:]


def undressed_symbol_flow(dressed: PolySymbol, generator: PolySymbol, z, t: float, steps: int,
                          sub_steps: int) -> np.ndarray:
    """RK4 flow of ``dressed o D(-1)`` where ``D`` is the time-one flow of ``generator``.

    The vector field is the push-forward ``dD(1) X(D(-1) w)`` of the dressed
    Hamiltonian field; both maps are integrated with ``sub_steps`` RK4 steps.
    """

    def field(w):
        z0 = symbol_flow(generator, w, -1.0, sub_steps)
        x = dressed.vector_field(z0)
        return symbol_flow_tangent(generator, z0, x, 1.0, sub_steps)[1]

    w = np.asarray(z, dtype=complex)
    if t != 0:
        h = t / steps
        for _ in range(steps):
            w = _rk4(field, w, h)
    return w
