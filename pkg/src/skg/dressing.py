"""Closed-form dressing flow and its linearization.

The dressing generator ``D_g(u, alpha) = int (g conj(alpha) e^{-ikx} + c.c.) |u|^2``
has an explicitly solvable Hamiltonian flow: the density ``|u|^2`` is
conserved, so the meson field moves on a straight line and the nucleon field
picks up a phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fields import ClassicalState, a_g_field
from .spectral import Grid, inverse_plain_ft, plain_ft, reflect

__all__ = [
    "DressingMap",
    "parity",
    "dress",
    "dress_derivative",
    "symplectic_form",
    "sobolev_norm",
    "GrowthReport",
    "growth_bound_check",
]


def parity(g, grid: Grid, tol: float = 1e-13) -> str:
    """``"even"``, ``"odd"`` or ``"none"`` according to ``g(-k) = +-g(k)``.

    Nyquist rows have no partner and are skipped; they never contribute to the
    quadratic phase.
    """
    g = grid.check(g, "kernel")
    inner = np.all(np.abs(np.rint(grid.k / grid.dk)) < grid.n // 2, axis=0)
    scale = max(float(np.max(np.abs(g))), 1e-300)
    gr = reflect(g, grid)
    if np.max(np.abs(gr - g)[inner]) <= tol * scale:
        return "even"
    if np.max(np.abs(gr + g)[inner]) <= tol * scale:
        return "odd"
    return "none"


def _quadratic_phase(rho, g, grid: Grid) -> np.ndarray:
    """``Im int |g|^2 F(rho) e^{ikx} dk``; identically zero when ``|g|^2`` is even."""
    F = plain_ft(rho, grid)
    return ((2.0 * np.pi) ** grid.dim * inverse_plain_ft(np.abs(g) ** 2 * F, grid)).imag


@dataclass(frozen=True, eq=False)
class DressingMap:
    """The time-``theta`` flow of the dressing generator with kernel ``g``."""

    g: np.ndarray
    grid: Grid
    theta: float = 1.0

    def __post_init__(self):
        g = np.asarray(self.grid.check(self.g, "kernel"), dtype=complex)
        object.__setattr__(self, "g", g)

    @property
    def parity(self) -> str:
        return parity(self.g, self.grid)

    def __call__(self, state: ClassicalState) -> ClassicalState:
        return dress(state, self.g, self.theta)

    def inverse(self) -> "DressingMap":
        return DressingMap(self.g, self.grid, -self.theta)

    def derivative(self, state, tangent):
        return dress_derivative(state, self.g, self.theta, tangent)


def dress(state: ClassicalState, g, theta: float, *, general: bool | None = None) -> ClassicalState:
    """Image of ``state`` under the dressing flow at time ``theta``.

    For even or odd ``g`` the quadratic phase vanishes and is skipped; pass
    ``general=True`` to evaluate it regardless.
    """
    grid = state.grid
    g = grid.check(g, "kernel")
    rho = np.abs(state.u) ** 2
    phase = theta * a_g_field(state.alpha, g, grid)
    if general or (general is None and parity(g, grid) == "none"):
        phase = phase + theta**2 * _quadratic_phase(rho, g, grid)
    u = state.u * np.exp(-1j * phase)
    alpha = state.alpha - 1j * theta * g * plain_ft(rho, grid)
    return ClassicalState(u, alpha, grid)


def dress_derivative(state: ClassicalState, g, theta: float, tangent):
    """Frechet derivative of :func:`dress` at ``state`` applied to ``tangent = (v, beta)``."""
    grid = state.grid
    g = grid.check(g, "kernel")
    v, beta = tangent
    v = grid.check(v, "tangent")
    beta = grid.check(beta, "tangent")
    u = state.u
    rho = np.abs(u) ** 2
    drho = 2.0 * np.real(np.conj(u) * v)
    phase = theta * a_g_field(state.alpha, g, grid)
    dphase = theta * a_g_field(beta, g, grid)
    if parity(g, grid) == "none":
        phase = phase + theta**2 * _quadratic_phase(rho, g, grid)
        dphase = dphase + theta**2 * _quadratic_phase(drho, g, grid)
    dv = (v - 1j * dphase * u) * np.exp(-1j * phase)
    dbeta = beta - 1j * theta * g * plain_ft(drho, grid)
    return dv, dbeta


def symplectic_form(grid: Grid, t1, t2) -> float:
    """``Im <t1, t2>`` on ``L^2 (+) L^2``."""
    return float(np.imag(grid.inner_x(t1[0], t2[0]) + grid.inner_k(t1[1], t2[1])))


def sobolev_norm(state: ClassicalState, s: float, varsigma: float) -> float:
    """Discrete ``H^s (+) F H^varsigma`` norm via ``(1 + k^2)`` multipliers."""
    grid = state.grid
    uh = plain_ft(state.u, grid) * (2.0 * np.pi) ** (-grid.dim / 2)
    wu = (1.0 + grid.k2) ** (s / 2.0)
    wa = (1.0 + grid.k2) ** (varsigma / 2.0)
    return float(np.hypot(grid.norm_k(wu * uh), grid.norm_k(wa * state.alpha)))


@dataclass(frozen=True)
class GrowthReport:
    """Empirical polynomial growth ``|D z| <= C |z|^lam`` over a scaled family."""

    lam: int
    C: float
    scales: tuple
    norms_in: tuple
    norms_out: tuple
    slopes: tuple
    stable: bool


def growth_bound_check(state: ClassicalState, g, theta: float, s: float = 0.5,
                       varsigma: float = 0.5, scales=(1.0, 2.0, 4.0, 8.0)) -> GrowthReport:
    """Fit the smallest integer exponent bounding the dressed norm over ``c * state``."""
    if not (0.0 <= s <= 1.0 and s - 0.5 <= varsigma <= s + 0.5):
        raise ParameterError(f"need s in [0,1] and varsigma in [s-1/2, s+1/2], got {s}, {varsigma}")
    nin, nout = [], []
    for c in scales:
        z = state.scale(c)
        nin.append(sobolev_norm(z, s, varsigma))
        nout.append(sobolev_norm(dress(z, g, theta), s, varsigma))
    nin, nout = np.array(nin), np.array(nout)
    slopes = np.diff(np.log(nout)) / np.diff(np.log(nin))
    lam = max(1, int(np.ceil(np.max(slopes) - 1e-6)))
    C = float(np.max(nout / nin**lam))
    # stable: a larger exponent does not reduce the constant on the sampled family
    stable = bool(np.all(np.isfinite(slopes)) and np.max(slopes) <= lam + 1e-6)
    return GrowthReport(lam, C, tuple(scales), tuple(nin), tuple(nout), tuple(slopes), stable)

