"""Classical state and the energy functionals of the Yukawa-coupled system.

The phase space is ``L^2 (+) L^2`` with points ``(u, alpha)``: ``u`` on the
position grid, ``alpha`` on the wavenumber grid. Hamilton's equations read
``i du/dt = dE/d(conj u)`` and ``i dalpha/dt = dE/d(conj alpha)`` where the
derivatives are functional ones (divided by the cell volume on the grid).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ParameterError, ShapeError
from .renorm import INF, RenormParams, chi_sigma, g_sigma, pair_kernel, r_sigma
from .spectral import (
    Grid,
    dispersion,
    inverse_plain_ft,
    inverse_unitary_ft,
    plain_ft,
    plain_ft_density,
    unitary_ft,
)

__all__ = [
    "ClassicalState",
    "ExternalPotential",
    "Kernels",
    "kernels",
    "energy_free",
    "energy_yukawa",
    "energy_dressed",
    "dressed_terms",
    "dressing_functional",
    "a_g_field",
    "yukawa_vertex",
    "spectral_gradient",
    "grad_free",
    "grad_yukawa",
    "grad_dressed",
    "grad_dressed_interaction",
    "random_state",
    "band_limited_state",
]


@dataclass(frozen=True, eq=False)
class ClassicalState:
    """Point ``(u, alpha)`` of phase space on a grid."""

    u: np.ndarray
    alpha: np.ndarray
    grid: Grid

    def __post_init__(self):
        u = np.array(self.u, dtype=complex)
        a = np.array(self.alpha, dtype=complex)
        if u.shape != self.grid.shape or a.shape != self.grid.shape:
            raise ShapeError(f"state fields {u.shape}, {a.shape} do not match grid {self.grid.shape}")
        u.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "alpha", a)

    @property
    def mass(self) -> float:
        return self.grid.norm_x(self.u) ** 2

    @property
    def field_norm(self) -> float:
        return self.grid.norm_k(self.alpha)

    def replace(self, u=None, alpha=None) -> "ClassicalState":
        return ClassicalState(self.u if u is None else u, self.alpha if alpha is None else alpha, self.grid)

    def __add__(self, other):
        return ClassicalState(self.u + other.u, self.alpha + other.alpha, self.grid)

    def __sub__(self, other):
        return ClassicalState(self.u - other.u, self.alpha - other.alpha, self.grid)

    def scale(self, c) -> "ClassicalState":
        return ClassicalState(c * self.u, c * self.alpha, self.grid)

    def norm(self) -> float:
        """``L^2 (+) L^2`` norm."""
        return float(np.hypot(self.grid.norm_x(self.u), self.grid.norm_k(self.alpha)))

    def inner(self, other) -> complex:
        return self.grid.inner_x(self.u, other.u) + self.grid.inner_k(self.alpha, other.alpha)


@dataclass(frozen=True)
class ExternalPotential:
    """Non-negative confining potential: ``zero`` or ``harmonic`` with trap frequency."""

    kind: str = "zero"
    omega_trap: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "harmonic"):
            raise ParameterError(f"unsupported potential kind {self.kind!r}")
        if self.kind == "harmonic" and not self.omega_trap > 0:
            raise ParameterError("harmonic potential needs omega_trap > 0")

    def values(self, grid: Grid) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(grid.shape)
        return 0.5 * self.omega_trap**2 * grid.r2


ZERO = ExternalPotential()


@dataclass(frozen=True, eq=False)
class Kernels:
    """Grid tabulation of every ``k``-space factor used by the energies."""

    omega: np.ndarray
    kinetic: np.ndarray          # k^2 / 2M
    yukawa: np.ndarray           # (2pi)^{-d/2} (2w)^{-1/2}, plain-transform vertex
    yukawa_cut: np.ndarray       # chi_sigma0 times the above
    g: np.ndarray                # dressing kernel g_sigma
    r: np.ndarray                # vector kernel, shape (dim, ...)
    pair: np.ndarray             # pair weight w(k)
    potential: np.ndarray = field(default=None)


@lru_cache(maxsize=32)
def kernels(grid: Grid, params: RenormParams, potential: ExternalPotential = ZERO,
            coupling: float = 1.0) -> Kernels:
    """Tabulate the kernels; ``coupling`` scales every interaction vertex (pair term quadratically)."""
    w = dispersion(grid, params.m0)
    y = coupling * (2.0 * np.pi) ** (-grid.dim / 2) / np.sqrt(2.0 * w)
    return Kernels(
        omega=w,
        kinetic=grid.k2 / (2.0 * params.M),
        yukawa=y,
        yukawa_cut=chi_sigma(grid.kabs, params.sigma0) * y,
        g=coupling * g_sigma(grid.kabs, params, grid.dim),
        r=coupling * r_sigma(grid.k, params),
        pair=coupling**2 * pair_kernel(grid.kabs, params, grid.dim),
        potential=potential.values(grid),
    )


def _dressed_params(params: RenormParams) -> RenormParams:
    return params if params.sigma is INF else params.with_sigma(INF)


def energy_free(state: ClassicalState, V: ExternalPotential, params: RenormParams) -> float:
    """``<u, (-Lap/2M + V) u> + <alpha, w alpha>``."""
    g = state.grid
    K = kernels(g, params, V)
    uh = unitary_ft(state.u, g)
    kin = g.cell_k * float(np.sum(K.kinetic * np.abs(uh) ** 2))
    pot = g.cell_x * float(np.sum(K.potential * np.abs(state.u) ** 2))
    mes = g.cell_k * float(np.sum(K.omega * np.abs(state.alpha) ** 2))
    return kin + pot + mes


def a_g_field(alpha, g, grid: Grid) -> np.ndarray:
    """``A_g(x) = int (g conj(alpha) e^{-ikx} + conj(g) alpha e^{ikx}) dk`` (real)."""
    alpha = grid.check(alpha, "meson field")
    b = (2.0 * np.pi) ** grid.dim * inverse_plain_ft(np.conj(g) * alpha, grid)
    return 2.0 * b.real


def dressing_functional(state: ClassicalState, g) -> float:
    """``int (g conj(alpha) e^{-ikx} + conj(g) alpha e^{ikx}) |u|^2 dx dk``."""
    grid = state.grid
    F = plain_ft_density(state.u, grid)
    return 2.0 * float(np.real(grid.inner_k(state.alpha, g * F)))


def yukawa_vertex(grid: Grid, params: RenormParams, coupling: float = 1.0) -> np.ndarray:
    """Kernel whose dressing functional is the Yukawa coupling term."""
    return kernels(grid, params, ZERO, coupling).yukawa


def energy_yukawa(state: ClassicalState, V: ExternalPotential, params: RenormParams,
                  coupling: float = 1.0) -> float:
    """Free energy plus ``2 Re <alpha, (2w)^{-1/2} F_unitary(|u|^2)>``."""
    K = kernels(state.grid, params, V, coupling)
    return energy_free(state, V, params) + dressing_functional(state, K.yukawa)


def _vector_fields(state: ClassicalState, r: np.ndarray):
    """Components ``B_i(x) = int conj(r_i) alpha e^{ikx} dk``; ``A_r = 2 Re B``."""
    grid = state.grid
    return np.array([(2.0 * np.pi) ** grid.dim * inverse_plain_ft(np.conj(r[i]) * state.alpha, grid)
                     for i in range(grid.dim)])


def spectral_gradient(u, grid: Grid) -> np.ndarray:
    """``D u = -i grad u`` by spectral differentiation, shape ``(dim, ...)``."""
    uh = plain_ft(u, grid)
    return np.array([inverse_plain_ft(grid.k[i] * uh, grid) for i in range(grid.dim)])


def dressed_terms(state: ClassicalState, V: ExternalPotential, params: RenormParams,
                  coupling: float = 1.0) -> dict:
    """The five contributions to the dressed energy, keyed by name."""
    grid = state.grid
    p = _dressed_params(params)
    K = kernels(grid, p, V, coupling)
    u = state.u
    rho = np.abs(u) ** 2
    B = _vector_fields(state, K.r)
    A_r = 2.0 * B.real
    Du = spectral_gradient(u, grid)
    F = plain_ft(rho, grid)
    return {
        "free": energy_free(state, V, p),
        "yukawa_cut": dressing_functional(state, K.yukawa_cut),
        "field_square": grid.cell_x * float(np.sum(rho * np.sum(A_r**2, axis=0))) / (2.0 * p.M),
        "current": -2.0 / p.M * grid.cell_x * float(np.real(np.sum(np.conj(B) * np.conj(u) * Du))),
        "pair": grid.cell_k * float(np.sum(K.pair * np.abs(F) ** 2)),
    }


def energy_dressed(state: ClassicalState, V: ExternalPotential, params: RenormParams,
                   coupling: float = 1.0) -> float:
    """Dressed energy with the ``sigma = INF`` kernels and infrared scale ``params.sigma0``."""
    return float(sum(dressed_terms(state, V, params, coupling).values()))


# Hamiltonian vector fields: each returns (dE/d conj u, dE/d conj alpha) per unit cell.

def grad_free(state: ClassicalState, V: ExternalPotential, params: RenormParams):
    grid = state.grid
    K = kernels(grid, params, V)
    hu = inverse_plain_ft(K.kinetic * plain_ft(state.u, grid), grid) + K.potential * state.u
    return hu, K.omega * state.alpha


def _grad_vertex(state, g):
    grid = state.grid
    return a_g_field(state.alpha, g, grid) * state.u, g * plain_ft_density(state.u, grid)


def grad_yukawa(state: ClassicalState, V: ExternalPotential, params: RenormParams,
                coupling: float = 1.0):
    K = kernels(state.grid, params, V, coupling)
    hu, ha = grad_free(state, V, params)
    iu, ia = _grad_vertex(state, K.yukawa)
    return hu + iu, ha + ia


def grad_dressed(state: ClassicalState, V: ExternalPotential, params: RenormParams,
                 coupling: float = 1.0):
    hu, ha = grad_free(state, V, _dressed_params(params))
    iu, ia = grad_dressed_interaction(state, V, params, coupling)
    return hu + iu, ha + ia


def grad_dressed_interaction(state: ClassicalState, V: ExternalPotential, params: RenormParams,
                             coupling: float = 1.0):
    """Gradient of the dressed energy minus its free part."""
    grid = state.grid
    p = _dressed_params(params)
    K = kernels(grid, p, V, coupling)
    u = state.u
    rho = np.abs(u) ** 2

    hu, ha = _grad_vertex(state, K.yukawa_cut)

    B = _vector_fields(state, K.r)
    A_r = 2.0 * B.real
    hu = hu + np.sum(A_r**2, axis=0) * u / (2.0 * p.M)
    ha = ha + sum(K.r[i] * plain_ft(rho * A_r[i], grid) for i in range(grid.dim)) / p.M

    Du = spectral_gradient(u, grid)
    cur = np.zeros_like(u)
    for i in range(grid.dim):
        DBu = inverse_plain_ft(grid.k[i] * plain_ft(B[i] * u, grid), grid)
        cur += np.conj(B[i]) * Du[i] + DBu
    hu = hu - cur / p.M
    ha = ha - sum(K.r[i] * plain_ft(np.conj(u) * Du[i], grid) for i in range(grid.dim)) / p.M

    F = plain_ft(rho, grid)
    phi = (2.0 * np.pi) ** grid.dim * inverse_plain_ft(K.pair * F, grid)
    return hu + 2.0 * phi.real * u, ha


def random_state(grid: Grid, rng: np.random.Generator, *, width: float = 1.0,
                 u_modes: int = 3, alpha_scale: float = 1.0, kmax: float = 2.0,
                 mass: float = 1.0) -> ClassicalState:
    """Smooth random state: a sum of modulated Gaussians for ``u`` and
    Gaussian-weighted random meson amplitudes."""
    x = grid.x
    u = np.zeros(grid.shape, dtype=complex)
    bcast = (slice(None),) + (None,) * grid.dim
    for _ in range(max(1, u_modes)):
        q = rng.normal(size=grid.dim) * 0.7 / width
        shift = rng.normal(size=grid.dim) * 0.3 * width
        c = rng.normal() + 1j * rng.normal()
        u += c * np.exp(1j * np.tensordot(q, x, axes=1)) * np.exp(
            -np.sum(((x - shift[bcast]) / width) ** 2, axis=0) / 2.0)
    u *= np.sqrt(mass) / grid.norm_x(u)
    a_env = np.exp(-grid.k2 / (2.0 * kmax**2))
    alpha = alpha_scale * a_env * (rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    return ClassicalState(u, alpha, grid)


def band_limited_state(grid: Grid, rng: np.random.Generator, *, u_band: int = 1,
                       alpha_band: int = 2, alpha_scale: float = 0.1,
                       mass: float = 1.0) -> ClassicalState:
    """Random trigonometric polynomial state: ``u`` on wave indices with
    ``max |m_i| <= u_band`` and ``alpha`` on ``max |m_i| <= alpha_band``."""
    m = np.max(np.abs(np.rint(grid.k / grid.dk)), axis=0)
    noise = lambda: rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)  # noqa: E731
    u = inverse_unitary_ft(noise() * (m <= u_band), grid)
    u *= np.sqrt(mass) / grid.norm_x(u)
    alpha = alpha_scale * noise() * (m <= alpha_band)
    return ClassicalState(u, alpha, grid)
