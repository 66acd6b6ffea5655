"""Periodic-box discretization and the two Fourier conventions.

Position nodes are ``x_j = -L + j h`` with ``h = 2L/n``; wavenumber nodes are
``k_m = pi m / L`` with ``m`` in ``[-n/2, n/2)``. Wavenumber arrays are stored
in FFT order (``numpy.fft.fftfreq``), so the Nyquist row ``m = -n/2`` sits at
index ``n/2`` along every axis.

Integrals are replaced by node sums: ``dx -> h**d`` and ``dk -> (pi/L)**d``.
With these weights the discrete transforms below are exact inverses of each
other and satisfy Parseval identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ParameterError, ShapeError

__all__ = [
    "Grid",
    "dispersion",
    "plain_ft",
    "inverse_plain_ft",
    "unitary_ft",
    "inverse_unitary_ft",
    "plain_ft_density",
    "reflect",
    "state_to_real_fields",
    "real_fields_to_alpha",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)^d``."""

    dim: int
    n: int
    L: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ParameterError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 2 or self.n & (self.n - 1):
            raise ParameterError(f"n must be a power of two >= 2, got {self.n}")
        if not self.L > 0:
            raise ParameterError(f"L must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def dk(self) -> float:
        return np.pi / self.L

    @property
    def cell_x(self) -> float:
        """Volume element of the position grid."""
        return self.h**self.dim

    @property
    def cell_k(self) -> float:
        """Volume element of the wavenumber grid."""
        return self.dk**self.dim

    @cached_property
    def x_axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def m_axis(self) -> np.ndarray:
        """Integer wavenumber labels in FFT order."""
        return np.rint(np.fft.fftfreq(self.n) * self.n).astype(int)

    @cached_property
    def k_axis(self) -> np.ndarray:
        return self.dk * self.m_axis

    @cached_property
    def x(self) -> np.ndarray:
        """Position nodes, shape ``(dim, n, ..., n)``."""
        return np.array(np.meshgrid(*([self.x_axis] * self.dim), indexing="ij"))

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumber nodes in FFT order, shape ``(dim, n, ..., n)``."""
        return np.array(np.meshgrid(*([self.k_axis] * self.dim), indexing="ij"))

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.k**2, axis=0)

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def r2(self) -> np.ndarray:
        return np.sum(self.x**2, axis=0)

    @cached_property
    def _shift_phase(self) -> np.ndarray:
        # exp(i k_m L) = (-1)^m, one factor per axis
        sign = np.where(self.m_axis % 2 == 0, 1.0, -1.0)
        out = np.ones(self.shape)
        for ax in range(self.dim):
            idx = [None] * self.dim
            idx[ax] = slice(None)
            out = out * sign[tuple(idx)]
        return out

    def check(self, arr: np.ndarray, what: str = "field") -> np.ndarray:
        arr = np.asarray(arr)
        if arr.shape != self.shape:
            raise ShapeError(f"{what} has shape {arr.shape}, grid expects {self.shape}")
        return arr

    def inner_x(self, f, g) -> complex:
        """``<f, g>`` on the position grid (antilinear in ``f``)."""
        return self.cell_x * np.vdot(f, g)

    def inner_k(self, f, g) -> complex:
        """``<f, g>`` on the wavenumber grid (antilinear in ``f``)."""
        return self.cell_k * np.vdot(f, g)

    def norm_x(self, f) -> float:
        return float(np.sqrt(self.cell_x * np.sum(np.abs(f) ** 2)))

    def norm_k(self, f) -> float:
        return float(np.sqrt(self.cell_k * np.sum(np.abs(f) ** 2)))


def dispersion(grid: Grid, m0: float) -> np.ndarray:
    """Relativistic dispersion ``sqrt(k^2 + m0^2)`` on the wavenumber grid."""
    if not m0 > 0:
        raise ParameterError(f"meson mass must be positive, got {m0}")
    return np.sqrt(grid.k2 + m0 * m0)


def plain_ft(f, grid: Grid) -> np.ndarray:
    """Quadrature of ``int f(x) exp(-i k.x) dx`` (no 2 pi prefactor)."""
    f = grid.check(f, "position field")
    return grid.cell_x * grid._shift_phase * np.fft.fftn(f)


def inverse_plain_ft(F, grid: Grid) -> np.ndarray:
    """Inverse of :func:`plain_ft`: ``(2 pi)^-d int F(k) exp(i k.x) dk``."""
    F = grid.check(F, "wavenumber field")
    return np.fft.ifftn(F * grid._shift_phase) / grid.cell_x


def unitary_ft(f, grid: Grid) -> np.ndarray:
    """Quadrature of ``(2 pi)^(-d/2) int f(x) exp(-i k.x) dx``."""
    return plain_ft(f, grid) * (2.0 * np.pi) ** (-grid.dim / 2)


def inverse_unitary_ft(F, grid: Grid) -> np.ndarray:
    return inverse_plain_ft(F, grid) * (2.0 * np.pi) ** (grid.dim / 2)


def plain_ft_density(u, grid: Grid) -> np.ndarray:
    """``F(|u|^2)(k) = int exp(-i k.x) |u(x)|^2 dx``."""
    u = grid.check(u, "nucleon field")
    return plain_ft(np.abs(u) ** 2, grid)


def reflect(F, grid: Grid) -> np.ndarray:
    """Return ``F(-k)`` on the wavenumber grid; the Nyquist row maps to itself."""
    F = grid.check(F, "wavenumber field")
    out = F
    for ax in range(grid.dim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def state_to_real_fields(alpha, grid: Grid, m0: float):
    """Real meson field ``A`` and its time derivative from the complex field ``alpha``.

    ``A = (2pi)^(-d/2) int (2w)^(-1/2) (conj(alpha) e^{-ikx} + alpha e^{ikx}) dk`` and
    ``Adot = -i (2pi)^(-d/2) int sqrt(w/2) (alpha e^{ikx} - conj(alpha) e^{-ikx}) dk``.
    """
    alpha = grid.check(alpha, "meson field")
    w = dispersion(grid, m0)
    a = inverse_unitary_ft(alpha / np.sqrt(2.0 * w), grid)
    b = inverse_unitary_ft(np.sqrt(w / 2.0) * alpha, grid)
    return 2.0 * a.real, 2.0 * b.imag


def real_fields_to_alpha(A, Adot, grid: Grid, m0: float) -> np.ndarray:
    """Inverse of :func:`state_to_real_fields`."""
    w = dispersion(grid, m0)
    fa = unitary_ft(np.asarray(A, dtype=float), grid)
    fb = unitary_ft(np.asarray(Adot, dtype=float), grid)
    return 0.5 * (np.sqrt(2.0 * w) * fa + 1j * np.sqrt(2.0 / w) * fb)
