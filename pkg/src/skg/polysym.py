"""Polynomial symbols on a finite mode set and Galerkin reductions of the energies.

A symbol is a finite sum ``sum c * prod conj(z)^mu * prod z^nu`` over
multi-indices ``mu`` (creation) and ``nu`` (annihilation). The same object
drives the classical Galerkin ODE ``i dz/dt = dH/d(conj z)`` and, through
Wick ordering, the quantum Hamiltonians.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ParameterError, ResourceError, ShapeError
from .fields import ClassicalState, ExternalPotential, kernels, spectral_gradient
from .renorm import INF, RenormParams
from .spectral import Grid, inverse_plain_ft, plain_ft

__all__ = ["ModeSet", "PolySymbol", "reduce_energy", "poisson_bracket", "number_symbol", "MAX_MODES"]

MAX_MODES = 8


def _harmonic_axis_modes(grid: Grid, M: float, omega_trap: float):
    """Eigenpairs of the 1-d spectral operator ``-d^2/2M + omega^2 x^2 / 2`` on one axis."""
    n = grid.n
    k = grid.k_axis
    eye = np.eye(n)
    # columns: spectral second derivative of unit vectors
    kin = np.fft.ifft((k**2 / (2.0 * M))[:, None] * np.fft.fft(eye, axis=0), axis=0)
    H = kin + np.diag(0.5 * omega_trap**2 * grid.x_axis**2)
    H = np.real(0.5 * (H + H.conj().T))
    vals, vecs = np.linalg.eigh(H)
    return vals, vecs / np.sqrt(grid.h)


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Orthonormal nucleon modes on the position grid plus single-node meson modes.

    Meson mode ``m`` is the normalized indicator of one wavenumber node, so
    ``alpha = sum z_m delta_{k_m} / sqrt(dk^d)``.
    """

    grid: Grid
    nucleon: np.ndarray          # (n_nuc, *grid.shape)
    meson_index: tuple           # flat indices into the wavenumber grid
    nucleon_energy: np.ndarray   # diagonal of -Lap/2M + V in the nucleon basis

    def __post_init__(self):
        if self.n_modes > MAX_MODES:
            raise ResourceError(f"{self.n_modes} modes exceed the limit of {MAX_MODES}")
        if self.n_nuc < 1:
            raise ParameterError("at least one nucleon mode is required")
        gram = np.array([[self.grid.inner_x(a, b) for b in self.nucleon] for a in self.nucleon])
        if np.max(np.abs(gram - np.eye(self.n_nuc))) > 1e-12:
            raise ParameterError("nucleon modes are not orthonormal")
        if len(set(self.meson_index)) != len(self.meson_index):
            raise ParameterError("duplicate meson modes")

    @classmethod
    def plane_waves(cls, grid: Grid, nucleon_waves, meson_waves, M: float = 1.0) -> "ModeSet":
        """Plane-wave nucleon modes ``e^{ik.x}/sqrt(vol)`` and meson modes, both given
        as integer wave vectors (one tuple of length ``dim`` per mode)."""
        waves = [_wave_index(grid, w) for w in nucleon_waves]
        vol = (2.0 * grid.L) ** grid.dim
        phis, energies = [], []
        for idx in waves:
            kv = grid.k.reshape(grid.dim, -1)[:, idx]
            phis.append(np.exp(1j * np.tensordot(kv, grid.x, axes=1)) / np.sqrt(vol))
            energies.append(float(kv @ kv) / (2.0 * M))
        mes = tuple(_wave_index(grid, w) for w in meson_waves)
        return cls(grid, np.array(phis), mes, np.array(energies))

    @classmethod
    def harmonic(cls, grid: Grid, n_nuc: int, meson_waves, M: float, omega_trap: float) -> "ModeSet":
        """Lowest ``n_nuc`` product eigenvectors of the discrete trapped Hamiltonian."""
        vals, vecs = _harmonic_axis_modes(grid, M, omega_trap)
        nlev = min(grid.n, n_nuc + 2)
        combos = sorted(np.ndindex(*([nlev] * grid.dim)), key=lambda c: (sum(vals[i] for i in c), c))
        phis, energies = [], []
        for c in combos[:n_nuc]:
            phi = np.ones(grid.shape, dtype=complex)
            for ax, i in enumerate(c):
                idx = [None] * grid.dim
                idx[ax] = slice(None)
                phi = phi * vecs[:, i][tuple(idx)]
            phis.append(phi)
            energies.append(float(sum(vals[i] for i in c)))
        mes = tuple(_wave_index(grid, w) for w in meson_waves)
        return cls(grid, np.array(phis), mes, np.array(energies))

    @property
    def n_nuc(self) -> int:
        return len(self.nucleon)

    @property
    def n_mes(self) -> int:
        return len(self.meson_index)

    @property
    def n_modes(self) -> int:
        return self.n_nuc + self.n_mes

    @cached_property
    def meson_k(self) -> np.ndarray:
        """Wave vectors of the meson modes, shape ``(n_mes, dim)``."""
        flat = self.grid.k.reshape(self.grid.dim, -1)
        return np.array([flat[:, i] for i in self.meson_index]).reshape(self.n_mes, self.grid.dim)

    def meson_values(self, table: np.ndarray) -> np.ndarray:
        """Sample a wavenumber-grid array at the meson nodes."""
        return np.asarray(table).reshape(-1)[list(self.meson_index)]

    def to_state(self, z) -> ClassicalState:
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.n_modes,):
            raise ShapeError(f"coordinate vector has shape {z.shape}, expected ({self.n_modes},)")
        u = np.tensordot(z[: self.n_nuc], self.nucleon, axes=1)
        alpha = np.zeros(self.grid.size, dtype=complex)
        alpha[list(self.meson_index)] = z[self.n_nuc:] / np.sqrt(self.grid.cell_k)
        return ClassicalState(u, alpha.reshape(self.grid.shape), self.grid)

    def project(self, state: ClassicalState) -> np.ndarray:
        zn = [self.grid.inner_x(phi, state.u) for phi in self.nucleon]
        zm = self.meson_values(state.alpha) * np.sqrt(self.grid.cell_k)
        return np.concatenate([np.array(zn, dtype=complex), zm])


def _wave_index(grid: Grid, wave) -> int:
    wave = np.atleast_1d(np.asarray(wave, dtype=int))
    if wave.shape != (grid.dim,):
        raise ShapeError(f"wave vector {tuple(wave)} does not have {grid.dim} components")
    if np.any(wave < -grid.n // 2) or np.any(wave >= grid.n // 2):
        raise ParameterError(f"wave vector {tuple(wave)} outside the grid")
    return int(np.ravel_multi_index(tuple(int(w) % grid.n for w in wave), grid.shape))


class PolySymbol:
    """Immutable polynomial in ``(conj z, z)`` stored as a monomial table."""

    def __init__(self, n_modes: int, terms=None):
        self.n_modes = int(n_modes)
        acc: dict = {}
        for mu, nu, c in terms or ():
            mu, nu = tuple(int(a) for a in mu), tuple(int(a) for a in nu)
            if len(mu) != self.n_modes or len(nu) != self.n_modes:
                raise ShapeError("multi-index length does not match the mode count")
            if min(mu + nu, default=0) < 0:
                raise ParameterError("negative exponent in multi-index")
            acc[(mu, nu)] = acc.get((mu, nu), 0.0) + complex(c)
        self._terms = {key: c for key, c in acc.items() if c != 0}
        keys = list(self._terms)
        self._mu = np.array([k[0] for k in keys], dtype=int).reshape(-1, self.n_modes)
        self._nu = np.array([k[1] for k in keys], dtype=int).reshape(-1, self.n_modes)
        self._c = np.array([self._terms[k] for k in keys], dtype=complex)

    @classmethod
    def from_dict(cls, n_modes: int, table: dict) -> "PolySymbol":
        return cls(n_modes, ((mu, nu, c) for (mu, nu), c in table.items()))

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    @property
    def degree(self) -> tuple[int, int]:
        """Largest creation and annihilation degree over the monomials."""
        if not self._terms:
            return (0, 0)
        return int(self._mu.sum(axis=1).max()), int(self._nu.sum(axis=1).max())

    @property
    def total_degree(self) -> int:
        """Largest ``|mu| + |nu|`` over the monomials."""
        if not self._terms:
            return 0
        return int((self._mu.sum(axis=1) + self._nu.sum(axis=1)).max())

    def is_real(self, tol: float = 1e-12) -> bool:
        """True iff every term ``(mu, nu, c)`` has its partner ``(nu, mu, conj c)``."""
        scale = max((abs(c) for c in self._terms.values()), default=1.0)
        for (mu, nu), c in self._terms.items():
            if abs(self._terms.get((nu, mu), 0.0) - np.conj(c)) > tol * scale:
                return False
        return True

    def is_gauge_invariant(self, n_nuc: int) -> bool:
        """Every monomial has equal nucleon creation and annihilation degree."""
        return all(sum(mu[:n_nuc]) == sum(nu[:n_nuc]) for mu, nu in self._terms)

    def _check(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.n_modes,):
            raise ShapeError(f"vector of shape {z.shape} for a {self.n_modes}-mode symbol")
        return z

    def evaluate(self, z) -> complex:
        z = self._check(z)
        if not self._terms:
            return 0j
        mono = np.prod(np.conj(z) ** self._mu * z**self._nu, axis=1)
        return complex(np.dot(self._c, mono))

    def __call__(self, z) -> complex:
        return self.evaluate(z)

    # symbolic calculus

    def d_zbar(self, j: int) -> "PolySymbol":
        out = []
        for (mu, nu), c in self._terms.items():
            if mu[j]:
                m = list(mu)
                m[j] -= 1
                out.append((m, nu, c * mu[j]))
        return PolySymbol(self.n_modes, out)

    def d_z(self, j: int) -> "PolySymbol":
        out = []
        for (mu, nu), c in self._terms.items():
            if nu[j]:
                n = list(nu)
                n[j] -= 1
                out.append((mu, n, c * nu[j]))
        return PolySymbol(self.n_modes, out)

    def __add__(self, other: "PolySymbol") -> "PolySymbol":
        self._same(other)
        return PolySymbol(self.n_modes, [*self._iter(), *other._iter()])

    def __sub__(self, other: "PolySymbol") -> "PolySymbol":
        return self + other.scale(-1.0)

    def __mul__(self, other: "PolySymbol") -> "PolySymbol":
        self._same(other)
        out = []
        for (m1, n1), c1 in self._terms.items():
            for (m2, n2), c2 in other._terms.items():
                out.append((np.add(m1, m2), np.add(n1, n2), c1 * c2))
        return PolySymbol(self.n_modes, out)

    def scale(self, c: complex) -> "PolySymbol":
        return PolySymbol(self.n_modes, ((mu, nu, c * v) for (mu, nu), v in self._terms.items()))

    def conj(self) -> "PolySymbol":
        """The symbol of the pointwise complex conjugate."""
        return PolySymbol(self.n_modes, ((nu, mu, np.conj(c)) for (mu, nu), c in self._terms.items()))

    def drop_below(self, tol: float) -> "PolySymbol":
        return PolySymbol(self.n_modes, ((mu, nu, c) for (mu, nu), c in self._terms.items() if abs(c) > tol))

    def _iter(self):
        return ((mu, nu, c) for (mu, nu), c in self._terms.items())

    def _same(self, other):
        if self.n_modes != other.n_modes:
            raise ShapeError("symbols live on different mode sets")

    # Hamiltonian vector field

    @cached_property
    def _grad_table(self):
        rows = []
        for j in range(self.n_modes):
            rows += [(mu, nu, c, j, 0, 0) for (mu, nu), c in self.d_zbar(j)._terms.items()]
        return _Table(rows, self.n_modes)

    @cached_property
    def _hess_table(self):
        rows = []
        for j in range(self.n_modes):
            gj = self.d_zbar(j)
            for k in range(self.n_modes):
                rows += [(mu, nu, c, j, k, 0) for (mu, nu), c in gj.d_z(k)._terms.items()]
                rows += [(mu, nu, c, j, k, 1) for (mu, nu), c in gj.d_zbar(k)._terms.items()]
        return _Table(rows, self.n_modes)

    def gradient_zbar(self, z) -> np.ndarray:
        """Vector of partial derivatives with respect to ``conj z_j``."""
        return self._grad_table.apply(self._check(z))

    def gradient_zbar_derivative(self, z, dz) -> np.ndarray:
        """Directional derivative of :meth:`gradient_zbar` at ``z`` along ``dz``."""
        dz = self._check(dz)
        return self._hess_table.apply(self._check(z), np.stack([dz, np.conj(dz)]))

    def vector_field(self, z) -> np.ndarray:
        """``dz/dt = -i dH/d(conj z)``."""
        return -1j * self.gradient_zbar(z)

    # serialization

    def to_json(self) -> str:
        rows = [{"mu": list(mu), "nu": list(nu), "re": c.real, "im": c.imag}
                for (mu, nu), c in sorted(self._terms.items())]
        return json.dumps({"n_modes": self.n_modes, "terms": rows})

    @classmethod
    def from_json(cls, text: str) -> "PolySymbol":
        data = json.loads(text)
        return cls(data["n_modes"], ((r["mu"], r["nu"], complex(r["re"], r["im"])) for r in data["terms"]))

    def __repr__(self):
        return f"PolySymbol(n_modes={self.n_modes}, terms={len(self)}, degree={self.degree})"


class _Table:
    """Monomials tagged with an output slot, a direction slot and a conjugation flag."""

    def __init__(self, rows, n_modes):
        self.n = n_modes
        self.mu = np.array([r[0] for r in rows], dtype=int).reshape(-1, n_modes)
        self.nu = np.array([r[1] for r in rows], dtype=int).reshape(-1, n_modes)
        self.c = np.array([r[2] for r in rows], dtype=complex)
        self.out = np.array([r[3] for r in rows], dtype=int)
        self.dirn = np.array([r[4] for r in rows], dtype=int)
        self.flag = np.array([r[5] for r in rows], dtype=int)

    def apply(self, z, directions=None):
        vals = self.c * np.prod(np.conj(z) ** self.mu * z**self.nu, axis=1)
        if directions is not None:
            vals = vals * directions[self.flag, self.dirn]
        out = np.zeros(self.n, dtype=complex)
        np.add.at(out, self.out, vals)
        return out


def poisson_bracket(F: PolySymbol, G: PolySymbol) -> PolySymbol:
    """``{F, G} = i sum_j (dF/dconj(z_j) dG/dz_j - dF/dz_j dG/dconj(z_j))``."""
    out = PolySymbol(F.n_modes)
    for j in range(F.n_modes):
        out = out + F.d_zbar(j) * G.d_z(j) - F.d_z(j) * G.d_zbar(j)
    return out.scale(1j)


def number_symbol(n_modes: int, which) -> PolySymbol:
    """``sum_{j in which} conj(z_j) z_j``."""
    terms = []
    for j in which:
        e = [0] * n_modes
        e[j] = 1
        terms.append((e, e, 1.0))
    return PolySymbol(n_modes, terms)


# Galerkin reductions

def _unit(n, *idx):
    e = [0] * n
    for i in idx:
        e[i] += 1
    return e


class _Builder:
    def __init__(self, n):
        self.n = n
        self.terms = []

    def add(self, create, annihilate, c):
        self.terms.append((_unit(self.n, *create), _unit(self.n, *annihilate), c))

    def add_with_conj(self, create, annihilate, c):
        self.add(create, annihilate, c)
        self.add(annihilate, create, np.conj(c))

    def build(self, tol):
        return PolySymbol(self.n, self.terms).drop_below(tol)


def reduce_energy(kind: str, modes: ModeSet, V: ExternalPotential, params: RenormParams,
                  *, g=None, coupling: float = 1.0, tol: float = 1e-15) -> PolySymbol:
    """Exact polynomial obtained by inserting ``u = sum z_j phi_j``,
    ``alpha = sum z_m psi_m`` into one of the energy functionals.

    ``kind`` is ``free``, ``yukawa``, ``dressed`` or ``dressing_gen``; the
    latter uses ``g`` when given and the ``sigma = INF`` dressing kernel otherwise.
    """
    if kind not in ("free", "yukawa", "dressed", "dressing_gen"):
        raise ParameterError(f"unknown energy kind {kind!r}")
    grid = modes.grid
    nn, nm = modes.n_nuc, modes.n_mes
    b = _Builder(modes.n_modes)
    dressed = kind in ("dressed", "dressing_gen")
    p = params.with_sigma(INF) if dressed and params.sigma is not INF else params
    K = kernels(grid, p, V, coupling)
    mes = list(range(nn, nn + nm))
    phi = modes.nucleon
    sq = np.sqrt(grid.cell_k)

    # F(conj(phi_j) phi_l)(k) on the full grid, shape (nn, nn, *shape)
    dens_ft = np.array([[plain_ft(np.conj(phi[j]) * phi[l], grid) for l in range(nn)] for j in range(nn)])

    def add_vertex(kernel):
        # 2 Re <alpha, kernel F(|u|^2)>
        kv = modes.meson_values(kernel)
        for a, m in enumerate(mes):
            for j in range(nn):
                for l in range(nn):
                    c = sq * kv[a] * dens_ft[j, l].reshape(-1)[modes.meson_index[a]]
                    b.add_with_conj((m, j), (l,), c)

    if kind == "dressing_gen":
        kernel = K.g if g is None else grid.check(g, "kernel")
        add_vertex(kernel)
        return b.build(tol)

    # free part
    H1 = _one_body(modes, V, p)
    for j in range(nn):
        for l in range(nn):
            if H1[j, l] != 0:
                b.add((j,), (l,), H1[j, l])
    for a, m in enumerate(mes):
        b.add((m,), (m,), modes.meson_values(K.omega)[a])
    if kind == "free":
        return b.build(tol)

    if kind == "yukawa":
        add_vertex(K.yukawa)
        return b.build(tol)

    add_vertex(K.yukawa_cut)
    _add_dressed_quartic(b, modes, K, p, dens_ft)
    return b.build(tol)


def _one_body(modes: ModeSet, V: ExternalPotential, p: RenormParams) -> np.ndarray:
    grid = modes.grid
    K = kernels(grid, p, V)
    hphi = [inverse_plain_ft(K.kinetic * plain_ft(f, grid), grid) + K.potential * f for f in modes.nucleon]
    return np.array([[grid.inner_x(a, hb) for hb in hphi] for a in modes.nucleon])


def _add_dressed_quartic(b: _Builder, modes: ModeSet, K, p: RenormParams, dens_ft):
    grid = modes.grid
    nn, nm = modes.n_nuc, modes.n_mes
    mes = list(range(nn, nn + nm))
    phi = modes.nucleon
    sq = np.sqrt(grid.cell_k)
    kx = np.array([np.tensordot(kv, grid.x, axes=1) for kv in modes.meson_k])
    # beta[a, i](x): value of B_i per unit meson amplitude z_a
    rvals = np.array([modes.meson_values(K.r[i]) for i in range(grid.dim)])  # (dim, nm)
    beta = np.array([[sq * np.conj(rvals[i, a]) * np.exp(1j * kx[a]) for i in range(grid.dim)]
                     for a in range(nm)])  # (nm, dim, *shape)
    pair = np.conj(phi)[:, None] * phi[None, :]  # conj(phi_j) phi_l
    hx = grid.cell_x

    # (1/2M) int |u|^2 sum_i (B_i + conj B_i)^2
    for j in range(nn):
        for l in range(nn):
            w = pair[j, l]
            for a, ma in enumerate(mes):
                for c, mc in enumerate(mes):
                    bb = np.sum(beta[a] * beta[c], axis=0)
                    bcb = np.sum(np.conj(beta[a]) * beta[c], axis=0)
                    f = hx / (2.0 * p.M)
                    b.add((j,), (l, ma, mc), f * np.sum(w * bb))
                    b.add((j, ma, mc), (l,), f * np.sum(w * np.conj(bb)))
                    b.add((j, ma), (l, mc), 2.0 * f * np.sum(w * bcb))

    # -(2/M) Re int conj(B_i) conj(u) D_i u
    dphi = np.array([spectral_gradient(f, grid) for f in phi])  # (nn, dim, *shape)
    for a, ma in enumerate(mes):
        for j in range(nn):
            for l in range(nn):
                val = np.sum(np.conj(beta[a]) * np.conj(phi[j])[None] * dphi[l])
                b.add_with_conj((ma, j), (l,), -hx / p.M * val)

    # pair term: dk sum w(k) |F(|u|^2)|^2
    wflat = K.pair.reshape(-1)
    D = dens_ft.reshape(nn, nn, -1)
    for j in range(nn):
        for l in range(nn):
            for jp in range(nn):
                for lp in range(nn):
                    c = grid.cell_k * np.sum(wflat * D[j, l] * np.conj(D[jp, lp]))
                    b.add((j, lp), (l, jp), c)
