"""Truncated bosonic Fock space with ``[a, a*] = eps``.

The basis is every occupation tuple with per-mode caps and a cap on the total
number of quanta. Operators are scipy sparse matrices; exponentials are
applied with ``scipy.sparse.linalg.expm_multiply`` (Krylov-free truncated
Taylor with norm estimates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm as dense_expm
from scipy.sparse.linalg import expm_multiply

from .errors import NumericError, ParameterError, ResourceError, TruncationError
from .fields import ExternalPotential
from .flow import symbol_flow
from .polysym import ModeSet, PolySymbol, reduce_energy
from .renorm import RenormParams

__all__ = [
    "FockSpace",
    "QuantumState",
    "ConjugatedOperator",
    "sector_cutoff",
    "ladder",
    "weyl",
    "weyl_apply",
    "wick",
    "hamiltonians",
    "coherent_state",
    "propagate",
    "correspondence_experiment",
    "MAX_DIM",
    "DENSE_DIM",
]

MAX_DIM = 6000
DENSE_DIM = 512


def _enumerate(caps, n_max):
    out = []

    def rec(prefix, left):
        j = len(prefix)
        if j == len(caps):
            out.append(tuple(prefix))
            return
        for k in range(min(caps[j], left) + 1):
            rec(prefix + [k], left - k)

    rec([], n_max)
    return out


@dataclass(frozen=True, eq=False)
class FockSpace:
    """Occupation-number basis for ``n_modes`` modes, the first ``n_nuc`` of them nucleons."""

    n_modes: int
    n_max: int
    eps: float
    caps: tuple = None
    n_nuc: int = 1

    def __post_init__(self):
        if self.n_modes < 1 or self.n_max < 0:
            raise ParameterError("need at least one mode and a non-negative total cap")
        if not self.eps > 0:
            raise ParameterError(f"eps must be positive, got {self.eps}")
        caps = tuple(self.caps) if self.caps is not None else (self.n_max,) * self.n_modes
        if len(caps) != self.n_modes or min(caps) < 0:
            raise ParameterError("caps must give one non-negative cap per mode")
        object.__setattr__(self, "caps", tuple(int(c) for c in caps))
        if not 0 <= self.n_nuc <= self.n_modes:
            raise ParameterError("n_nuc out of range")
        if self.estimated_dim() > MAX_DIM:
            raise ResourceError(f"basis of about {self.estimated_dim()} states exceeds {MAX_DIM}")

    def estimated_dim(self) -> int:
        if all(c >= self.n_max for c in self.caps):
            return math.comb(self.n_max + self.n_modes, self.n_modes)
        return len(_enumerate(self.caps, self.n_max))

    @cached_property
    def basis(self) -> list:
        return _enumerate(self.caps, self.n_max)

    @cached_property
    def index(self) -> dict:
        return {occ: i for i, occ in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def occupations(self) -> np.ndarray:
        return np.array(self.basis, dtype=int).reshape(self.dim, self.n_modes)

    @cached_property
    def nucleon_count(self) -> np.ndarray:
        return self.occupations[:, : self.n_nuc].sum(axis=1)

    @cached_property
    def boundary(self) -> np.ndarray:
        """Basis states where some creation operator is cut off."""
        occ = self.occupations
        return (occ.sum(axis=1) >= self.n_max) | np.any(occ >= np.array(self.caps), axis=1)

    @cached_property
    def _lowering(self) -> list:
        ops = []
        for j in range(self.n_modes):
            rows, cols, vals = [], [], []
            for i, occ in enumerate(self.basis):
                if occ[j]:
                    tgt = list(occ)
                    tgt[j] -= 1
                    rows.append(self.index[tuple(tgt)])
                    cols.append(i)
                    vals.append(math.sqrt(self.eps * occ[j]))
            ops.append(sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex))
        return ops

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[(0,) * self.n_modes]] = 1.0
        return v

    def number(self, which=None) -> sp.csr_matrix:
        """``sum_j a_j* a_j`` over ``which`` (default: every mode); eigenvalues are multiples of eps."""
        which = range(self.n_modes) if which is None else which
        diag = self.eps * self.occupations[:, list(which)].sum(axis=1)
        return sp.diags(diag.astype(complex), format="csr")

    def nucleon_number(self) -> sp.csr_matrix:
        return self.number(range(self.n_nuc))

    def cap_weight(self, psi) -> float:
        """Probability carried by the cap boundary."""
        return float(np.sum(np.abs(psi[self.boundary]) ** 2))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalized amplitude vector over a Fock basis."""

    space: FockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.space.dim,):
            raise ParameterError("amplitude vector does not match the basis")
        nrm = np.linalg.norm(a)
        if abs(nrm - 1.0) > 1e-12:
            raise NumericError(f"state norm {nrm} differs from one", norm=nrm)
        object.__setattr__(self, "amplitudes", a)

    def expect(self, op) -> complex:
        return complex(np.vdot(self.amplitudes, op @ self.amplitudes))


def ladder(space: FockSpace, mode: int):
    """``(a, a*)`` for one mode; ``a`` lowers with amplitude ``sqrt(eps n)``."""
    if not 0 <= mode < space.n_modes:
        raise ParameterError(f"mode {mode} not in the space")
    a = space._lowering[mode]
    return a, a.conj().T.tocsr()


def _field(space: FockSpace, xi, modes) -> sp.csr_matrix:
    """``(a*(xi) + a(xi)) / sqrt(2)`` restricted to ``modes``."""
    op = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for j in modes:
        if xi[j] != 0:
            a, ad = ladder(space, j)
            op = op + xi[j] * ad + np.conj(xi[j]) * a
    return op / math.sqrt(2.0)


def _check_weyl(space, xi):
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (space.n_modes,):
        raise ParameterError("xi must have one entry per mode")
    if space.eps * float(np.vdot(xi, xi).real) > 0.1 * space.n_max:
        raise TruncationError("eps |xi|^2 exceeds 0.1 N_max; the truncated Weyl operator is unreliable")
    return xi


def weyl(space: FockSpace, xi) -> np.ndarray:
    """Dense Weyl operator, nucleon factor on the left."""
    xi = _check_weyl(space, xi)
    if space.dim > 4 * DENSE_DIM:
        raise ResourceError("dense Weyl operator requested on a large basis; use weyl_apply")
    nuc, mes = range(space.n_nuc), range(space.n_nuc, space.n_modes)
    w1 = dense_expm(1j * _field(space, xi, nuc).toarray())
    w2 = dense_expm(1j * _field(space, xi, mes).toarray())
    return w1 @ w2


def weyl_apply(space: FockSpace, xi, psi) -> np.ndarray:
    """``W(xi) psi`` without forming the operator."""
    xi = _check_weyl(space, xi)
    nuc, mes = range(space.n_nuc), range(space.n_nuc, space.n_modes)
    out = expm_multiply(1j * _field(space, xi, mes).tocsc(), psi)
    return expm_multiply(1j * _field(space, xi, nuc).tocsc(), out)


def _monomial(space, mu, nu, cache, ordering):
    def power(j, p, create):
        key = (j, p, create)
        if key not in cache:
            a, ad = ladder(space, j)
            base = ad if create else a
            op = sp.identity(space.dim, dtype=complex, format="csr")
            for _ in range(p):
                op = base @ op
            cache[key] = op
        return cache[key]

    create = sp.identity(space.dim, dtype=complex, format="csr")
    annihilate = sp.identity(space.dim, dtype=complex, format="csr")
    for j in range(space.n_modes):
        if mu[j]:
            create = create @ power(j, mu[j], True)
        if nu[j]:
            annihilate = annihilate @ power(j, nu[j], False)
    if ordering == "normal":
        return create @ annihilate
    return 0.5 * (create @ annihilate + annihilate @ create)


def wick(space: FockSpace, sym: PolySymbol, *, ordering: str = "normal", max_degree: int = 4) -> sp.csr_matrix:
    """Quantize ``sym`` with creators to the left (``normal``) or averaged with
    the anti-normal product (``symmetric``)."""
    if sym.n_modes != space.n_modes:
        raise ParameterError("symbol and Fock space have different mode counts")
    if ordering not in ("normal", "symmetric"):
        raise ParameterError(f"unknown ordering {ordering!r}")
    if sym.total_degree > max_degree:
        raise ParameterError(f"symbol degree {sym.total_degree} exceeds the configured maximum {max_degree}")
    cache: dict = {}
    op = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for (mu, nu), c in sorted(sym.terms.items()):
        op = op + c * _monomial(space, mu, nu, cache, ordering)
    op.sum_duplicates()
    return op.tocsr()


def sector_cutoff(eps: float, sigma0: float, K: float) -> int:
    """Largest admitted nucleon number: ``floor((sigma0 - 2K) / (2K eps) - 1)``, at least zero."""
    if not (eps > 0 and K > 0):
        raise ParameterError("eps and K must be positive")
    val = (sigma0 - 2.0 * K) / (2.0 * K * eps) - 1.0
    # absorb representation error so exact integers are not floored down
    return max(0, math.floor(val + 1e-9 * max(1.0, abs(val))))


class ConjugatedOperator:
    """``exp(-iT/eps) H exp(iT/eps)`` kept in factored form."""

    def __init__(self, H, T, eps):
        self.H, self.T, self.eps = H.tocsc(), T.tocsc(), eps
        self.shape = H.shape

    def _rotate(self, psi, sign):
        return expm_multiply((sign * 1j / self.eps) * self.T, psi)

    def __matmul__(self, psi):
        return self._rotate(self.H @ self._rotate(psi, +1), -1)

    def evolve(self, psi, t):
        inner = expm_multiply((-1j * t / self.eps) * self.H, self._rotate(psi, +1))
        return self._rotate(inner, -1)

    def toarray(self) -> np.ndarray:
        if self.shape[0] > 4 * DENSE_DIM:
            raise ResourceError("dense conjugated operator requested on a large basis")
        U = dense_expm((-1j / self.eps) * self.T.toarray())
        return U @ self.H.toarray() @ U.conj().T


def hamiltonians(space: FockSpace, modes: ModeSet, V: ExternalPotential, params: RenormParams,
                 K: float = 1.0, *, ordering: str = "normal", coupling: float = 1.0):
    """``(H_hat_ren, T_inf, H_ren)``: quantized dressed energy restricted to nucleon
    sectors up to the cutoff, quantized dressing generator, and their conjugate."""
    if modes.n_modes != space.n_modes or modes.n_nuc != space.n_nuc:
        raise ParameterError("mode set and Fock space disagree")
    Hs = reduce_energy("dressed", modes, V, params, coupling=coupling)
    Ts = reduce_energy("dressing_gen", modes, V, params, coupling=coupling)
    H = wick(space, Hs, ordering=ordering)
    keep = (space.nucleon_count <= sector_cutoff(space.eps, params.sigma0, K)).astype(complex)
    P = sp.diags(keep, format="csr")
    H_hat = (P @ H @ P).tocsr()
    T = wick(space, Ts, ordering=ordering)
    return H_hat, T, ConjugatedOperator(H_hat, T, space.eps)


def coherent_state(space: FockSpace, z0) -> QuantumState:
    """``exp((a*(z0) - a(z0)) / eps)`` applied to the vacuum."""
    z0 = np.asarray(z0, dtype=complex)
    if z0.shape != (space.n_modes,):
        raise ParameterError("z0 must have one entry per mode")
    quanta = float(np.vdot(z0, z0).real) / space.eps
    if quanta > 0.5 * space.n_max:
        raise TruncationError(f"coherent state carries {quanta:.3g} quanta, above 0.5 N_max")
    gen = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for j in range(space.n_modes):
        if z0[j] != 0:
            a, ad = ladder(space, j)
            gen = gen + z0[j] * ad - np.conj(z0[j]) * a
    psi = expm_multiply((gen / space.eps).tocsc(), space.vacuum())
    return QuantumState(space, psi / np.linalg.norm(psi))


def propagate(space: FockSpace, psi, H, t: float, eps: float | None = None) -> np.ndarray:
    """``exp(-i t H / eps) psi``; ``H`` is a sparse matrix or a :class:`ConjugatedOperator`."""
    eps = space.eps if eps is None else eps
    psi = psi.amplitudes if isinstance(psi, QuantumState) else np.asarray(psi, dtype=complex)
    if t == 0:
        return psi.copy()
    if isinstance(H, ConjugatedOperator):
        out = H.evolve(psi, t)
    else:
        out = expm_multiply((-1j * t / eps) * H.tocsc(), psi)
    if not np.all(np.isfinite(out)):
        raise NumericError("propagation produced non-finite amplitudes", t=t)
    drift = abs(np.linalg.norm(out) - np.linalg.norm(psi))
    if drift > 1e-8:
        raise NumericError(f"propagation lost unitarity (norm drift {drift:.2e})", t=t, drift=drift)
    return out


def classical_undressed_flow(modes: ModeSet, V, params, z0, t, *, steps_per_unit=400, sub_steps=16,
                             coupling=1.0):
    """``D(1) Ehat(t) D(-1) z0`` on the reduced symbols."""
    Hs = reduce_energy("dressed", modes, V, params, coupling=coupling)
    Ts = reduce_energy("dressing_gen", modes, V, params, coupling=coupling)
    z = symbol_flow(Ts, z0, -1.0, sub_steps)
    z = symbol_flow(Hs, z, t, max(1, int(math.ceil(abs(t) * steps_per_unit))))
    return symbol_flow(Ts, z, 1.0, sub_steps)


def correspondence_experiment(modes: ModeSet, V: ExternalPotential, params: RenormParams, z0, xi,
                              t_grid, eps_list, *, n_max: int, K: float = 1.0,
                              ordering: str = "normal", coupling: float = 1.0) -> list[dict]:
    """Quantum characteristic function versus its classical limit along the flow."""
    z0 = np.asarray(z0, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    classical = {t: classical_undressed_flow(modes, V, params, z0, t, coupling=coupling) for t in t_grid}
    rows = []
    for eps in eps_list:
        space = FockSpace(modes.n_modes, n_max, eps, n_nuc=modes.n_nuc)
        _, _, H_ren = hamiltonians(space, modes, V, params, K, ordering=ordering, coupling=coupling)
        psi0 = coherent_state(space, z0).amplitudes
        for t in t_grid:
            psi = propagate(space, psi0, H_ren, t)
            Q = complex(np.vdot(psi, weyl_apply(space, xi, psi)))
            C = complex(np.exp(1j * math.sqrt(2.0) * np.vdot(xi, classical[t]).real))
            rows.append({
                "epsilon": eps, "t": t, "Q": Q, "C": C, "err": abs(Q - C),
                "basis_dim": space.dim, "cap_violation": space.cap_weight(psi),
            })
    return rows
