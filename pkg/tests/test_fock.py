import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skg.errors import NumericError, ParameterError, ResourceError, TruncationError
from skg.fields import ExternalPotential
from skg.fock import (
    ConjugatedOperator,
    FockSpace,
    QuantumState,
    coherent_state,
    correspondence_experiment,
    hamiltonians,
    ladder,
    propagate,
    sector_cutoff,
    weyl,
    weyl_apply,
    wick,
)
from skg.polysym import ModeSet, PolySymbol, number_symbol, reduce_energy
from skg.renorm import RenormParams
from skg.spectral import Grid

P = RenormParams()
TRAP = ExternalPotential("harmonic", 1.0)
GRID = Grid(1, 128, 8.0)
MODES = ModeSet.harmonic(GRID, 1, [(4,), (5,), (6,)], 1.0, 1.0)


def _basis_vec(space, occ):
    e = np.zeros(space.dim, dtype=complex)
    e[space.index[tuple(occ)]] = 1.0
    return e


def test_space_validation():
    with pytest.raises(ParameterError):
        FockSpace(2, 3, 0.0)
    with pytest.raises(ParameterError):
        FockSpace(2, 3, 0.5, caps=(1,))
    with pytest.raises(ResourceError):
        FockSpace(6, 20, 0.5)
    s = FockSpace(3, 4, 0.5, caps=(2, 4, 1))
    assert s.dim == len(set(s.basis)) == s.estimated_dim()
    assert all(sum(o) <= 4 and o[0] <= 2 and o[2] <= 1 for o in s.basis)


def test_single_mode_ladder():
    eps = 0.3
    s = FockSpace(1, 3, eps)
    a, ad = ladder(s, 0)
    std = np.diag(np.sqrt([1.0, 2.0, 3.0]), 1)
    order = [s.index[(n,)] for n in range(4)]
    assert np.allclose(a.toarray()[np.ix_(order, order)], math.sqrt(eps) * std, atol=1e-15)
    assert np.allclose(ad.toarray(), a.toarray().conj().T)
    with pytest.raises(ParameterError):
        ladder(s, 1)


def test_ccr_below_cap():
    eps = 0.25
    s = FockSpace(3, 5, eps)
    for j in range(3):
        a, ad = ladder(s, j)
        comm = (a @ ad - ad @ a).toarray()
        for i in np.flatnonzero(~s.boundary):
            e = np.zeros(s.dim)
            e[i] = 1
            assert np.allclose(comm @ e, eps * e, atol=1e-14)
        a2, ad2 = ladder(s, (j + 1) % 3)
        cross = (a @ ad2 - ad2 @ a).toarray()
        assert np.max(np.abs(cross[:, ~s.boundary])) <= 1e-14


def test_number_spectrum():
    eps = 0.4
    s = FockSpace(2, 4, eps)
    vals = np.unique(np.round(np.linalg.eigvalsh(s.number().toarray()), 12))
    assert np.allclose(vals, eps * np.arange(5))


def test_weyl_identities():
    s = FockSpace(2, 20, 0.25)
    xi = np.array([0.3 + 0.2j, -0.4j])
    assert np.allclose(weyl(s, np.zeros(2)), np.eye(s.dim), atol=1e-15)
    W = weyl(s, xi)
    low = np.flatnonzero(s.occupations.sum(axis=1) <= 6)
    prod = weyl(s, -xi) @ W
    assert np.max(np.abs(prod[:, low] - np.eye(s.dim)[:, low])) <= 1e-10
    psi = coherent_state(s, np.array([0.2, 0.1j])).amplitudes
    assert np.allclose(weyl_apply(s, xi, psi), W @ psi, atol=1e-12)


def test_weyl_relation_phase():
    eps = 0.25
    s = FockSpace(1, 40, eps)
    x1, x2 = np.array([0.6 + 0.8j]), np.array([np.exp(0.7j)])
    lhs = weyl(s, x1) @ weyl(s, x2)
    rhs = weyl(s, x1 + x2)
    phase = np.exp(-0.5j * eps * np.imag(np.vdot(x1, x2)))
    for n in range(11):
        e = _basis_vec(s, (n,))
        assert np.linalg.norm(lhs @ e - phase * rhs @ e) <= 1e-8
    # the opposite convention is clearly wrong
    assert np.linalg.norm(lhs @ s.vacuum() - np.conj(phase) * rhs @ s.vacuum()) > 1e-2


def test_weyl_truncation_guard():
    s = FockSpace(1, 10, 0.5)
    with pytest.raises(TruncationError):
        weyl(s, np.array([2.0]))


def test_wick_number_and_free():
    s = FockSpace(4, 4, 0.3, n_nuc=1)
    N1 = wick(s, number_symbol(4, [0]))
    assert abs(N1 - s.nucleon_number()).max() <= 1e-14
    H0 = wick(s, reduce_energy("free", MODES, TRAP, P)).toarray()
    assert np.allclose(H0, np.diag(np.diag(H0)), atol=0)
    energies = np.concatenate([MODES.nucleon_energy, np.sqrt(MODES.meson_k[:, 0] ** 2 + 1)])
    assert np.allclose(np.diag(H0).real, s.occupations @ energies * s.eps, atol=1e-12)


def _brute_force(space, sym):
    """Normal-ordered quantization built transition by transition."""
    eps = space.eps
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for (mu, nu), c in sym.terms.items():
        for col, occ in enumerate(space.basis):
            occ = list(occ)
            amp = c
            for j, p in enumerate(nu):
                for _ in range(p):
                    if occ[j] == 0:
                        amp = 0
                        break
                    amp *= math.sqrt(eps * occ[j])
                    occ[j] -= 1
            if amp == 0:
                continue
            for j, p in enumerate(mu):
                for _ in range(p):
                    occ[j] += 1
                    amp *= math.sqrt(eps * occ[j])
            row = space.index.get(tuple(occ))
            if row is not None:
                out[row, col] += amp
    return out


def test_wick_against_brute_force():
    sym = PolySymbol(2, [((2, 0), (0, 1), 0.7 - 0.2j), ((0, 1), (2, 0), 0.7 + 0.2j),
                         ((1, 1), (1, 0), 1.3), ((1, 0), (1, 1), 1.3), ((0, 0), (1, 0), 0.4j),
                         ((1, 0), (0, 0), -0.4j)])
    s = FockSpace(2, 6, 0.35, caps=(4, 6))
    assert np.allclose(wick(s, sym).toarray(), _brute_force(s, sym), atol=1e-14)


def test_wick_orderings_and_degree_guard():
    s = FockSpace(2, 5, 0.3)
    n = number_symbol(2, [0])
    sym = wick(s, n, ordering="symmetric").toarray()
    inner = np.flatnonzero(~s.boundary)
    expect = s.nucleon_number().toarray() + 0.5 * s.eps * np.eye(s.dim)
    assert np.allclose(sym[np.ix_(inner, inner)], expect[np.ix_(inner, inner)])
    with pytest.raises(ParameterError):
        wick(s, n * n * n)
    with pytest.raises(ParameterError):
        wick(s, n, ordering="weyl")
    with pytest.raises(ParameterError):
        wick(s, number_symbol(3, [0]))


def test_sector_cutoff():
    assert sector_cutoff(1.0, 6.0, 1.0) == 1
    assert sector_cutoff(0.3, 2.0, 1.0) == 0
    assert sector_cutoff(0.1, 1.0, 0.05) == 89
    with pytest.raises(ParameterError):
        sector_cutoff(0.0, 1.0, 1.0)


def test_hamiltonian_structure():
    s = FockSpace(4, 6, 0.2, n_nuc=1)
    H, T, Hren = hamiltonians(s, MODES, TRAP, P, K=0.05)
    assert abs(H - H.conj().T).max() <= 1e-13
    assert abs(T - T.conj().T).max() <= 1e-13
    N1 = s.nucleon_number()
    assert abs(H @ N1 - N1 @ H).max() == 0
    ev = np.linalg.eigvalsh(H.toarray())
    ev_ren = np.linalg.eigvalsh(0.5 * (Hren.toarray() + Hren.toarray().conj().T))
    assert np.allclose(ev, ev_ren, atol=1e-9)
    psi = coherent_state(s, [0.3, 0.1, 0.0, 0.1j]).amplitudes
    assert np.allclose(Hren @ psi, Hren.toarray() @ psi, atol=1e-10)


def test_sector_projection_kills_nucleons():
    # sigma0 <= 2K leaves only the zero-nucleon sector
    s = FockSpace(4, 4, 0.5, n_nuc=1)
    H, _, _ = hamiltonians(s, MODES, TRAP, P, K=1.0)
    occupied = np.flatnonzero(s.nucleon_count >= 1)
    assert abs(H[:, occupied]).max() == 0 and abs(H[occupied, :]).max() == 0


def test_coherent_state():
    s = FockSpace(2, 30, 0.1)
    assert np.allclose(coherent_state(s, [0, 0]).amplitudes, s.vacuum())
    z0 = np.array([0.4 - 0.2j, 0.3])
    st_ = coherent_state(s, z0)
    assert st_.expect(s.number()).real == pytest.approx(np.vdot(z0, z0).real, abs=1e-9)
    xi = np.array([0.5, -0.5j])
    expected = np.exp(1j * math.sqrt(2) * np.vdot(xi, z0).real - s.eps * np.vdot(xi, xi).real / 4)
    assert np.vdot(st_.amplitudes, weyl_apply(s, xi, st_.amplitudes)) == pytest.approx(expected, abs=1e-9)
    with pytest.raises(TruncationError):
        coherent_state(s, [3.0, 0.0])
    with pytest.raises(NumericError):
        QuantumState(s, 2 * s.vacuum())


def test_propagate():
    s = FockSpace(4, 5, 0.3, n_nuc=1)
    H0 = wick(s, reduce_energy("free", MODES, TRAP, P))
    psi = coherent_state(s, [0.3, 0.1, 0.2j, 0.0]).amplitudes
    assert np.array_equal(propagate(s, psi, H0, 0.0), psi)
    out = propagate(s, psi, H0, 0.7)
    assert np.allclose(out, np.exp(-0.7j * H0.diagonal() / s.eps) * psi, atol=1e-12)
    H, _, Hren = hamiltonians(s, MODES, TRAP, P, K=0.05)
    for op in (H, Hren):
        assert abs(np.linalg.norm(propagate(s, psi, op, 0.5)) - 1) <= 1e-10
    assert isinstance(Hren, ConjugatedOperator)


def test_correspondence_at_time_zero_and_free_control():
    z0 = [0.35, 0.2 + 0.1j, -0.15j, 0.1]
    xi = np.array([0.5, 0.5j, 0.5, -0.5])
    nxi = np.vdot(xi, xi).real
    rows = correspondence_experiment(MODES, TRAP, P, z0, xi, [0.0], [0.4, 0.2], n_max=12, K=0.05)
    for r in rows:
        assert r["err"] == pytest.approx(abs(math.exp(-r["epsilon"] * nxi / 4) - 1), abs=1e-8)
    rows = correspondence_experiment(MODES, TRAP, P, z0, xi, [0.3], [0.2], n_max=12, K=0.05, coupling=0.0)
    assert rows[0]["err"] == pytest.approx(abs(math.exp(-0.2 * nxi / 4) - 1), abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(re=st.floats(-1, 1), im=st.floats(-1, 1))
def test_weyl_unitary_on_low_states(re, im):
    s = FockSpace(1, 40, 0.25)
    W = weyl(s, np.array([complex(re, im)]))
    for n in range(6):
        e = _basis_vec(s, (n,))
        assert abs(np.linalg.norm(W @ e) - 1) <= 1e-8
