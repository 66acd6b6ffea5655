import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skg.errors import ParameterError, ResourceError, ShapeError
from skg.fields import ExternalPotential, dressing_functional, energy_dressed, energy_free, energy_yukawa, kernels
from skg.polysym import ModeSet, PolySymbol, number_symbol, poisson_bracket, reduce_energy
from skg.renorm import RenormParams
from skg.spectral import Grid

P = RenormParams()
TRAP = ExternalPotential("harmonic", 1.0)
ZERO = ExternalPotential()
G1 = Grid(1, 128, 8.0)
HARM = ModeSet.harmonic(G1, 2, [(3,), (-2,), (5,)], 1.0, 1.0)
WAVES = ModeSet.plane_waves(G1, [(0,), (2,)], [(2,), (-3,)], 1.0)


def _random_symbol(n, degree, count, seed):
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(count):
        p = rng.integers(0, degree + 1)
        mu = np.bincount(rng.integers(0, n, p), minlength=n)
        nu = np.bincount(rng.integers(0, n, degree - p), minlength=n)
        terms.append((mu, nu, complex(rng.normal(), rng.normal())))
    return PolySymbol(n, terms)


def _rz(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return scale * (rng.normal(size=n) + 1j * rng.normal(size=n))


def test_basic_evaluation():
    assert PolySymbol(3).evaluate(np.ones(3)) == 0
    z = np.array([1.0, 1j, 0.0])
    assert number_symbol(3, range(3))(z) == pytest.approx(2.0)


def test_brute_force_evaluation():
    sym = _random_symbol(4, 3, 30, 0)
    z = _rz(4, 1)
    total = 0j
    for (mu, nu), c in sym.terms.items():
        term = c
        for j in range(4):
            for _ in range(mu[j]):
                term *= np.conj(z[j])
            for _ in range(nu[j]):
                term *= z[j]
        total += term
    assert abs(sym(z) - total) <= 1e-13 * max(1.0, abs(total))


def test_construction_rules():
    s = PolySymbol(2, [((1, 0), (1, 0), 1.0), ((1, 0), (1, 0), 2.0), ((0, 1), (0, 0), 0.0)])
    assert len(s) == 1 and s.terms[((1, 0), (1, 0))] == 3.0
    with pytest.raises(ShapeError):
        PolySymbol(2, [((1,), (0, 0), 1.0)])
    with pytest.raises(ParameterError):
        PolySymbol(2, [((-1, 0), (0, 0), 1.0)])
    with pytest.raises(ShapeError):
        s(np.zeros(3))
    assert s.degree == (1, 1) and s.total_degree == 2


def test_quadratic_vector_field():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Om = A + A.conj().T
    sym = PolySymbol(3, [(np.eye(3, dtype=int)[j], np.eye(3, dtype=int)[l], Om[j, l])
                         for j in range(3) for l in range(3)])
    z = _rz(3, 3)
    assert np.allclose(sym.gradient_zbar(z), Om @ z, atol=1e-14)
    assert np.allclose(sym.vector_field(z), -1j * Om @ z, atol=1e-14)
    assert sym(z).real == pytest.approx(np.vdot(z, Om @ z).real)


def test_gradient_and_hessian_finite_differences():
    sym = _random_symbol(4, 4, 25, 4)
    sym = sym + sym.conj()
    z, dz = _rz(4, 5, 0.5), _rz(4, 6)
    h = 1e-5
    # real symbol: dH = 2 Re sum conj(dH/dconj z) dz
    fd = (sym(z + h * dz) - sym(z - h * dz)).real / (2 * h)
    assert fd == pytest.approx(2 * np.real(np.vdot(sym.gradient_zbar(z), dz)), rel=1e-8)
    fdg = (sym.gradient_zbar(z + h * dz) - sym.gradient_zbar(z - h * dz)) / (2 * h)
    assert np.allclose(sym.gradient_zbar_derivative(z, dz), fdg, atol=1e-8)


def test_symbolic_algebra():
    a, b = _random_symbol(3, 2, 10, 7), _random_symbol(3, 3, 10, 8)
    z = _rz(3, 9)
    assert (a * b)(z) == pytest.approx(a(z) * b(z))
    assert (a + b)(z) == pytest.approx(a(z) + b(z))
    assert (a - a)(z) == 0
    assert a.conj()(z) == pytest.approx(np.conj(a(z)))
    assert (a + a.conj()).is_real()
    assert a.scale(2j)(z) == pytest.approx(2j * a(z))
    assert len(a.drop_below(np.inf)) == 0


def test_json_round_trip():
    a = _random_symbol(4, 3, 12, 10)
    b = PolySymbol.from_json(a.to_json())
    assert b.terms == a.terms and b.n_modes == a.n_modes


def test_poisson_bracket_of_numbers():
    n = number_symbol(3, [0])
    f = PolySymbol(3, [((1, 0, 0), (0, 1, 0), 1.0)])
    z = _rz(3, 11)
    # {|z0|^2, conj(z0) z1} = -i conj(z0) z1
    assert poisson_bracket(n, f)(z) == pytest.approx(-1j * np.conj(z[0]) * z[1])
    assert poisson_bracket(n, f)(z) == pytest.approx(-poisson_bracket(f, n)(z))
    assert len(poisson_bracket(n, n)) == 0


def test_mode_sets():
    with pytest.raises(ResourceError):
        ModeSet.plane_waves(G1, [(0,)], [(i,) for i in range(1, 9)])
    with pytest.raises(ParameterError):
        ModeSet.plane_waves(G1, [(0,)], [(1,), (1,)])
    z = _rz(HARM.n_modes, 12)
    assert np.allclose(HARM.project(HARM.to_state(z)), z, atol=1e-12)
    assert HARM.nucleon_energy == pytest.approx([0.5, 1.5], abs=1e-10)
    assert np.allclose(HARM.meson_k[:, 0], [3 * G1.dk, -2 * G1.dk, 5 * G1.dk])


def test_free_reduction_is_diagonal():
    sym = reduce_energy("free", WAVES, ZERO, P)
    w = np.sqrt(WAVES.meson_k[:, 0] ** 2 + 1)
    diag = np.concatenate([WAVES.nucleon_energy, w])
    expected = {(tuple(np.eye(4, dtype=int)[j]), tuple(np.eye(4, dtype=int)[j])): diag[j] for j in range(4)
                if diag[j] != 0}
    assert set(sym.terms) == set(expected)
    for k, v in expected.items():
        assert sym.terms[k] == pytest.approx(v, rel=1e-12)


@pytest.mark.parametrize("modes,V", [(HARM, TRAP), (WAVES, ZERO)])
def test_reductions_match_grid_functionals(modes, V):
    for seed in range(3):
        z = _rz(modes.n_modes, seed, 0.6)
        s = modes.to_state(z)
        for kind, fn in (("free", lambda st: energy_free(st, V, P)),
                         ("yukawa", lambda st: energy_yukawa(st, V, P, 1.3)),
                         ("dressed", lambda st: energy_dressed(st, V, P, 1.3))):
            sym = reduce_energy(kind, modes, V, P, coupling=1.3)
            assert sym.is_real()
            assert sym(z).real == pytest.approx(fn(s), rel=1e-10, abs=1e-12)
        gen = reduce_energy("dressing_gen", modes, V, P, coupling=1.3)
        assert gen(z).real == pytest.approx(dressing_functional(s, kernels(G1, P, V, 1.3).g), abs=1e-12)


def test_reduction_rejects_unknown_kind():
    with pytest.raises(ParameterError):
        reduce_energy("kinetic", HARM, TRAP, P)


def test_gauge_invariance_and_noether():
    for kind in ("yukawa", "dressed", "dressing_gen"):
        sym = reduce_energy(kind, HARM, TRAP, P)
        assert sym.is_gauge_invariant(HARM.n_nuc)
        assert len(poisson_bracket(number_symbol(HARM.n_modes, range(HARM.n_nuc)), sym).drop_below(1e-14)) == 0
        z = _rz(HARM.n_modes, 13)
        zdot = sym.vector_field(z)
        assert abs(np.real(np.vdot(z[: HARM.n_nuc], zdot[: HARM.n_nuc]))) <= 1e-12
        # nucleon phase rotation leaves the value unchanged
        r = z.copy()
        r[: HARM.n_nuc] *= np.exp(0.9j)
        assert sym(r) == pytest.approx(sym(z), abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_derivatives_commute(seed):
    a = _random_symbol(3, 3, 8, seed)
    for j, k in itertools.product(range(3), repeat=2):
        assert a.d_zbar(j).d_z(k).terms == a.d_z(k).d_zbar(j).terms
