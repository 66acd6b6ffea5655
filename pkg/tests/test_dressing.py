import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from skg.dressing import (
    DressingMap,
    dress,
    dress_derivative,
    growth_bound_check,
    parity,
    sobolev_norm,
    symplectic_form,
)
from skg.errors import ParameterError
from skg.fields import ClassicalState, a_g_field, dressing_functional, kernels, random_state
from skg.renorm import RenormParams
from skg.spectral import Grid, plain_ft_density

G1 = Grid(1, 256, 10.0)
G_INF = kernels(G1, RenormParams()).g


def _state(seed, grid=G1, scale=0.5):
    return random_state(grid, np.random.default_rng(seed), alpha_scale=scale)


def _general_kernel(grid, seed):
    rng = np.random.default_rng(seed)
    return 0.3 * (rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)) * np.exp(-grid.k2 / 8)


def test_parity_classification():
    assert parity(G_INF, G1) == "even"
    assert parity(G1.k[0] * G_INF, G1) == "odd"
    assert parity(_general_kernel(G1, 0), G1) == "none"


def test_identity_at_zero_time_and_zero_kernel():
    s = _state(1)
    for z in (dress(s, G_INF, 0.0), dress(s, np.zeros(G1.shape), 1.7)):
        assert np.array_equal(z.u, s.u) and np.array_equal(z.alpha, s.alpha)
    v, b = _state(2).u, _state(2).alpha
    dv, db = dress_derivative(s, G_INF, 0.0, (v, b))
    assert np.array_equal(dv, v) and np.array_equal(db, b)


def test_meson_shift_is_exact():
    s = _state(3)
    th = 0.8
    z = dress(s, G_INF, th)
    assert np.array_equal(z.alpha, s.alpha - 1j * th * G_INF * plain_ft_density(s.u, G1))
    assert np.max(np.abs(np.abs(z.u) - np.abs(s.u))) <= 1e-15


@pytest.mark.parametrize("kernel", ["even", "general"])
def test_inverse_and_group(kernel):
    g = G_INF if kernel == "even" else _general_kernel(G1, 4)
    for seed in range(10):
        s = _state(seed)
        assert (dress(dress(s, g, 1.0), g, -1.0) - s).norm() <= 1e-12
        assert (dress(dress(s, g, 0.4), g, 0.9) - dress(s, g, 1.3)).norm() <= 1e-12


def test_dressing_map_object():
    s = _state(5)
    D = DressingMap(G_INF, G1, 0.7)
    assert D.parity == "even"
    assert (D.inverse()(D(s)) - s).norm() <= 1e-13
    dv, db = D.derivative(s, (s.u, s.alpha))
    ev, eb = dress_derivative(s, G_INF, 0.7, (s.u, s.alpha))
    assert np.array_equal(dv, ev) and np.array_equal(db, eb)


def test_general_kernel_against_ode_integration():
    # independent route: integrate i du/dt = A_g u, i dalpha/dt = g F(|u|^2)
    g8 = Grid(1, 32, 4.0)
    g = _general_kernel(g8, 6)
    s = random_state(g8, np.random.default_rng(7), alpha_scale=0.5)
    n = g8.n

    def rhs(_, y):
        u, a = y[:n], y[n:]
        du = -1j * a_g_field(a, g, g8) * u
        da = -1j * g * plain_ft_density(u, g8)
        return np.concatenate([du, da])

    sol = solve_ivp(rhs, (0.0, 1.2), np.concatenate([s.u, s.alpha]), method="DOP853",
                    rtol=1e-13, atol=1e-14)
    ode = ClassicalState(sol.y[:n, -1], sol.y[n:, -1], g8)
    assert (dress(s, g, 1.2) - ode).norm() <= 1e-9


def test_generator_is_conserved():
    for g in (G_INF, _general_kernel(G1, 8)):
        s = _state(9)
        assert dressing_functional(dress(s, g, 1.0), g) == pytest.approx(dressing_functional(s, g), abs=1e-12)


@pytest.mark.parametrize("kernel", ["even", "general"])
def test_derivative_second_order(kernel):
    g = G_INF if kernel == "even" else _general_kernel(G1, 10)
    s, t = _state(11), _state(12)
    dv, db = dress_derivative(s, g, 1.3, (t.u, t.alpha))
    errs = []
    for h in (1e-3, 1e-4):
        fd = (dress(s + t.scale(h), g, 1.3) - dress(s - t.scale(h), g, 1.3)).scale(0.5 / h)
        errs.append(np.hypot(G1.norm_x(fd.u - dv), G1.norm_k(fd.alpha - db)))
    assert errs[1] < errs[0] / 50  # O(h^2): a factor 100 up to roundoff


@pytest.mark.parametrize("kernel", ["even", "general"])
def test_symplectic(kernel):
    g = G_INF if kernel == "even" else _general_kernel(G1, 13)
    rng = np.random.default_rng(14)
    for _ in range(10):
        s, a, b = (random_state(G1, rng, alpha_scale=0.5) for _ in range(3))
        th = rng.uniform(-2, 2)
        lhs = symplectic_form(G1, dress_derivative(s, g, th, (a.u, a.alpha)),
                              dress_derivative(s, g, th, (b.u, b.alpha)))
        assert lhs == pytest.approx(symplectic_form(G1, (a.u, a.alpha), (b.u, b.alpha)), abs=1e-10)


def test_sobolev_norm_reduces_to_l2():
    s = _state(15)
    assert sobolev_norm(s, 0.0, 0.0) == pytest.approx(s.norm(), rel=1e-13)
    assert sobolev_norm(s, 1.0, 0.5) > s.norm()


def test_growth_bound():
    s = _state(16)
    rep = growth_bound_check(s, G_INF, 0.0)
    assert rep.lam == 1 and rep.C == pytest.approx(1.0)
    rep = growth_bound_check(s, np.zeros(G1.shape), 1.0)
    assert rep.lam == 1 and rep.C == pytest.approx(1.0)
    rep = growth_bound_check(s, G_INF, 1.0)
    assert np.isfinite(rep.C) and rep.lam >= 1 and rep.stable
    with pytest.raises(ParameterError):
        growth_bound_check(s, G_INF, 1.0, s=0.5, varsigma=1.5)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t1=st.floats(-2, 2), t2=st.floats(-2, 2))
def test_flow_properties(seed, t1, t2):
    s = _state(seed)
    z = dress(s, G_INF, t1)
    assert np.max(np.abs(np.abs(z.u) - np.abs(s.u))) <= 1e-13
    assert (dress(z, G_INF, t2) - dress(s, G_INF, t1 + t2)).norm() <= 1e-12
    assert z.mass == pytest.approx(s.mass, rel=1e-13)
