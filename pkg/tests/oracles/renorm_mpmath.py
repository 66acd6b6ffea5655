"""Regenerate the frozen renormalization constants in test_renorm.py.

Standalone: uses mpmath only, never the package. Run with ``python3 renorm_mpmath.py``.
"""

import mpmath as mp

mp.mp.dps = 30


def bump(s):
    return mp.e ** (-1 / s) if s > 0 else mp.mpf(0)


def chi(r, sigma):
    if sigma is None:
        return mp.mpf(1)
    t = r / sigma
    if t <= 1:
        return mp.mpf(1)
    if t >= 2:
        return mp.mpf(0)
    return bump(2 - t) / (bump(2 - t) + bump(t - 1))


def w(r):
    return mp.sqrt(r * r + 1)


def den(r):
    return r * r / 2 + w(r)


def self_energy(sigma):
    def f(r):
        cs, c0 = chi(r, sigma), chi(r, 1)
        return 4 * mp.pi * r**2 * (0.5 * (cs - c0) ** 2 - cs * (cs - c0)) / (w(r) * den(r))
    return mp.quad(f, [1, 2, sigma, 2 * sigma]) / (2 * mp.pi) ** 3


def g_abs_sq(r, sigma):
    return (2 * mp.pi) ** -3 / (2 * w(r)) * ((chi(r, sigma) - chi(r, 1)) / den(r)) ** 2


def r_norm(sigma, power):
    pts = [1, 2, mp.inf] if sigma is None else [1, 2, sigma, 2 * sigma]
    return mp.sqrt(mp.quad(lambda r: 4 * mp.pi * r**4 * g_abs_sq(r, sigma) * w(r) ** (-power), pts))


def v_parts(x, sigma):
    f2 = lambda r: chi(r, sigma) * (chi(r, sigma) - chi(r, 1)) / (w(r) * den(r))  # noqa: E731
    f1 = lambda r: (2 * mp.pi) ** -3 * 0.5 * (chi(r, sigma) - chi(r, 1)) ** 2 / den(r) ** 2  # noqa: E731
    pts = mp.linspace(1, 2 * sigma, 60)
    i1 = 4 * mp.pi / x * mp.quad(lambda r: f1(r) * r * mp.sin(r * x), pts)
    i2 = 4 * mp.pi / x * mp.quad(lambda r: f2(r) * r * mp.sin(r * x), pts)
    return 2 * i1, -2 * (2 * mp.pi) ** -3 * i2


if __name__ == "__main__":
    k = mp.mpf(2)
    print("G_AT_2", -(2 * mp.pi) ** -1.5 / mp.sqrt(2 * w(k)) / den(k))
    print("chi(1.2)", chi(mp.mpf("1.2"), 1))
    print("E_10", self_energy(10))
    print("E_100", self_energy(100))
    print("C_TILDE_INF", 8 * mp.pi * (2 * mp.pi) ** -3 *
          mp.quad(lambda r: (1 - chi(r, 1)) * r / (w(r) * den(r)), [1, 2, mp.inf]))
    print("NORMS_INF", r_norm(None, 1), r_norm(None, 0.5))
    print("NORMS_2", r_norm(2, 1), r_norm(2, 0.5))
    print("V_PARTS_10_AT_1_3", *v_parts(mp.mpf("1.3"), 10))
