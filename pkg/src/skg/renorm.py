"""Cutoff, dressing kernel, self-energy and counterterm potentials.

Every kernel is radial in ``k``. Functions that take ``kabs`` accept any
array of ``|k|`` values; ``dim`` selects the ``(2 pi)^(-d/2)`` normalisation.
Integrals over ``R^d`` reduce to one-dimensional radial quadratures.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NumericError, ParameterError

__all__ = [
    "INF",
    "Sigma",
    "RenormParams",
    "chi",
    "chi_sigma",
    "g_sigma",
    "r_sigma",
    "self_energy",
    "self_energy_asymptotic_slope",
    "r_sigma_norms",
    "r_sigma_norm_combination",
    "radial_ft",
    "v_sigma",
    "v2_bound_constant",
    "pair_kernel",
]


class Sigma(enum.Enum):
    """Sentinel for the removed ultraviolet cutoff."""

    INF = "inf"

    def __repr__(self):
        return "INF"


INF = Sigma.INF


def _as_sigma(sigma):
    if sigma is INF or sigma == "inf" or (isinstance(sigma, float) and math.isinf(sigma)):
        return INF
    sigma = float(sigma)
    if not sigma > 0:
        raise ParameterError(f"cutoff must be positive, got {sigma}")
    return sigma


@dataclass(frozen=True)
class RenormParams:
    """Masses and cutoffs. ``sigma`` is a positive float or :data:`INF`."""

    M: float = 1.0
    m0: float = 1.0
    sigma0: float = 1.0
    sigma: float | Sigma = INF
    profile: str = "mollifier"

    def __post_init__(self):
        if not (self.M > 0 and self.m0 > 0):
            raise ParameterError("masses M and m0 must be positive")
        if not self.sigma0 >= 0:
            raise ParameterError("sigma0 must be non-negative")
        object.__setattr__(self, "sigma", _as_sigma(self.sigma))
        if self.sigma is not INF and self.sigma < self.sigma0:
            raise ParameterError("sigma must exceed sigma0")
        if self.profile != "mollifier":
            raise ParameterError(f"unknown cutoff profile {self.profile!r}")

    def with_sigma(self, sigma) -> "RenormParams":
        return RenormParams(self.M, self.m0, self.sigma0, sigma, self.profile)

    @property
    def finite(self) -> bool:
        return self.sigma is not INF


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def chi(r):
    """Smooth radial cutoff: 1 on ``[0, 1]``, 0 on ``[2, inf)``, monotone in between."""
    r = np.asarray(r, dtype=float)
    a = _bump(2.0 - r)
    b = _bump(r - 1.0)
    return a / (a + b)


def chi_sigma(kabs, sigma):
    """``chi(|k| / sigma)``; identically 1 for ``sigma = INF`` and 0 for ``sigma = 0``."""
    kabs = np.asarray(kabs, dtype=float)
    if sigma is INF or (isinstance(sigma, float) and math.isinf(sigma)):
        return np.ones_like(kabs)
    sigma = float(sigma)
    if sigma < 0:
        raise ParameterError(f"cutoff must be non-negative, got {sigma}")
    if sigma == 0.0:
        return np.zeros_like(kabs)
    return chi(kabs / sigma)


def _omega(kabs, m0):
    return np.sqrt(np.asarray(kabs, dtype=float) ** 2 + m0 * m0)


def _denominator(kabs, p: RenormParams):
    k = np.asarray(kabs, dtype=float)
    return k * k / (2.0 * p.M) + _omega(k, p.m0)


def g_sigma(kabs, p: RenormParams, dim: int = 3):
    """Dressing kernel ``-i (2pi)^(-d/2) (2w)^(-1/2) (chi_s - chi_s0) / (k^2/2M + w)``."""
    kabs = np.asarray(kabs, dtype=float)
    w = _omega(kabs, p.m0)
    diff = chi_sigma(kabs, p.sigma) - chi_sigma(kabs, p.sigma0)
    real = (2.0 * np.pi) ** (-dim / 2) / np.sqrt(2.0 * w) * diff / _denominator(kabs, p)
    return -1j * real


def r_sigma(k, p: RenormParams):
    """Vector kernel ``-i k g(k)``; ``k`` has shape ``(dim, ...)``. Real valued."""
    k = np.asarray(k, dtype=float)
    dim = k.shape[0]
    g = g_sigma(np.sqrt(np.sum(k**2, axis=0)), p, dim)
    return -1j * k * g


def _sphere_area(dim):
    return {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}[dim]


def _radial_quad(func, edges, epsrel=1e-12, what="integral"):
    """Integrate ``func`` over consecutive ``edges`` splitting long intervals geometrically."""
    total = 0.0
    err_total = 0.0
    pts = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        if a > 0 and b / a > 4.0:
            m = int(math.ceil(math.log(b / a) / math.log(4.0)))
            sub = list(np.geomspace(a, b, m + 1))
        else:
            sub = [a, b]
        pts.extend(zip(sub[:-1], sub[1:]))
    for a, b in pts:
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(func, a, b, epsabs=0.0, epsrel=epsrel, limit=200)
            except integrate.IntegrationWarning as exc:
                raise NumericError(f"{what}: quadrature did not converge on [{a}, {b}]",
                                   interval=(a, b), reason=str(exc)) from exc
        total += val
        err_total += err
    return total, err_total


def _breakpoints(p: RenormParams, upper=None):
    pts = [0.0]
    if p.sigma0 > 0:
        pts += [p.sigma0, 2.0 * p.sigma0]
    if p.finite:
        pts += [p.sigma, 2.0 * p.sigma]
    elif upper is not None:
        pts.append(upper)
    return sorted(set(pts))


def self_energy(p: RenormParams, dim: int = 3) -> float:
    """Self-energy counterterm ``E_sigma`` for a finite cutoff.

    ``E = (2pi)^-d int [ (chi_s - chi_s0)^2 / 2 - chi_s (chi_s - chi_s0) ] / (w (k^2/2M + w)) dk``
    evaluated as a radial integral.
    """
    if not p.finite:
        raise ParameterError("self-energy diverges for sigma = INF")
    area = _sphere_area(dim)

    def integrand(r):
        cs = chi_sigma(r, p.sigma)
        c0 = chi_sigma(r, p.sigma0)
        num = 0.5 * (cs - c0) ** 2 - cs * (cs - c0)
        return float(area * r ** (dim - 1) * num / (_omega(r, p.m0) * _denominator(r, p)))

    val, _ = _radial_quad(integrand, _breakpoints(p), epsrel=1e-12, what="self-energy")
    return val / (2.0 * np.pi) ** dim


def self_energy_asymptotic_slope(M: float) -> float:
    """Coefficient of ``ln sigma`` in ``E_sigma`` for ``d = 3``.

    For ``|k|`` between ``2 sigma0`` and ``sigma`` the radial integrand is
    ``-4 pi k^2 / (2 (2pi)^3 w (k^2/2M + w)) -> -M / (2 pi^2 k)``.
    """
    return -M / (2.0 * np.pi**2)


def r_sigma_norms(p: RenormParams, dim: int = 3):
    """``(||w^{-1/2} r||_2, ||w^{-1/4} r||_2)`` by radial quadrature."""
    area = _sphere_area(dim)

    def weight(power):
        def f(r):
            g = abs(complex(g_sigma(r, p, dim)))
            return float(area * r ** (dim - 1) * r * r * g * g * _omega(r, p.m0) ** (-power))
        return f

    upper = None if p.finite else np.inf
    edges = _breakpoints(p)
    out = []
    for power in (1.0, 0.5):
        val, _ = _radial_quad(weight(power), edges, what="r_sigma norm")
        if not p.finite:
            tail, _ = integrate.quad(weight(power), edges[-1], upper, epsabs=0.0,
                                     epsrel=1e-11, limit=400)
            val += tail
        out.append(math.sqrt(val))
    return tuple(out)


def r_sigma_norm_combination(p: RenormParams, dim: int = 3) -> float:
    """``||w^{-1/2} r||^2 + ||w^{-1/4} r||^2 + ||w^{-1/2} r||``."""
    a, b = r_sigma_norms(p, dim)
    return a * a + b * b + a


def radial_ft(f, x: float, *, lower_tail: float | None = None, epsrel: float = 1e-10,
              cap: float = 1e6, check: bool = True) -> tuple[float, bool]:
    """Three-dimensional transform ``int f(|k|) e^{-ik.x} dk`` of a radial function.

    Uses ``(4pi/|x|) int_0^inf f(r) r sin(r|x|) dr``. ``f`` is a scalar callable.
    Returns ``(value, singular)``; ``singular`` is True only at ``x = 0`` when
    ``int f r^2`` diverges and has been truncated at ``cap``.
    """
    x = abs(float(x))
    split = 1.0 if lower_tail is None else float(lower_tail)

    def fr(r):
        return float(f(r) * r)

    if check:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            l1_head, _ = integrate.quad(lambda r: abs(fr(r)), 0.0, split, limit=400)
            l1_tail, _ = integrate.quad(lambda r: abs(fr(r)), split, np.inf, limit=400)
            far, _ = integrate.quad(lambda r: abs(fr(r)), cap, 10 * cap, limit=400)
        l1 = l1_head + l1_tail
        if not np.isfinite(l1) or far > 1e-3 * max(l1, 1e-300):
            raise NumericError("f(r) r is not absolutely integrable", l1=l1, tail=far)

    if x == 0.0:
        head, _ = integrate.quad(lambda r: fr(r) * r, 0.0, split, limit=400)
        far, _ = integrate.quad(lambda r: fr(r) * r, cap, 10 * cap, limit=400)
        singular = abs(far) > 1e-8 * max(1.0, abs(head))
        if singular:
            body, _ = _radial_quad(lambda r: fr(r) * r, [split, cap], epsrel=1e-10,
                                   what="radial transform at x=0")
        else:
            body, _ = integrate.quad(lambda r: fr(r) * r, split, np.inf, limit=400)
        return 4.0 * np.pi * (head + body), bool(singular)

    # finite part out to ~50 oscillations, then a Fourier-integral tail
    far_edge = max(split, 50.0 / x)
    edges = [0.0, split]
    if far_edge > split:
        m = max(1, int(math.ceil(math.log(far_edge / split) / math.log(2.0))))
        edges += list(np.geomspace(split, far_edge, m + 1)[1:])
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            head = 0.0
            for a, b in zip(edges[:-1], edges[1:]):
                val, _ = integrate.quad(fr, a, b, weight="sin", wvar=x, epsrel=epsrel,
                                        epsabs=0.0, limit=400)
                head += val
            scale = max(abs(head), abs(fr(far_edge)) * far_edge, 1e-300)
            tail, _ = integrate.quad(fr, far_edge, np.inf, weight="sin", wvar=x, limlst=200,
                                     epsabs=epsrel * scale, limit=400)
        except integrate.IntegrationWarning as exc:
            raise NumericError("oscillatory radial quadrature failed", x=x,
                               reason=str(exc)) from exc
    return 4.0 * np.pi / x * (head + tail), False


def _finite_support(p: RenormParams):
    return 2.0 * p.sigma if p.finite else None


def _chi_scalar(r: float, sigma) -> float:
    if sigma is INF:
        return 1.0
    if sigma == 0.0:
        return 0.0
    t = r / sigma
    if t <= 1.0:
        return 1.0
    if t >= 2.0:
        return 0.0
    a = math.exp(-1.0 / (2.0 - t))
    b = math.exp(-1.0 / (t - 1.0))
    return a / (a + b)


def _v1_profile(p: RenormParams):
    """Radial ``w |g|^2`` in ``d = 3``."""
    pref = (2.0 * math.pi) ** -3

    def f(r):
        w = math.sqrt(r * r + p.m0 * p.m0)
        diff = _chi_scalar(r, p.sigma) - _chi_scalar(r, p.sigma0)
        den = r * r / (2.0 * p.M) + w
        return pref * 0.5 * diff * diff / (den * den)
    return f


def _v2_profile(p: RenormParams):
    """Radial ``f = chi_s (chi_s - chi_s0) / (w (k^2/2M + w))``."""
    def f(r):
        w = math.sqrt(r * r + p.m0 * p.m0)
        cs = _chi_scalar(r, p.sigma)
        c0 = _chi_scalar(r, p.sigma0)
        return cs * (cs - c0) / (w * (r * r / (2.0 * p.M) + w))
    return f


def _radial_ft_supported(f, x, p: RenormParams):
    """radial_ft restricted to the support of ``chi_s - chi_s0``."""
    lo = p.sigma0
    hi = _finite_support(p)
    x = abs(float(x))
    if hi is not None:
        if x == 0.0:
            val, _ = integrate.quad(lambda r: f(r) * r * r, lo, hi, limit=400,
                                    points=[2 * p.sigma0, p.sigma])
            return 4.0 * np.pi * val, False
        val, _ = integrate.quad(lambda r: f(r) * r, lo, hi, weight="sin", wvar=x,
                                epsabs=0.0, epsrel=1e-12, limit=400)
        return 4.0 * np.pi / x * val, False
    return radial_ft(f, x, lower_tail=max(2.0 * p.sigma0, 1e-3), check=False)


def v_sigma(x, p: RenormParams, return_parts: bool = False, part: str = "both"):
    """Effective pair potential ``V_sigma(x) = V1 + V2`` in ``d = 3``.

    ``V1 = 2 Re int w |g|^2 e^{-ikx} dk`` and
    ``V2 = -2 (2pi)^-3 int f(k) e^{-ikx} dk`` with ``f`` the profile of
    :func:`v2_bound_constant`. ``x`` is a radius or a 3-vector. ``part`` limits
    the evaluation to ``"v1"`` or ``"v2"``; the other part is then reported as 0.
    With ``return_parts`` the result is ``(V1, V2, singular)``; ``singular`` flags
    a capped value of ``V2(0)`` at ``sigma = INF``.
    """
    if part not in ("both", "v1", "v2"):
        raise ParameterError(f"unknown part {part!r}")
    xr = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    v1 = f2 = 0.0
    singular = False
    if p.sigma is INF or p.sigma > p.sigma0:
        if part in ("both", "v1"):
            v1, _ = _radial_ft_supported(_v1_profile(p), xr, p)
        if part in ("both", "v2"):
            f2, singular = _radial_ft_supported(_v2_profile(p), xr, p)
    parts = (2.0 * v1, -2.0 * (2.0 * np.pi) ** -3 * f2, singular)
    if return_parts:
        return parts
    return parts[0] + parts[1]


def v2_bound_constant(p: RenormParams) -> float:
    """``c_tilde = 4 pi c ||f(r) r||_{L^1}`` with ``c = 2 (2pi)^-3``.

    ``c`` is the exact proportionality ``|V2| = c |F(f)|`` for the kernels here.
    """
    f = _v2_profile(p)
    lo = p.sigma0
    hi = _finite_support(p)
    if hi is not None:
        l1, _ = integrate.quad(lambda r: abs(f(r)) * r, lo, hi, limit=400)
    else:
        a, _ = integrate.quad(lambda r: abs(f(r)) * r, lo, 2 * max(lo, 1e-3), limit=400)
        b, _ = integrate.quad(lambda r: abs(f(r)) * r, 2 * max(lo, 1e-3), np.inf, limit=400)
        l1 = a + b
    return 4.0 * np.pi * 2.0 * (2.0 * np.pi) ** -3 * l1


def pair_kernel(kabs, p: RenormParams, dim: int):
    """Fourier weight ``w(k)`` with ``1/2 int V(x-y) rho(x) rho(y) = int w |F rho|^2 dk``.

    ``w = w_disp |g|^2 - 2 Im(conj(g)) (2pi)^(-d/2) chi_s (2 w_disp)^(-1/2)``.
    """
    kabs = np.asarray(kabs, dtype=float)
    w = _omega(kabs, p.m0)
    g = g_sigma(kabs, p, dim)
    cs = chi_sigma(kabs, p.sigma)
    return w * np.abs(g) ** 2 - 2.0 * np.imag(np.conj(g)) * (2.0 * np.pi) ** (-dim / 2) * cs / np.sqrt(2.0 * w)
