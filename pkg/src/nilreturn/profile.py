"""The P-profile, the special functions Phi and Psi, and the v-integral.

``P(xi; delta)`` is the mean of ``2k s**(2k-1) A(delta s)`` over
``s in [1 - xi**2, 1]``.  Expanding ``A = 1 + sum F2_m z**(2p+m)`` gives a
delta-series whose coefficients are polynomials in xi.

``Phi_{p,k}`` and ``Psi_k`` are computed here by adaptive quadrature of their
defining integrals.  The v-recursion computes the same quantities along a
different route (interpolation in xi plus Gauss-Legendre), so the two can be
checked against each other.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import QuadratureFailure
from .series import CoeffSeries
from .sysnorm import NormalizedSystem
from .xifunc import DEFAULT_TOL, XiFunction, lobatto_nodes

QUAD_EPSREL = 1e-13
PSI_OUTER_EPSREL = 1e-11
MAX_GAUSS_NODES = 2048
PSI_GRADING = 0.5


def one_minus_power_over_xi2(e: int, xi):
    """``(1 - (1 - xi**2)**e) / xi**2`` without cancellation at small xi."""
    xi = np.asarray(xi, dtype=float)
    u = 1.0 - xi * xi
    small = np.abs(xi) < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (1.0 - u**e) / (xi * xi)
    # geometric sum: sum_{j<e} u**j
    factored = np.zeros_like(u)
    for _ in range(e):
        factored = factored * u + 1.0
    return np.where(small, factored, direct)


def p0(k: int, xi):
    return one_minus_power_over_xi2(2 * k, xi)


def p_series(ns: NormalizedSystem, order: int) -> CoeffSeries:
    """delta-series of ``P(xi; delta)`` with XiFunction coefficients."""
    p, k = ns.p, ns.k
    F2 = ns.F * ns.F
    coeffs = [0.0] * (order + 1)
    coeffs[0] = XiFunction.from_callable(lambda x: p0(k, x))
    for m in range(order + 1 - 2 * p):
        if m > F2.order:
            raise ValueError(f"working order {ns.order} too low for P up to delta^{order}")
        if F2[m] == 0:
            continue
        e = 2 * k + 2 * p + m
        scale = F2[m] * 2 * k / e
        coeffs[2 * p + m] = XiFunction.from_callable(
            lambda x, e=e: one_minus_power_over_xi2(e, x)
        ) * scale
    return CoeffSeries(coeffs)


def p_direct(ns: NormalizedSystem, xi, delta: float, n_nodes: int = 64):
    """``P(xi; delta)`` by Gauss-Legendre quadrature with the exact A."""
    s, w = _gauss01(n_nodes)
    xi = np.asarray(xi, dtype=float)
    sig = 1.0 - np.multiply.outer(xi * xi, s)
    k = ns.k
    vals = 2 * k * sig ** (2 * k - 1) * np.real(ns.A_exact(delta * sig))
    return vals @ w


@lru_cache(maxsize=None)
def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    s, ws = (x + 1.0) / 2.0, w / 2.0
    s.flags.writeable = False
    ws.flags.writeable = False
    return s, ws


def _quad(fn, a, b, epsrel=QUAD_EPSREL, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, a, b, epsabs=0.0, epsrel=epsrel, limit=200, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc).splitlines()[0]) from None
    return val


def _geom(k: int, s):
    """``(1 - s**(2k)) / (1 - s) = sum_{j<2k} s**j``."""
    acc = 0.0
    for _ in range(2 * k):
        acc = acc * s + 1.0
    return acc


def phi(p: int, k: int, xi: float) -> float:
    """Phi_{p,k}(xi) by adaptive quadrature with the sqrt endpoint weight.

    With ``s = 1 - xi**2 u`` the ``xi**-2`` prefactor cancels exactly and
    ``1 - s**(2k) = xi**2 u * geom(s)``, so no small differences are formed.
    """
    xi = float(xi)
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    if xi == 0.0:
        return 0.0
    xi2 = xi * xi
    q = p + k - 1

    def fn(u):
        s = 1.0 - xi2 * u
        return s**q * math.sqrt(_geom(k, s))

    return xi * _quad(fn, 0.0, 1.0, weight="alg", wvar=(0.5, 0.0))


def phi_closed(p: int, k: int) -> float:
    """``Phi_{p,k}(1) = Beta((p+k)/(2k), 3/2) / (2k)`` via log-gamma."""
    return math.exp(special.betaln((p + k) / (2 * k), 1.5)) / (2 * k)


def phi_incomplete_beta(p: int, k: int, xi):
    """Phi_{p,k}(xi) through the regularised incomplete beta function."""
    xi = np.asarray(xi, dtype=float)
    a = (p + k) / (2 * k)
    one_minus_x = xi * xi * p0(k, xi)  # 1 - (1 - xi^2)^(2k)
    full = np.exp(special.betaln(a, 1.5))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = full * special.betainc(1.5, a, one_minus_x) / (2 * k * xi * xi)
    return np.where(xi == 0.0, 0.0, out)


def _psi_inner_scaled(k: int, h: float) -> float:
    """``h**-1.5 int_{1-h}^1 t^k (1 - t^(2k))^(1/2) dt`` via ``t = 1 - h v``."""

    def fn(v):
        t = 1.0 - h * v
        return t**k * math.sqrt(_geom(k, t))

    return _quad(fn, 0.0, 1.0, weight="alg", wvar=(0.5, 0.0))


def psi(k: int, xi: float, grading: float = PSI_GRADING, min_width: float = 1e-14) -> float:
    """Psi_k(xi) by nested adaptive quadrature.

    In ``s = 1 - xi**2 u`` the inner integral is ``(xi**2 u)**1.5`` times a
    smooth factor, which cancels the outer ``(1-s)**-0.5`` and the ``xi**-2``
    prefactor.  The outer range is split into panels graded geometrically
    toward ``u = 0`` (that is ``s = 1``) with ratio ``grading``.
    """
    xi = float(xi)
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    if not 0.0 < grading < 1.0:
        raise ValueError("grading must lie in (0, 1)")
    if xi == 0.0:
        return 0.0
    xi2 = xi * xi

    def outer(u):
        h = xi2 * u
        s = 1.0 - h
        return s**k / math.sqrt(_geom(k, s)) * u * _psi_inner_scaled(k, h)

    breaks = [1.0]
    while breaks[-1] * grading > min_width and len(breaks) < 60:
        breaks.append(breaks[-1] * grading)
    breaks.append(0.0)
    total = 0.0
    for b, a in zip(breaks[:-1], breaks[1:]):
        total += _quad(outer, a, b, epsrel=PSI_OUTER_EPSREL)
    return xi2 * total


def weighted_cumulative(R, p: int, k: int, tol: float = DEFAULT_TOL) -> XiFunction:
    """``xi -> 2 xi**-2 int_0^xi t^2 (1-t^2)**(p+k-1) R(t) dt``.

    Evaluated as ``2 xi int_0^1 s^2 (1 - xi^2 s^2)**(p+k-1) R(xi s) ds`` so the
    value at ``xi = 0`` is exactly zero.  For polynomial ``R`` the integrand is
    a polynomial in ``s`` and the Gauss-Legendre rule below is exact, as is the
    interpolation of the (polynomial) result.
    """
    if not isinstance(R, XiFunction):
        R = XiFunction.constant(float(R))
    if R.is_zero:
        return XiFunction.constant(0.0)
    q = p + k - 1
    deg = R.degree + 2 * q + 2
    n_nodes = deg // 2 + 2
    if n_nodes > MAX_GAUSS_NODES:
        raise QuadratureFailure(f"integrand degree {deg} exceeds the quadrature cap")
    s, w = _gauss01(n_nodes)
    out_deg = deg + 1
    xi = lobatto_nodes(out_deg)
    t = np.multiply.outer(xi, s)
    integrand = s * s * (1.0 - t * t) ** q * R(t)
    vals = 2.0 * xi * (integrand @ w)
    return XiFunction.from_values(vals, tol)
