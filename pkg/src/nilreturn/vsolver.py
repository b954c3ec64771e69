"""Order-by-order solution of the v-equation in the first quadrant.

Writing the first-quadrant orbit through ``(eta, 0)`` as

    y(x)**2 = (eta - x) eta**(2k-1) [P(xi; delta) + v(xi; delta)],
    xi = sqrt(1 - x/eta),  delta = eps * eta,

the correction ``v`` is the fixed point of

    J[v](xi) = 2 delta**p xi int_0^1 s^2 (1 - xi^2 s^2)**(p+k-1)
               sqrt(P + v)(xi s) B(delta (1 - xi^2 s^2)) ds.

Its delta-coefficients ``v_n`` vanish for ``n < p`` and follow from the
delta-series ``sqrt(P + v) * B(delta (1 - xi^2)) = sum R_n delta^n`` through
``v_n = weighted_cumulative(R_{n-p})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeBracket, OrderTooLow, OutOfRadius
from .profile import _gauss01, p_direct, p_series, weighted_cumulative
from .series import CoeffSeries, apply_function_series, series_mul, series_sqrt
from .sysnorm import NormalizedSystem
from .xifunc import DEFAULT_TOL, XiFunction


@dataclass(frozen=True)
class VSolution:
    sys: NormalizedSystem
    order: int
    v: CoeffSeries
    P: CoeffSeries

    def _scalar(self, series, xi):
        return CoeffSeries([float(c(xi)) if isinstance(c, XiFunction) else float(c) for c in series])

    def v_at(self, xi: float) -> CoeffSeries:
        """Scalar delta-series ``v(xi; delta)`` at a fixed xi."""
        return self._scalar(self.v, xi)

    def P_at(self, xi: float) -> CoeffSeries:
        return self._scalar(self.P, xi)

    def evaluate(self, xi, delta: float):
        """Truncated ``v(xi; delta)`` on an array of xi."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        for n in range(self.order, -1, -1):
            c = self.v[n]
            term = c(xi) if isinstance(c, XiFunction) else c
            out = out * delta + term
        return out

    def evaluate_P(self, xi, delta: float):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        for n in range(self.order, -1, -1):
            c = self.P[n]
            term = c(xi) if isinstance(c, XiFunction) else c
            out = out * delta + term
        return out


def solve_v(ns: NormalizedSystem, order: int, tol: float = DEFAULT_TOL) -> VSolution:
    """Compute ``v_0 .. v_order`` as XiFunctions."""
    p, k = ns.p, ns.k
    if order < p:
        raise OrderTooLow(f"order {order} is below p = {p}")
    P = p_series(ns, order)
    if ns.is_hamiltonian:
        return VSolution(ns, order, CoeffSeries.zero(order), P)
    w = XiFunction.from_callable(lambda x: 1.0 - x * x)
    Bw = apply_function_series(ns.Bser.truncate(order - p), w)
    v = [0.0] * (order + 1)
    for n in range(p, order + 1):
        m = n - p
        a = CoeffSeries([P[i] + v[i] for i in range(m + 1)])
        R = series_mul(series_sqrt(a), Bw.truncate(m))[m]
        v[n] = weighted_cumulative(R, p, k, tol)
    return VSolution(ns, order, CoeffSeries(v), P)


@dataclass(frozen=True)
class ContractionBounds:
    """Numeric stand-ins for the contraction-argument constants."""

    radius_r: float
    c0: float
    M: float
    mu: float
    delta0: float
    contraction: float


def contraction_bounds(ns: NormalizedSystem, safety: float = 0.99) -> ContractionBounds:
    r = ns.radius_r
    c0 = ns.sup_A_minus_one(r)
    M = ns.sup_B(r)
    k, p = ns.k, ns.p
    gap = 1.0 - 2 * k * c0
    if gap <= 0:
        raise OutOfRadius(f"c0 = {c0:.3g} violates c0 < 1/(2k) at r = {r:.3g}")
    mu = gap / 2.0
    if M == 0.0:
        d0 = r
    else:
        first = mu / ((2.0 / 3.0) * math.sqrt(2 * k * (1 + c0) + mu) * M)
        second = 3.0 * math.sqrt(gap - mu) / M
        d0 = min(r, safety * min(first, second) ** (1.0 / p))
    c = d0**p * M / (3.0 * math.sqrt(gap - mu))
    return ContractionBounds(r, c0, M, mu, d0, c)


def apply_J(vs: VSolution, xi, delta: float, n_nodes: int = 80):
    """Apply the fixed-point operator to the truncated v by direct quadrature.

    ``P`` is integrated from the exact ``A`` and ``B`` is evaluated exactly,
    so no series in delta enters except the truncated v being tested.
    """
    ns = vs.sys
    p, k = ns.p, ns.k
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    s, w = _gauss01(n_nodes)
    t = np.multiply.outer(xi, s)
    P = p_direct(ns, t.reshape(-1), delta).reshape(t.shape)
    v = vs.evaluate(t, delta)
    bracket = P + v
    if np.any(bracket <= 0):
        raise NegativeBracket(f"P + v <= 0 at delta = {delta:g}")
    B = np.real(ns.B_exact(delta * (1.0 - t * t)))
    integrand = s * s * (1.0 - t * t) ** (p + k - 1) * np.sqrt(bracket) * B
    return 2.0 * delta**p * xi * (integrand @ w)


def fixed_point_residual(vs: VSolution, deltas, xi_grid=None) -> float:
    """``sup |v - J[v]|`` over ``deltas`` and a xi grid."""
    if xi_grid is None:
        xi_grid = np.linspace(0.0, 1.0, 41)
    xi_grid = np.asarray(xi_grid, dtype=float)
    worst = 0.0
    for d in deltas:
        if abs(d) > vs.sys.radius_r:
            raise OutOfRadius(f"|delta| = {abs(d):g} exceeds radius {vs.sys.radius_r:.4g}")
        res = np.max(np.abs(vs.evaluate(xi_grid, d) - apply_J(vs, xi_grid, d)))
        worst = max(worst, float(res))
    return worst


def eval_phi_solution(vs: VSolution, x: float, eps: float, eta: float) -> float:
    """First-quadrant orbit ``y(x)`` through ``(eta, 0)``."""
    if not 0.0 <= x <= eta:
        raise ValueError("need 0 <= x <= eta")
    k = vs.sys.k
    delta = eps * eta
    if abs(delta) > vs.sys.radius_r:
        raise OutOfRadius(f"|eps eta| = {abs(delta):g} exceeds radius {vs.sys.radius_r:.4g}")
    xi = math.sqrt(max(1.0 - x / eta, 0.0))
    bracket = float(vs.evaluate_P(xi, delta) + vs.evaluate(xi, delta))
    if bracket <= 0:
        raise NegativeBracket(f"P + v = {bracket:g} at xi = {xi:g}, delta = {delta:g}")
    return math.sqrt(eta - x) * eta ** (k - 0.5) * math.sqrt(bracket)
