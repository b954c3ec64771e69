"""Matching the quadrant solutions and composing the return map.

The orbit through ``(eta, 0)`` is assembled from four quadrant pieces.  Two
pieces meet on the y-axis when

    eta_t**(2k) V_to(eps eta_t) = eta**(2k) V_from(eps eta),
    V(delta) = P(1; delta) + v(1; delta),

which is solved for ``eta_t(eps)`` order by order.  The upper crossing pairs
the F-system with its J2 reflection, the lower one the J3 and J4 systems.
Starting from ``eta = 1`` the return point is ``Z(eps) = eps * eta_tt(eps)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DegenerateJacobian, OrderTooLow
from .profile import phi_closed
from .series import CoeffSeries, series_substitute
from .sysnorm import NormalizedSystem, SystemSpec, normalize, quadrant_transform
from .vsolver import VSolution, contraction_bounds, solve_v
from .xifunc import DEFAULT_TOL

ETA0 = 0.5
JACOBIAN_FLOOR = 1e-12
CLASSIFY_TOL = 1e-7


def side_value_series(ns: NormalizedSystem, vs: VSolution, eta: CoeffSeries, eta0: float = ETA0) -> CoeffSeries:
    """eps-series of ``eta**(2k) [P(1; eps eta) + v(1; eps eta)]``."""
    if not 1.0 - eta0 < eta[0] < 1.0 + eta0:
        raise ValueError(f"eta(0) = {eta[0]!r} outside (1 - {eta0}, 1 + {eta0})")
    V = vs.P_at(1.0) + vs.v_at(1.0)
    h = eta.shift(1)
    return series_substitute(V, h) * eta ** (2 * ns.k)


def matching_step(
    ns_from: NormalizedSystem,
    ns_to: NormalizedSystem,
    vs_from: VSolution,
    vs_to: VSolution,
    eta: CoeffSeries,
) -> CoeffSeries:
    """Solve ``side(ns_to, eta_t) = side(ns_from, eta)`` for the series ``eta_t``.

    The unknown coefficient of order n enters the order-n equation linearly
    with factor ``2k eta(0)**(2k-1) V_to(0)``, so one linear solve per order
    is exact.
    """
    target = side_value_series(ns_from, vs_from, eta)
    n_max = target.order
    k = ns_to.k
    e0 = eta[0]
    V0 = vs_to.P_at(1.0)[0] + vs_to.v_at(1.0)[0]
    jac = 2 * k * e0 ** (2 * k - 1) * V0
    if abs(jac) < JACOBIAN_FLOOR:
        raise DegenerateJacobian(f"matching Jacobian {jac:g} below floor")
    et = [e0] + [0.0] * n_max
    for n in range(1, n_max + 1):
        trial = CoeffSeries(et[: n + 1])
        r = target[n] - side_value_series(ns_to, vs_to, trial)[n]
        et[n] = r / jac
    return CoeffSeries(et)


@dataclass(frozen=True)
class Classification:
    kind: str  # "focus" or "center_candidate"
    order: int | None = None
    sign: int | None = None
    verified_up_to: int | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class ReturnMapResult:
    Z: CoeffSeries
    leading_closed_form: tuple
    systems: dict
    solutions: dict
    eta_upper: CoeffSeries
    eta_lower: CoeffSeries
    diagnostics: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.systems["F"].p

    def truncated(self, order: int) -> CoeffSeries:
        return self.Z.truncate(order)


def quadrant_systems(ns: NormalizedSystem) -> dict:
    return {
        "F": ns,
        "J2": quadrant_transform(ns, "J2"),
        "J3": quadrant_transform(ns, "J3"),
        "J4": quadrant_transform(ns, "J4"),
    }


def return_map(spec: SystemSpec, order: int = 12, tol: float = DEFAULT_TOL) -> ReturnMapResult:
    """Coefficients ``Z_0 .. Z_order`` of the first-return map."""
    spec.validate()
    p = spec.p
    if order < p + 1:
        raise OrderTooLow(f"order {order} must be at least p + 1 = {p + 1}")
    ns = normalize(spec, working_order=order)
    systems = quadrant_systems(ns)
    solutions = {name: solve_v(s, order - 1, tol) for name, s in systems.items()}
    eta = CoeffSeries([1.0] + [0.0] * (order - 1))
    upper = matching_step(systems["F"], systems["J2"], solutions["F"], solutions["J2"], eta)
    lower = matching_step(systems["J3"], systems["J4"], solutions["J3"], solutions["J4"], upper)
    Z = lower.shift(1)
    bounds = contraction_bounds(ns)
    diagnostics = {
        "radius_r": ns.radius_r,
        "c0": bounds.c0,
        "M": bounds.M,
        "mu": bounds.mu,
        "delta0": bounds.delta0,
        "v_order": order - 1,
        "Z_order": order,
    }
    return ReturnMapResult(Z, closed_form_leading(ns), systems, solutions, upper, lower, diagnostics)


def closed_form_leading(ns: NormalizedSystem) -> tuple:
    """``(Z_{p+1}, Z_{p+2})`` from the explicit two-term formulas."""
    p, k, th = ns.p, ns.k, ns.theta_p
    B0, B1 = ns.B0, ns.B1
    first = B0 * phi_closed(p, k) / (2 * k) * (1 + th)
    if p >= 2:
        second = B1 * phi_closed(p + 1, k) / (2 * k) * (1 - th)
    else:
        second = ((1 - th) * B1 * phi_closed(2, k) + (1 + th) / k * B0**2 * phi_closed(1, k) ** 2) / (2 * k)
        second += first**2
    return 2 * first, 2 * second


def classify(res: ReturnMapResult, tol: float = CLASSIFY_TOL) -> Classification:
    """First nonvanishing ``Z_n`` (n >= 2) decides focus; otherwise no decision."""
    Z = res.Z
    for n in range(2, Z.order + 1):
        if abs(Z[n]) > tol:
            return Classification("focus", order=n, sign=int(math.copysign(1, Z[n])))
    return Classification("center_candidate", verified_up_to=Z.order)
