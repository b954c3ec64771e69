"""Independent check of the return map by direct integration.

The rescaled field

    x' = -2 y,    y' = 2k x**(2k-1) A(eps x) + eps**p y x**(p+k-1) B(eps x)

is integrated from ``(1, 0)`` with an embedded Runge-Kutta pair.  In these
coordinates the transversal is the half-axis ``{y = 0, x > 0}``; the first
upward crossing of it with ``x > 0`` is the return, and ``Z = eps * x``.
Only the exact ``F = g / f`` enters; no series from the recursion is used.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import NilReturnError, NoReturnDetected, OutOfRadius, ResidualBelowNoiseFloor, ValidationError
from .sysnorm import NormalizedSystem, SystemSpec, normalize

DEFAULT_TOL = 1e-12
MIN_RTOL = 100 * np.finfo(float).eps
BOX = 2.0
MAX_STEPS = 200_000
T_BOUND = 1e4
EPS_GATE = 0.2
METHODS = {"DOP853": integrate.DOP853, "RK45": integrate.RK45}


@dataclass(frozen=True)
class OrbitCrossing:
    z_return: float
    n_steps: int
    err_estimate: float
    half_turns: int
    t_return: float = float("nan")


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float


def _poly_eval(coeffs):
    rev = tuple(reversed(coeffs))

    def ev(z):
        acc = 0.0
        for c in rev:
            acc = acc * z + c
        return acc

    return ev


def _field(ns: NormalizedSystem, eps: float):
    spec = ns.spec
    fv, gv = _poly_eval(spec.f_coeffs), _poly_eval(spec.g_coeffs)
    df = _poly_eval(tuple(i * c for i, c in enumerate(spec.f_coeffs))[1:] or (0.0,))
    dg = _poly_eval(tuple(i * c for i, c in enumerate(spec.g_coeffs))[1:] or (0.0,))
    p, k = ns.p, ns.k
    epsp = eps**p
    c = 2.0 * (p + 2 * k)

    def rhs(t, u):
        x, y = u
        z = eps * x
        f, g = fv(z), gv(z)
        F = g / f
        dF = (dg(z) * f - g * df(z)) / (f * f)
        A = 1.0 + z ** (2 * p) * F * F
        B = 2.0 * z * dF + c * F
        return np.array([-2.0 * y, 2 * k * x ** (2 * k - 1) * A + epsp * y * x ** (p + k - 1) * B])

    return rhs


def _refine(sol, rhs, t0, t1, comp=1):
    """Root of component ``comp`` of the dense output on ``[t0, t1]``."""
    g = lambda t: sol(t)[comp]
    t = optimize.brentq(g, t0, t1, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    for _ in range(3):
        u = sol(t)
        du = rhs(t, u)[comp]
        if du == 0:
            break
        t_new = t - u[comp] / du
        if not t0 <= t_new <= t1:
            break
        t = t_new
    return t, sol(t)


def _integrate_return(ns: NormalizedSystem, eps: float, tol: float, method: str, max_steps: int):
    rhs = _field(ns, eps)
    rtol = max(tol / 10.0, MIN_RTOL)
    solver = METHODS[method](rhs, 0.0, np.array([1.0, 0.0]), T_BOUND, rtol=rtol, atol=tol / 10.0)
    half_turns = 0
    steps = 0
    while solver.status == "running":
        t_old, u_old = solver.t, solver.y.copy()
        solver.step()
        steps += 1
        if solver.status == "failed":
            raise NoReturnDetected(f"integrator failed: {solver.status}")
        u = solver.y
        if abs(u[0]) > BOX or abs(u[1]) > BOX:
            raise NoReturnDetected(f"orbit left the box |x|,|y| <= {BOX} at eps = {eps:g}")
        if steps > max_steps:
            raise NoReturnDetected(f"no return within {max_steps} steps")
        crossed_down = u_old[1] > 0.0 >= u[1]
        crossed_up = u_old[1] < 0.0 <= u[1]
        if not (crossed_down or crossed_up):
            continue
        sol = solver.dense_output()
        t_ev, u_ev = _refine(sol, rhs, t_old, solver.t)
        half_turns += 1
        if crossed_up and u_ev[0] > 0.0:
            return eps * u_ev[0], steps, half_turns, t_ev
    raise NoReturnDetected(f"integration ended without a return ({solver.status})")


def eps_max(ns: NormalizedSystem) -> float:
    return 0.5 * ns.radius_r


def numeric_return(
    spec: SystemSpec,
    eps: float,
    tol: float = DEFAULT_TOL,
    method: str = "DOP853",
    ns: NormalizedSystem | None = None,
    max_steps: int = MAX_STEPS,
) -> OrbitCrossing:
    """First return ``Z(eps)`` to the transversal by direct integration."""
    if ns is None:
        ns = normalize(spec)
    if not 1e-13 <= tol <= 1e-6:
        raise ValidationError(f"tol = {tol:g} outside [1e-13, 1e-6]")
    if not 0.0 < eps <= eps_max(ns):
        raise OutOfRadius(f"eps = {eps:g} outside (0, {eps_max(ns):.4g}]")
    z, steps, half, t_ev = _integrate_return(ns, eps, tol, method, max_steps)
    if half != 2:
        raise NoReturnDetected(f"return after {half} axis crossings, expected 2")
    z_loose = _integrate_return(ns, eps, min(10.0 * tol, 1e-6), method, max_steps)[0]
    return OrbitCrossing(z, steps, abs(z - z_loose), half, t_ev)


def y_on_positive_y_axis(spec: SystemSpec, eps: float, eta: float = 1.0, tol: float = DEFAULT_TOL) -> float:
    """``y`` where the orbit from ``(eta, 0)`` first meets ``x = 0``."""
    ns = normalize(spec)
    rhs = _field(ns, eps)
    solver = integrate.DOP853(rhs, 0.0, np.array([eta, 0.0]), T_BOUND, rtol=max(tol / 10, MIN_RTOL), atol=tol / 10)
    while solver.status == "running":
        t_old, x_old = solver.t, solver.y[0]
        solver.step()
        if x_old > 0.0 >= solver.y[0]:
            _, u = _refine(solver.dense_output(), rhs, t_old, solver.t, comp=0)
            return float(u[1])
    raise NoReturnDetected("orbit never reached the y-axis")


def numeric_return_original(spec: SystemSpec, eps: float, tol: float = DEFAULT_TOL) -> float:
    """Return point computed in the original ``(z, w)`` coordinates.

    Starts on the transversal ``f(z) w = z**(l+1) g(z)`` at ``z = eps`` and
    tracks ``w1 = w - z**(l+1) F(z)``.  Time runs with the sign of ``f(0)``
    so the orbit is traversed in the same sense as in the rescaled system.
    """
    ns = normalize(spec)
    if not 0.0 < eps <= eps_max(ns):
        raise OutOfRadius(f"eps = {eps:g} outside (0, {eps_max(ns):.4g}]")
    f, g = _poly_eval(spec.f_coeffs), _poly_eval(spec.g_coeffs)
    k, l = spec.k, spec.l
    direction = math.copysign(1.0, spec.f_coeffs[0])

    def rhs(t, u):
        z, w = u
        fz, gz = f(z), g(z)
        return direction * np.array([-w * fz + z ** (l + 1) * gz, k * z ** (2 * k - 1) * fz + k * w * z**l * gz])

    def w1(u):
        return u[1] - u[0] ** (l + 1) * g(u[0]) / f(u[0])

    u0 = np.array([eps, eps ** (l + 1) * g(eps) / f(eps)])
    scale = np.array([eps, eps**k])
    solver = integrate.DOP853(rhs, 0.0, u0, T_BOUND * eps ** (1 - k), rtol=max(tol / 10, MIN_RTOL), atol=tol / 10 * scale)
    crossings = 0
    while solver.status == "running":
        t_old, s_old = solver.t, w1(solver.y)
        solver.step()
        s_new = w1(solver.y)
        if s_old < 0.0 <= s_new or s_old > 0.0 >= s_new:
            crossings += 1
            sol = solver.dense_output()
            t_ev = optimize.brentq(lambda t: w1(sol(t)), t_old, solver.t, xtol=1e-15 * max(1.0, solver.t))
            u = sol(t_ev)
            if s_old < 0.0 and u[0] > 0.0:
                return float(u[0])
    raise NoReturnDetected("no return in original coordinates")


def order_fit(samples, noise_floor: float = 0.0) -> FitResult:
    """Least-squares slope of ``log|residual|`` against ``log eps``."""
    samples = list(samples)
    if len(samples) < 3:
        raise ValueError("need at least three samples")
    eps = np.array([s[0] for s in samples], dtype=float)
    res = np.abs(np.array([s[1] for s in samples], dtype=float))
    if np.any(res <= noise_floor):
        raise ResidualBelowNoiseFloor(
            f"residuals {res.min():.2e} within the noise floor {noise_floor:.2e}"
        )
    lx, ly = np.log(eps), np.log(res)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(slope), float(intercept), r2)


@dataclass
class VerificationReport:
    spec: dict
    order: int
    tol: float
    items: list = field(default_factory=list)
    fit: dict | None = None
    fixed_point: dict | None = None
    closed_form: dict | None = None
    checks: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and bool(self.checks) and all(self.checks.values())

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _error_entry(stage: str, exc: Exception) -> dict:
    code = getattr(exc, "code", type(exc).__name__)
    return {"stage": stage, "code": code, "message": str(exc)}


DEFAULT_EPSILONS = tuple(float(x) for x in np.geomspace(0.02, 0.08, 4))
FIXED_POINT_DELTAS = (0.04, -0.04, 0.08, -0.08)


def verify(
    spec: SystemSpec,
    order: int,
    eps_list=DEFAULT_EPSILONS,
    tol: float = DEFAULT_TOL,
    slope_margin: float = 0.2,
    abs_bound: float = 1e-9,
    closed_form_tol: float = 1e-8,
    fixed_point_tol: float = 1e-8,
    fixed_point_order: int = 6,
    result=None,
) -> VerificationReport:
    """Compare the truncated series with direct integration at each eps."""
    from .retmap import ETA0, return_map
    from .vsolver import fixed_point_residual, solve_v

    report = VerificationReport(
        spec={"f": list(spec.f_coeffs), "g": list(spec.g_coeffs), "k": spec.k, "l": spec.l},
        order=order,
        tol=tol,
    )
    try:
        spec.validate()
        ns = normalize(spec, working_order=max(order, fixed_point_order))
        res = result if result is not None else return_map(spec, order)
    except NilReturnError as exc:
        report.errors.append(_error_entry("retmap", exc))
        return report

    Z = res.Z.truncate(order)
    p = ns.p
    cf = res.leading_closed_form
    if order >= p + 2:
        diff = max(abs(Z[p + 1] - cf[0]), abs(Z[p + 2] - cf[1]))
    else:
        diff = abs(Z[p + 1] - cf[0])
    report.closed_form = {"Z_p1": cf[0], "Z_p2": cf[1], "max_abs_diff": diff}
    report.checks["closed_form"] = diff <= closed_form_tol

    try:
        vs = solve_v(ns, fixed_point_order)
        deltas = [d for d in FIXED_POINT_DELTAS if abs(d) <= ns.radius_r]
        fp = fixed_point_residual(vs, deltas)
        report.fixed_point = {"order": fixed_point_order, "deltas": deltas, "residual": fp}
        report.checks["fixed_point"] = fp <= fixed_point_tol
    except NilReturnError as exc:
        report.errors.append(_error_entry("vsolver", exc))

    samples = []
    lead = abs(Z[p + 1]) if Z.order >= p + 1 else 0.0
    for eps in eps_list:
        item = {"eps": float(eps)}
        if lead * eps**p > EPS_GATE:
            item["error"] = {"stage": "oracle", "code": "eps_too_large",
                             "message": f"|Z_(p+1)| eps^p = {lead * eps**p:.3g} > {EPS_GATE}"}
            report.items.append(item)
            continue
        try:
            crossing = numeric_return(spec, eps, tol=tol, ns=ns)
        except NilReturnError as exc:
            item["error"] = _error_entry("oracle", exc)
            report.errors.append(item["error"])
            report.items.append(item)
            continue
        z_series = float(Z(eps))
        item.update(
            z_series=z_series,
            z_numeric=crossing.z_return,
            residual=crossing.z_return - z_series,
            err_estimate=crossing.err_estimate,
            n_steps=crossing.n_steps,
        )
        if not 1.0 - ETA0 < crossing.z_return / eps < 1.0 + ETA0:
            item["warning"] = "return point outside the matching window around eta = 1"
        samples.append((eps, item["residual"]))
        report.items.append(item)

    if len(samples) < 3:
        report.errors.append({"stage": "fit", "code": "too_few_samples", "message": "fewer than 3 usable eps"})
        return report
    floor = 10.0 * tol
    usable = [(e, r) for e, r in samples if abs(r) > floor]
    worst = max(abs(r) for _, r in samples)
    target = order + 1 - slope_margin
    if len(usable) >= 3:
        fit = order_fit(usable, noise_floor=floor)
        report.fit = dict(asdict(fit), n_points=len(usable), noise_floor=floor)
        report.checks["remainder_order"] = fit.slope >= target
    elif len(usable) == 2:
        # the remaining points sit at the noise floor; the two above it fix a slope
        (e1, r1), (e2, r2) = usable
        slope = math.log(abs(r2 / r1)) / math.log(e2 / e1)
        report.fit = {"slope": slope, "n_points": 2, "noise_floor": floor, "max_abs_residual": worst}
        report.checks["remainder_order"] = slope >= target
    else:
        report.fit = {"noise_floor": floor, "n_points": len(usable), "max_abs_residual": worst}
        report.checks["remainder_order"] = worst <= abs_bound
    return report
