"""Input systems, normal-form quantities and the quadrant reflections.

The input field is

    z' = -w f(z) + z**(l+1) g(z),    w' = k z**(2k-1) f(z) + k w z**l g(z)

with polynomial ``f``, ``g`` given by their Taylor coefficients.  Everything
downstream depends on ``F = g / f`` only, through

    A(z) = 1 + z**(2p) F(z)**2,    B(z) = 2 z F'(z) + 2 (p + 2k) F(z),

with ``p = l - k + 1``.  The quadrant solutions of the return-map
construction use ``J F(x) = sign * F(reflect * x)``; a :class:`NormalizedSystem`
records ``sign`` and ``reflect`` so the exact (non-truncated) ``F`` stays
available for the independent checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import AssumptionViolation, OutOfRadius
from .series import CoeffSeries

F0_TOL = 1e-14
DEFAULT_WORKING_ORDER = 12
ROOT_TEST_ORDER = 60
RADIUS_CAP = 1.0
RADIUS_SAFETY = 0.8
CIRCLE_SAMPLES = 512


@dataclass(frozen=True)
class SystemSpec:
    f_coeffs: tuple
    g_coeffs: tuple
    k: int
    l: int

    def __post_init__(self):
        object.__setattr__(self, "f_coeffs", tuple(float(c) for c in self.f_coeffs))
        object.__setattr__(self, "g_coeffs", tuple(float(c) for c in self.g_coeffs))
        if not self.f_coeffs:
            object.__setattr__(self, "f_coeffs", (0.0,))
        if not self.g_coeffs:
            object.__setattr__(self, "g_coeffs", (0.0,))

    def validate(self):
        if int(self.k) != self.k or int(self.l) != self.l:
            raise AssumptionViolation("k_range", "k and l must be integers")
        if abs(self.f_coeffs[0]) <= F0_TOL:
            raise AssumptionViolation("f0_zero", "f(0) must be nonzero")
        if not 1 <= self.k <= self.l + 1:
            raise AssumptionViolation("k_range", f"need 1 <= k <= l+1, got k={self.k}, l={self.l}")
        if self.k == self.l + 1:
            raise AssumptionViolation("k_equals_l_plus_1", f"k = l+1 = {self.k} is excluded")

    @property
    def p(self) -> int:
        return self.l - self.k + 1


def series_divide(num, den, order: int) -> list:
    """Taylor coefficients of ``num / den`` up to ``order`` (``den[0] != 0``)."""
    num = list(num) + [0.0] * (order + 1)
    den = list(den) + [0.0] * (order + 1)
    q = []
    for n in range(order + 1):
        acc = num[n] - sum(q[i] * den[n - i] for i in range(n))
        q.append(acc / den[0])
    return q


def root_test_radius(coeffs, cap: float = RADIUS_CAP) -> float:
    """Empirical convergence radius from the tail of a coefficient sequence."""
    n = len(coeffs) - 1
    est = []
    for m in range(max(n // 2, 1), n + 1):
        c = abs(coeffs[m])
        if c > 0:
            est.append(c ** (-1.0 / m))
    if not est:
        return cap
    return min(min(est), cap)


def _circle(r: float) -> np.ndarray:
    return r * np.exp(2j * np.pi * np.arange(CIRCLE_SAMPLES) / CIRCLE_SAMPLES)


@dataclass(frozen=True)
class NormalizedSystem:
    spec: SystemSpec
    order: int
    F: CoeffSeries
    p: int
    k: int
    l: int
    A: CoeffSeries
    Bser: CoeffSeries
    B0: float
    B1: float
    theta_p: int
    radius_r: float
    sign: int = 1
    reflect: int = 1
    label: str = "F"
    c0: float = field(default=0.0)

    # exact evaluation (no truncation) ---------------------------------------

    def _base_F(self, z):
        f, g = self.spec.f_coeffs, self.spec.g_coeffs
        return npoly.polyval(z, g) / npoly.polyval(z, f)

    def _base_dF(self, z):
        f, g = self.spec.f_coeffs, self.spec.g_coeffs
        fv, gv = npoly.polyval(z, f), npoly.polyval(z, g)
        df, dg = npoly.polyval(z, npoly.polyder(f)), npoly.polyval(z, npoly.polyder(g))
        return (dg * fv - gv * df) / fv**2

    def F_exact(self, z):
        return self.sign * self._base_F(self.reflect * np.asarray(z))

    def dF_exact(self, z):
        return self.sign * self.reflect * self._base_dF(self.reflect * np.asarray(z))

    def A_exact(self, z):
        z = np.asarray(z)
        return 1.0 + z ** (2 * self.p) * self.F_exact(z) ** 2

    def B_exact(self, z):
        z = np.asarray(z)
        return 2.0 * z * self.dF_exact(z) + 2.0 * (self.p + 2 * self.k) * self.F_exact(z)

    def sup_A_minus_one(self, r: float | None = None) -> float:
        r = self.radius_r if r is None else r
        return float(np.max(np.abs(self.A_exact(_circle(r)) - 1.0)))

    def sup_B(self, r: float | None = None) -> float:
        r = self.radius_r if r is None else r
        return float(np.max(np.abs(self.B_exact(_circle(r)))))

    @property
    def is_hamiltonian(self) -> bool:
        return all(c == 0 for c in self.F)


def _derived(F: CoeffSeries, p: int, k: int):
    n = F.order
    F2 = F * F
    A = [1.0] + [0.0] * n
    for m in range(n + 1 - 2 * p):
        A[2 * p + m] = F2[m]
    Bser = [2.0 * (m + p + 2 * k) * F[m] for m in range(n + 1)]
    return CoeffSeries(A), CoeffSeries(Bser)


def _choose_radius(ns_like, k: int, F_tail) -> float:
    r = RADIUS_SAFETY * root_test_radius(F_tail)
    # c0 = sup |A - 1| on |z| <= r must stay well below 1/(2k)
    for _ in range(200):
        if ns_like.sup_A_minus_one(r) <= 1.0 / (4 * k):
            return r
        r *= 0.9
    return r


def normalize(spec: SystemSpec, working_order: int = DEFAULT_WORKING_ORDER) -> NormalizedSystem:
    """Validate ``spec`` and compute F, A, B and the scalar constants."""
    spec.validate()
    p, k, l = spec.p, spec.k, spec.l
    tail = series_divide(spec.g_coeffs, spec.f_coeffs, max(ROOT_TEST_ORDER, working_order))
    F = CoeffSeries(tail[: working_order + 1])
    A, Bser = _derived(F, p, k)
    ns = NormalizedSystem(
        spec=spec,
        order=working_order,
        F=F,
        p=p,
        k=k,
        l=l,
        A=A,
        Bser=Bser,
        B0=2.0 * (p + 2 * k) * F[0],
        B1=2.0 * (p + 2 * k + 1) * (F[1] if working_order >= 1 else 0.0),
        theta_p=(-1) ** (p + k - 1),
        radius_r=RADIUS_CAP,
    )
    r = _choose_radius(ns, k, tail)
    return replace(ns, radius_r=r, c0=ns.sup_A_minus_one(r))


_QUADRANTS = {
    # name: (sign as a function of p + k, reflect)
    "J2": (lambda pk: (-1) ** pk, -1),
    "J3": (lambda pk: (-1) ** (pk - 1), -1),
    "J4": (lambda pk: -1, 1),
}


def quadrant_transform(ns: NormalizedSystem, which: str) -> NormalizedSystem:
    """Replace F by J2 F, J3 F or J4 F and recompute A and B."""
    try:
        sign_of, reflect = _QUADRANTS[which]
    except KeyError:
        raise ValueError(f"unknown quadrant transform {which!r}") from None
    sign = sign_of(ns.p + ns.k)
    F = CoeffSeries([sign * reflect**m * c for m, c in enumerate(ns.F)])
    A, Bser = _derived(F, ns.p, ns.k)
    label = which if ns.label == "F" else f"{which}({ns.label})"
    return replace(
        ns,
        F=F,
        A=A,
        Bser=Bser,
        B0=Bser[0],
        B1=Bser[1] if Bser.order >= 1 else 0.0,
        sign=ns.sign * sign,
        reflect=ns.reflect * reflect,
        label=label,
    )


def transversal_w(spec: SystemSpec, z: float, ns: NormalizedSystem | None = None) -> float:
    """Point ``w = z**(l+1) F(z)`` of the transversal above ``z``."""
    if ns is None:
        ns = normalize(spec)
    if abs(z) > ns.radius_r:
        raise OutOfRadius(f"|z| = {abs(z):g} exceeds validated radius {ns.radius_r:.4g}")
    return float(z ** (spec.l + 1) * ns._base_F(z))


def system_from_lists(f, g, k: int, l: int) -> SystemSpec:
    return SystemSpec(tuple(f), tuple(g), int(k), int(l))

