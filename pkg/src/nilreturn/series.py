"""Truncated power series over a generic coefficient ring.

A :class:`CoeffSeries` holds ``c_0 .. c_N`` where ``N`` is the truncation
order; coefficients beyond ``N`` are *unknown*, not zero.  The ring may be
plain floats, :class:`mpmath.mpf` values, or :class:`~nilreturn.xifunc.XiFunction`
objects (functions of xi on [0, 1]).  Ring elements only need ``+``, ``-``,
``*``, division, and the small dispatch helpers defined here.

Binary operations return a series whose order is the minimum of the operand
orders, so the valid order of a result is always explicit.
"""

from __future__ import annotations

import math
from typing import Sequence

import mpmath

from .errors import NonInvertibleLeadingCoefficient, NonzeroConstantTerm

SQRT_FLOOR = 1e-6


def _is_zero(c) -> bool:
    if isinstance(c, (int, float)):
        return c == 0
    is_zero = getattr(c, "is_zero", None)
    if is_zero is not None:
        return bool(is_zero)
    return c == 0


def ring_sqrt(c):
    if isinstance(c, mpmath.mpf):
        return mpmath.sqrt(c)
    if isinstance(c, (int, float)):
        return math.sqrt(c)
    return c.sqrt()


def ring_norm(c) -> float:
    if isinstance(c, (int, float, mpmath.mpf)):
        return float(abs(c))
    return c.norm()


def ring_inf(c) -> float:
    """Lower bound of a ring element (pointwise minimum for functions)."""
    if isinstance(c, (int, float, mpmath.mpf)):
        return float(c)
    return c.min()


def _check_finite(c):
    if isinstance(c, (int, float)) and not math.isfinite(c):
        raise ArithmeticError(f"non-finite series coefficient {c!r}")
    return c


class CoeffSeries:
    """Immutable truncated power series ``sum_{n<=order} c_n t^n``."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Sequence, order: int | None = None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("truncation order must be >= 0")
        if len(coeffs) > order + 1:
            coeffs = coeffs[: order + 1]
        coeffs = coeffs + [0.0] * (order + 1 - len(coeffs))
        self._coeffs = tuple(_check_finite(c) for c in coeffs)

    @classmethod
    def zero(cls, order: int) -> "CoeffSeries":
        return cls([0.0] * (order + 1))

    @classmethod
    def monomial(cls, n: int, order: int, coeff=1.0) -> "CoeffSeries":
        c = [0.0] * (order + 1)
        if n <= order:
            c[n] = coeff
        return cls(c)

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    def __len__(self):
        return len(self._coeffs)

    def __getitem__(self, n):
        return self._coeffs[n]

    def __iter__(self):
        return iter(self._coeffs)

    def __repr__(self):
        return f"CoeffSeries({list(self._coeffs)!r}, order={self.order})"

    def truncate(self, order: int) -> "CoeffSeries":
        if order > self.order:
            raise ValueError(f"cannot raise truncation order {self.order} to {order}")
        return CoeffSeries(self._coeffs[: order + 1])

    def map(self, fn) -> "CoeffSeries":
        return CoeffSeries([fn(c) for c in self._coeffs])

    def shift(self, n: int = 1) -> "CoeffSeries":
        """Multiply by ``t**n``; the known order grows by ``n``."""
        return CoeffSeries([0.0] * n + list(self._coeffs))

    def __add__(self, other):
        if not isinstance(other, CoeffSeries):
            c = list(self._coeffs)
            c[0] = c[0] + other
            return CoeffSeries(c)
        n = min(self.order, other.order)
        return CoeffSeries([self[i] + other[i] for i in range(n + 1)])

    __radd__ = __add__

    def __neg__(self):
        return CoeffSeries([-c for c in self._coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CoeffSeries):
            return series_mul(self, other)
        return CoeffSeries([c * other for c in self._coeffs])

    def __rmul__(self, other):
        return CoeffSeries([other * c for c in self._coeffs])

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        result = CoeffSeries.monomial(0, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, t):
        """Evaluate the truncated polynomial at ``t`` (Horner)."""
        acc = self._coeffs[-1]
        for c in reversed(self._coeffs[:-1]):
            acc = acc * t + c
        return acc

    def norm(self) -> float:
        return max(ring_norm(c) for c in self._coeffs)


def series_mul(a: CoeffSeries, b: CoeffSeries) -> CoeffSeries:
    """Cauchy product truncated to ``min(a.order, b.order)``."""
    n = min(a.order, b.order)
    out = []
    for m in range(n + 1):
        acc = 0.0
        for i in range(m + 1):
            ai, bj = a[i], b[m - i]
            if _is_zero(ai) or _is_zero(bj):
                continue
            acc = acc + ai * bj
        out.append(acc)
    return CoeffSeries(out)


def series_sqrt(a: CoeffSeries, floor: float = SQRT_FLOOR) -> CoeffSeries:
    """Square root with the positive branch for the leading coefficient."""
    if ring_inf(a[0]) <= floor:
        raise NonInvertibleLeadingCoefficient(
            f"leading coefficient has infimum {ring_inf(a[0]):.3g} <= {floor:g}"
        )
    s0 = ring_sqrt(a[0])
    inv2s0 = 1.0 / (2.0 * s0)
    s = [s0]
    for n in range(1, a.order + 1):
        acc = a[n]
        for i in range(1, n):
            if _is_zero(s[i]) or _is_zero(s[n - i]):
                continue
            acc = acc - s[i] * s[n - i]
        s.append(0.0 if _is_zero(acc) else acc * inv2s0)
    return CoeffSeries(s)


def series_substitute(a: CoeffSeries, h: CoeffSeries) -> CoeffSeries:
    """Formal composition ``a(h(t))`` for ``h`` without constant term.

    The result is known to ``min(a.order, h.order)``: with ``h = O(t)`` the
    unknown tail of ``a`` only enters beyond ``t**a.order``.
    """
    if not _is_zero(h[0]):
        raise NonzeroConstantTerm(f"inner series has constant term {h[0]!r}")
    n = min(a.order, h.order)
    h = h.truncate(n)
    acc = CoeffSeries.monomial(0, n, a[n])
    for j in range(n - 1, -1, -1):
        acc = acc * h + a[j]
    return acc


def apply_function_series(B: CoeffSeries, w) -> CoeffSeries:
    """Substitute ``z = delta * w`` into ``B(z)``; coefficient m is ``B_m w**m``."""
    out = []
    wm = 1.0
    for m, bm in enumerate(B):
        if m > 0:
            wm = wm * w
        out.append(0.0 if _is_zero(bm) else wm * bm)
    return CoeffSeries(out)
