"""Smooth functions of xi on [0, 1] as Chebyshev interpolants.

Values are stored at Chebyshev points of the second kind (Chebyshev-Lobatto
points, endpoints included).  Evaluation uses the barycentric formula, which
reproduces node values exactly; in particular ``f(0)`` and ``f(1)`` are the
stored endpoint values.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InterpolationFailure, NonInvertibleLeadingCoefficient

DEFAULT_TOL = 1e-12
MAX_DEGREE = 512
MIN_DEGREE = 16
POSITIVITY_FLOOR = 1e-6


@lru_cache(maxsize=None)
def lobatto_nodes(n: int) -> np.ndarray:
    """``n + 1`` Chebyshev-Lobatto points on [0, 1], ascending."""
    x = (1.0 - np.cos(np.pi * np.arange(n + 1) / n)) / 2.0
    x[0], x[-1] = 0.0, 1.0
    if n % 2 == 0:
        x[n // 2] = 0.5
    x.flags.writeable = False
    return x


@lru_cache(maxsize=None)
def _bary_weights(n: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    w.flags.writeable = False
    return w


def vals2coeffs(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients from values at ascending Lobatto points."""
    n = len(values) - 1
    v = values[::-1]
    ext = np.concatenate([v, v[n - 1 : 0 : -1]])
    c = np.real(np.fft.fft(ext))[: n + 1] / n
    c[0] /= 2.0
    c[n] /= 2.0
    return c


def _barycentric(values: np.ndarray, xi) -> np.ndarray:
    n = len(values) - 1
    nodes = lobatto_nodes(n)
    w = _bary_weights(n)
    xi = np.asarray(xi, dtype=float)
    flat = xi.reshape(-1)
    diff = flat[:, None] - nodes[None, :]
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = w / diff
        out = (t @ values) / t.sum(axis=1)
    rows, cols = np.nonzero(hit)
    out[rows] = values[cols]
    return out.reshape(xi.shape)


def _chop_degree(coeffs: np.ndarray, tol: float, scale: float) -> int:
    """Smallest degree whose dropped tail sums to at most ``tol * scale / 10``."""
    tail = np.cumsum(np.abs(coeffs[::-1]))[::-1]
    keep = np.nonzero(tail > 0.1 * tol * scale)[0]
    if len(keep) == 0:
        return 1
    return max(int(keep[-1]), 1)


class XiFunction:
    """Polynomial interpolant on [0, 1] supporting pointwise ring operations."""

    __slots__ = ("values", "_coeffs")

    def __init__(self, values):
        values = np.array(values, dtype=float)
        if values.ndim != 1 or len(values) < 2:
            raise ValueError("need at least two node values")
        if not np.all(np.isfinite(values)):
            raise ArithmeticError("non-finite values in XiFunction")
        values.flags.writeable = False
        self.values = values
        self._coeffs = None

    # construction ---------------------------------------------------------

    @classmethod
    def constant(cls, c: float) -> "XiFunction":
        return cls([c, c])

    @classmethod
    def from_values(cls, values, tol: float = DEFAULT_TOL) -> "XiFunction":
        """Interpolant through ``values`` at Lobatto points, then chopped."""
        return cls(values).chop(tol)

    @classmethod
    def from_callable(
        cls,
        fn,
        tol: float = DEFAULT_TOL,
        max_degree: int = MAX_DEGREE,
        min_degree: int = MIN_DEGREE,
    ) -> "XiFunction":
        """Adaptive interpolation of a vectorised callable.

        The degree doubles until the interpolant matches ``fn`` at the
        interleaved check points to ``tol`` relative to the sampled maximum.
        """
        n = min_degree
        vals = np.asarray(fn(lobatto_nodes(n)), dtype=float)
        while True:
            fine = lobatto_nodes(2 * n)
            check = np.asarray(fn(fine[1::2]), dtype=float)
            if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(check))):
                raise ArithmeticError("non-finite samples while interpolating")
            scale = max(np.max(np.abs(vals)), np.max(np.abs(check)))
            merged = np.empty(2 * n + 1)
            merged[0::2] = vals
            merged[1::2] = check
            if scale == 0.0:
                return cls.constant(0.0)
            err = np.max(np.abs(_barycentric(vals, fine[1::2]) - check))
            if err <= tol * scale:
                return cls(merged).chop(tol)
            n *= 2
            if 2 * n > max_degree:
                raise InterpolationFailure(
                    f"interpolation residual {err / scale:.2e} above {tol:g} at degree cap {max_degree}"
                )
            vals = merged

    # basic properties -----------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.values) - 1

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = vals2coeffs(self.values)
        return self._coeffs

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    def __call__(self, xi):
        return _barycentric(self.values, xi)

    def __repr__(self):
        return f"XiFunction(degree={self.degree}, f(0)={self.values[0]:.6g}, f(1)={self.values[-1]:.6g})"

    def _dense(self) -> np.ndarray:
        return self(lobatto_nodes(max(4 * self.degree, 64)))

    def norm(self) -> float:
        return float(np.max(np.abs(self._dense())))

    def min(self) -> float:
        return float(np.min(self._dense()))

    def chop(self, tol: float = DEFAULT_TOL) -> "XiFunction":
        scale = np.max(np.abs(self.values))
        if scale == 0.0:
            return XiFunction.constant(0.0)
        d = _chop_degree(self.coeffs, tol, scale)
        if d >= self.degree:
            return self
        return XiFunction(self(lobatto_nodes(d)))

    def resample(self, n: int) -> np.ndarray:
        return self(lobatto_nodes(n))

    # arithmetic -----------------------------------------------------------

    def _binary(self, other, op, degree):
        n = max(degree, 1)
        if n > MAX_DEGREE:
            return XiFunction.from_callable(lambda x: op(self(x), other(x)))
        return XiFunction.from_values(op(self.resample(n), other.resample(n)))

    def __add__(self, other):
        if isinstance(other, XiFunction):
            return self._binary(other, np.add, max(self.degree, other.degree))
        return XiFunction(self.values + other)

    __radd__ = __add__

    def __neg__(self):
        return XiFunction(-self.values)

    def __sub__(self, other):
        if isinstance(other, XiFunction):
            return self._binary(other, np.subtract, max(self.degree, other.degree))
        return XiFunction(self.values - other)

    def __rsub__(self, other):
        return XiFunction(other - self.values)

    def __mul__(self, other):
        if isinstance(other, XiFunction):
            if self.is_zero or other.is_zero:
                return XiFunction.constant(0.0)
            return self._binary(other, np.multiply, self.degree + other.degree)
        if other == 0:
            return XiFunction.constant(0.0)
        return XiFunction(self.values * other)

    __rmul__ = __mul__

    def _require_positive(self, what):
        lo = self.min()
        if lo <= POSITIVITY_FLOOR:
            raise NonInvertibleLeadingCoefficient(
                f"{what} needs a positive function, sampled minimum is {lo:.3g}"
            )

    def __truediv__(self, other):
        if isinstance(other, XiFunction):
            if np.min(np.abs(other._dense())) <= POSITIVITY_FLOOR:
                raise NonInvertibleLeadingCoefficient("division by a function that nearly vanishes")
            return XiFunction.from_callable(lambda x: self(x) / other(x))
        return XiFunction(self.values / other)

    def __rtruediv__(self, other):
        self._require_positive("reciprocal")
        return XiFunction.from_callable(lambda x: other / self(x))

    def __pow__(self, n: int):
        if n < 0:
            return 1.0 / (self ** (-n))
        result = XiFunction.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sqrt(self) -> "XiFunction":
        self._require_positive("sqrt")
        return XiFunction.from_callable(lambda x: np.sqrt(self(x)))
