"""Baseline survival families and their semigroup operators.

A baseline is a continuous survival function ``S0`` on ``(x_L, inf)`` with
``S0(x_L) = 1`` and ``S0 -> 0``.  Everything downstream works in
cumulative-hazard coordinates ``R0(x) = -ln S0(x)``, which is strictly
increasing with ``R0(x_L) = 0``.  The two induced operators

    combine(x, t)    = R0^{-1}(R0(x) + R0(t))     # x (+) t
    difference(x, t) = R0^{-1}(R0(x) - R0(t))     # x (-) t

reduce to addition/subtraction for the exponential family, to
``(x^a + t^a)^(1/a)`` for the Weibull family and to multiplication/division
for the Pareto family.  Raw survival values are never multiplied directly;
that would underflow long before the hazard coordinates do.

The left endpoint ``x_L`` is 0 for the exponential, Weibull and custom
families and 1 for the Pareto family (support ``x > 1``), so the Pareto
identity element is 1 rather than 0.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, ModelError, NumericError

__all__ = [
    "BaselineModel",
    "Exponential",
    "Weibull",
    "Pareto",
    "CustomHazard",
    "HazardIntegrator",
]


def _is_scalar(x) -> bool:
    return np.ndim(x) == 0


def _ret(value, *refs):
    """Return a plain float when every reference input is scalar."""
    if all(_is_scalar(r) for r in refs):
        return float(value)
    return np.asarray(value, dtype=float)


def _check_finite(x, name: str) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite, got {x!r}")


class BaselineModel:
    """Common behaviour for all baseline families.

    Subclasses provide the coordinate maps ``cumulative_hazard``,
    ``inverse_cumulative_hazard`` and ``hazard``; closed-form families also
    override ``_combine`` / ``_difference`` so no root finding is involved.
    All maps accept scalars or numpy arrays.
    """

    family: str = "abstract"
    x_L: float = 0.0

    # -- primitive coordinate maps (overridden per family) -------------------

    def cumulative_hazard(self, x):
        raise NotImplementedError

    def inverse_cumulative_hazard(self, r):
        raise NotImplementedError

    def hazard(self, x):
        raise NotImplementedError

    def hazard_derivative(self, x):
        """Derivative of the hazard, or None when no analytic form exists."""
        return None

    # -- derived quantities ---------------------------------------------------

    def survival(self, x):
        """Survival probability; 1 at or below the left endpoint."""
        _check_finite(x, "x")
        xc = np.maximum(x, self.x_L)
        return _ret(np.exp(-self.cumulative_hazard(xc)), x)

    def density(self, x):
        _check_finite(x, "x")
        interior = np.asarray(x, dtype=float) > self.x_L
        if not np.any(interior):
            return _ret(np.zeros_like(np.asarray(x, dtype=float)), x)
        xi = np.maximum(np.asarray(x, dtype=float), np.nextafter(self.x_L, math.inf))
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            val = np.where(
                interior,
                self.hazard(xi) * np.exp(-self.cumulative_hazard(xi)),
                0.0,
            )
        return _ret(val, x)

    def inverse_survival(self, s):
        """Unique x with survival(x) = s, for s in (0, 1]."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(~np.isfinite(s_arr)) or np.any(s_arr <= 0.0) or np.any(s_arr > 1.0):
            raise DomainError(f"survival level must lie in (0, 1], got {s!r}")
        r = np.abs(-np.log(s_arr))  # abs() turns -0.0 at s=1 into 0.0
        return _ret(self.inverse_cumulative_hazard(r), s)

    # -- semigroup operators --------------------------------------------------

    def _check_support(self, *values) -> None:
        for v in values:
            _check_finite(v, "argument")
            if np.any(np.asarray(v) < self.x_L):
                raise DomainError(f"argument below left endpoint {self.x_L}: {v!r}")

    def combine(self, x, t):
        """Semigroup sum x (+) t, computed in cumulative-hazard space."""
        self._check_support(x, t)
        if _is_scalar(t) and t == self.x_L:
            return _ret(np.asarray(x, dtype=float) + 0.0, x)
        if _is_scalar(x) and x == self.x_L:
            return _ret(np.asarray(t, dtype=float) + 0.0, t)
        return _ret(self._combine(np.asarray(x, dtype=float),
                                  np.asarray(t, dtype=float)), x, t)

    def difference(self, x, t):
        """Semigroup difference x (-) t; requires x >= t."""
        self._check_support(x, t)
        if np.any(np.asarray(x) < np.asarray(t)):
            raise DomainError("difference requires x >= t")
        if _is_scalar(t) and t == self.x_L:
            return _ret(np.asarray(x, dtype=float) + 0.0, x)
        if _is_scalar(x) and _is_scalar(t) and x == t:
            return self.x_L
        return _ret(self._difference(np.asarray(x, dtype=float),
                                     np.asarray(t, dtype=float)), x, t)

    def _combine(self, x, t):
        return self.inverse_cumulative_hazard(
            self.cumulative_hazard(x) + self.cumulative_hazard(t)
        )

    def _difference(self, x, t):
        return self.inverse_cumulative_hazard(
            np.maximum(self.cumulative_hazard(x) - self.cumulative_hazard(t), 0.0)
        )

    def spec_string(self) -> str:
        return self.family

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}()"


@dataclass(frozen=True, repr=False)
class Exponential(BaselineModel):
    """Unit-rate exponential baseline: R0(x) = x."""

    family = "exponential"
    x_L = 0.0

    def cumulative_hazard(self, x):
        return _ret(np.maximum(np.asarray(x, dtype=float), 0.0), x)

    def inverse_cumulative_hazard(self, r):
        return _ret(np.asarray(r, dtype=float), r)

    def hazard(self, x):
        return _ret(np.ones_like(np.asarray(x, dtype=float)), x)

    def hazard_derivative(self, x):
        return _ret(np.zeros_like(np.asarray(x, dtype=float)), x)

    def _combine(self, x, t):
        return x + t

    def _difference(self, x, t):
        return x - t


@dataclass(frozen=True, repr=False)
class Weibull(BaselineModel):
    """Weibull baseline with shape ``alpha``: R0(x) = x**alpha."""

    alpha: float = 1.0
    family = "weibull"
    x_L = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ModelError(f"Weibull shape must be positive, got {self.alpha}")

    def cumulative_hazard(self, x):
        with np.errstate(over="ignore"):
            return _ret(np.power(np.maximum(np.asarray(x, dtype=float), 0.0), self.alpha), x)

    def inverse_cumulative_hazard(self, r):
        with np.errstate(over="ignore"):
            return _ret(np.power(np.maximum(np.asarray(r, dtype=float), 0.0), 1.0 / self.alpha), r)

    def hazard(self, x):
        with np.errstate(divide="ignore", over="ignore"):
            return _ret(self.alpha * np.power(np.asarray(x, dtype=float), self.alpha - 1.0), x)

    def hazard_derivative(self, x):
        a = self.alpha
        with np.errstate(divide="ignore", over="ignore"):
            return _ret(a * (a - 1.0) * np.power(np.asarray(x, dtype=float), a - 2.0), x)

    def _combine(self, x, t):
        a = self.alpha
        with np.errstate(over="ignore"):
            return np.power(np.power(x, a) + np.power(t, a), 1.0 / a)

    def _difference(self, x, t):
        a = self.alpha
        with np.errstate(over="ignore"):
            return np.power(np.maximum(np.power(x, a) - np.power(t, a), 0.0), 1.0 / a)

    def spec_string(self) -> str:
        return f"weibull:{self.alpha:g}"


@dataclass(frozen=True, repr=False)
class Pareto(BaselineModel):
    """Pareto baseline S0(x) = 1/x on x > 1: R0(x) = ln x, identity element 1."""

    family = "pareto"
    x_L = 1.0

    def cumulative_hazard(self, x):
        return _ret(np.log(np.maximum(np.asarray(x, dtype=float), 1.0)), x)

    def inverse_cumulative_hazard(self, r):
        with np.errstate(over="ignore"):
            return _ret(np.exp(np.asarray(r, dtype=float)), r)

    def hazard(self, x):
        return _ret(1.0 / np.asarray(x, dtype=float), x)

    def hazard_derivative(self, x):
        return _ret(-1.0 / np.square(np.asarray(x, dtype=float)), x)

    def _combine(self, x, t):
        with np.errstate(over="ignore"):
            return x * t

    def _difference(self, x, t):
        return x / t


class HazardIntegrator:
    """Cumulative hazard of an arbitrary nonnegative hazard function.

    Integrates with adaptive quadrature (absolute tolerance ``epsabs``),
    memoized on a monotone knot ladder at ``x_L + step * 2**k``.  The ladder
    is append-only and each rung's value is chained over fixed subintervals,
    so ``cumulative`` is a pure function of its argument: results never
    depend on evaluation order.  That keeps repeated and concurrent use
    bitwise-reproducible (ties sampled through the inverse stay exact).
    The ladder is lock-protected; instances may be shared across threads.
    """

    _FIRST_STEP = 0.0625
    _MAX_RUNGS = 140  # ladder tops out near x_L + 2**137

    def __init__(self, hazard_fn, x_L: float = 0.0, *, epsabs: float = 1e-10,
                 name: str = "hazard"):
        self._fn = hazard_fn
        self.x_L = float(x_L)
        self.epsabs = float(epsabs)
        self.name = name
        self._lock = threading.RLock()
        self._rung_x: list[float] = []  # x_L + step * 2**k
        self._rung_r: list[float] = []

    def hazard(self, x: float) -> float:
        v = float(self._fn(x))
        if math.isnan(v) or v < 0.0:
            raise ModelError(f"{self.name} returned a negative or NaN value {v} at x={x}")
        return v

    def _quad(self, a: float, b: float) -> float:
        # full_output suppresses roundoff warnings on near-zero tails;
        # the absolute tolerance governs accuracy either way
        inc = quad(self.hazard, a, b, epsabs=self.epsabs, limit=200,
                   full_output=1)[0]
        if inc < 0.0:
            raise ModelError(f"{self.name} integrated to a negative value on [{a}, {b}]")
        return inc

    def _ensure_rung(self, k: int) -> None:
        if k >= self._MAX_RUNGS:
            raise NumericError(f"{self.name}: knot ladder exhausted at index {k}")
        with self._lock:
            while len(self._rung_x) <= k:
                j = len(self._rung_x)
                x = self.x_L + self._FIRST_STEP * 2.0**j
                prev_x = self._rung_x[-1] if self._rung_x else self.x_L
                prev_r = self._rung_r[-1] if self._rung_r else 0.0
                self._rung_x.append(x)
                self._rung_r.append(prev_r + self._quad(prev_x, x))

    def cumulative(self, x: float) -> float:
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"x must be finite, got {x}")
        if x <= self.x_L:
            return 0.0
        offset = x - self.x_L
        if offset < self._FIRST_STEP:
            return self._quad(self.x_L, x)
        k = min(int(math.log2(offset / self._FIRST_STEP)), self._MAX_RUNGS - 1)
        self._ensure_rung(k)
        with self._lock:
            # log2 rounding may land one rung high; step down if so
            while self._rung_x[k] > x:
                k -= 1
            rung_x, rung_r = self._rung_x[k], self._rung_r[k]
        if x == rung_x:
            return rung_r
        return rung_r + self._quad(rung_x, x)

    def inverse(self, r: float) -> float:
        """Solve cumulative(x) = r by ladder bracketing plus Brent's method."""
        r = float(r)
        if r <= 0.0:
            return self.x_L
        if not math.isfinite(r):
            raise DomainError(f"target cumulative hazard must be finite, got {r}")
        k = 0
        while True:
            self._ensure_rung(k)
            with self._lock:
                top = self._rung_r[k]
            if top >= r:
                break
            k += 1
        with self._lock:
            i = bisect.bisect_left(self._rung_r, r)
            lo = self.x_L if i == 0 else self._rung_x[i - 1]
            hi = self._rung_x[i]
        root = brentq(lambda x: self.cumulative(x) - r, lo, hi,
                      xtol=1e-14, rtol=1e-14, maxiter=200)
        return float(root)


class CustomHazard(BaselineModel):
    """Baseline defined by a user-supplied hazard function.

    The cumulative hazard is obtained by adaptive quadrature with a memoized
    knot cache and inverted by bracketed root finding; see
    :class:`HazardIntegrator`.  Hazard values must be nonnegative; negative
    values raise :class:`~bisurv.errors.ModelError`.
    """

    family = "custom"

    def __init__(self, hazard_fn, x_L: float = 0.0):
        self.x_L = float(x_L)
        self._integrator = HazardIntegrator(hazard_fn, self.x_L,
                                            name="custom baseline hazard")

    @classmethod
    def from_table(cls, xs, hazards, x_L: float | None = None) -> "CustomHazard":
        """Piecewise-linear hazard through (x, hazard) pairs, ends held flat."""
        xs = np.asarray(xs, dtype=float)
        hs = np.asarray(hazards, dtype=float)
        if xs.ndim != 1 or xs.shape != hs.shape or xs.size < 2:
            raise ModelError("hazard table needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(xs) <= 0):
            raise ModelError("hazard table x values must be strictly increasing")
        if np.any(~np.isfinite(hs)) or np.any(hs < 0):
            raise ModelError("hazard table values must be finite and nonnegative")
        left = float(xs[0]) if x_L is None else float(x_L)
        return cls(lambda x: np.interp(x, xs, hs), x_L=left)

    @staticmethod
    def _map(fn, x):
        if _is_scalar(x):
            return fn(float(x))
        arr = np.asarray(x, dtype=float)
        return np.array([fn(v) for v in arr.ravel()]).reshape(arr.shape)

    def cumulative_hazard(self, x):
        return self._map(self._integrator.cumulative, x)

    def inverse_cumulative_hazard(self, r):
        return self._map(self._integrator.inverse, r)

    def hazard(self, x):
        return self._map(self._integrator.hazard, x)
