"""Univariate marginal models: survival / density / hazard triples.

Three kinds are provided:

* ``ProportionalHazard`` -- survival is a positive power of a baseline
  survival function, ``S(x) = S0(x)**delta``.
* ``LinearFailureRate`` -- hazard ``1 + 2*a*x`` on ``x > 0``, i.e.
  ``S(x) = exp(-(x + a*x**2))``.
* ``FromHazard`` -- survival reconstructed from an arbitrary hazard
  function by quadrature, ``S(x) = exp(-int_{x_L}^{x} r(u) du)``.

``limit_hazard_ratio`` evaluates the one-sided limit of
``marginal.hazard(y) / baseline.hazard(y)`` as ``y`` approaches the left
endpoint.  This is the diagonal weight that the mixture decomposition of the
bivariate models is built from; both individual hazards may vanish or blow
up at the endpoint, so the limit is taken by sampling at geometrically
shrinking offsets in cumulative-hazard coordinates and accelerating the
resulting sequence.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .baseline import BaselineModel, HazardIntegrator, _is_scalar, _ret
from .errors import DomainError, ModelError, NumericError

__all__ = [
    "MarginalModel",
    "ProportionalHazard",
    "LinearFailureRate",
    "FromHazard",
    "limit_hazard_ratio",
]


class MarginalModel:
    """Base class for univariate marginals with left endpoint ``x_L``."""

    kind: str = "abstract"
    x_L: float = 0.0

    def cumulative_hazard(self, x):
        raise NotImplementedError

    def hazard(self, x):
        raise NotImplementedError

    def hazard_derivative(self, x):
        """Derivative of the hazard, or None when no analytic form exists."""
        return None

    def survival(self, x):
        if not np.all(np.isfinite(x)):
            raise DomainError(f"x must be finite, got {x!r}")
        xc = np.maximum(x, self.x_L)
        return _ret(np.exp(-self.cumulative_hazard(xc)), x)

    def density(self, x):
        if not np.all(np.isfinite(x)):
            raise DomainError(f"x must be finite, got {x!r}")
        interior = np.asarray(x, dtype=float) > self.x_L
        if not np.any(interior):
            return _ret(np.zeros_like(np.asarray(x, dtype=float)), x)
        xi = np.maximum(np.asarray(x, dtype=float), np.nextafter(self.x_L, math.inf))
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            val = np.where(interior,
                           self.hazard(xi) * np.exp(-self.cumulative_hazard(xi)),
                           0.0)
        return _ret(val, x)

    def spec_string(self) -> str:
        return self.kind

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}()"


class ProportionalHazard(MarginalModel):
    """Marginal with survival ``S0(x)**delta`` over a given baseline."""

    kind = "ph"

    def __init__(self, baseline: BaselineModel, delta: float):
        if not (np.isfinite(delta) and delta > 0):
            raise ModelError(f"proportional-hazards exponent must be positive, got {delta}")
        self.baseline = baseline
        self.delta = float(delta)
        self.x_L = baseline.x_L

    def cumulative_hazard(self, x):
        return _ret(self.delta * np.asarray(self.baseline.cumulative_hazard(x)), x)

    def hazard(self, x):
        return _ret(self.delta * np.asarray(self.baseline.hazard(x)), x)

    def hazard_derivative(self, x):
        d = self.baseline.hazard_derivative(x)
        if d is None:
            return None
        return _ret(self.delta * np.asarray(d), x)

    def spec_string(self) -> str:
        return f"ph:{self.delta:g}"


class LinearFailureRate(MarginalModel):
    """Hazard ``1 + 2*a*x`` on ``x > 0``; survival ``exp(-(x + a*x**2))``."""

    kind = "lfr"
    x_L = 0.0

    def __init__(self, a: float):
        if not (np.isfinite(a) and a > 0):
            raise ModelError(f"linear failure rate coefficient must be positive, got {a}")
        self.a = float(a)

    def cumulative_hazard(self, x):
        xc = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _ret(xc + self.a * np.square(xc), x)

    def hazard(self, x):
        return _ret(1.0 + 2.0 * self.a * np.asarray(x, dtype=float), x)

    def hazard_derivative(self, x):
        return _ret(np.full_like(np.asarray(x, dtype=float), 2.0 * self.a), x)

    def spec_string(self) -> str:
        return f"lfr:{self.a:g}"


class FromHazard(MarginalModel):
    """Marginal defined by a hazard function handle.

    The cumulative hazard is integrated adaptively with a memoized knot
    cache.  Negative hazard values raise :class:`~bisurv.errors.ModelError`.
    """

    kind = "from_hazard"

    def __init__(self, hazard_fn, x_L: float = 0.0):
        self.x_L = float(x_L)
        self._integrator = HazardIntegrator(hazard_fn, self.x_L, name="marginal hazard")

    @classmethod
    def from_table(cls, xs, hazards, x_L: float | None = None) -> "FromHazard":
        """Piecewise-linear hazard table, ends held flat beyond the range.

        Warns when the implied density does not decay over the table tail,
        since such a table cannot describe a proper distribution.
        """
        xs = np.asarray(xs, dtype=float)
        hs = np.asarray(hazards, dtype=float)
        if xs.ndim != 1 or xs.shape != hs.shape or xs.size < 2:
            raise ModelError("hazard table needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(xs) <= 0):
            raise ModelError("hazard table x values must be strictly increasing")
        if np.any(~np.isfinite(hs)) or np.any(hs < 0):
            raise ModelError("hazard table values must be finite and nonnegative")
        left = float(xs[0]) if x_L is None else float(x_L)
        model = cls(lambda x: np.interp(x, xs, hs), x_L=left)
        tail = xs[-3:]
        dens = [model.density(float(v)) for v in tail]
        if len(dens) >= 2 and dens[-1] >= dens[0] and dens[-1] > 0:
            warnings.warn(
                "tabulated hazard*survival does not decay over the table tail; "
                "the table may not describe a proper distribution",
                RuntimeWarning,
                stacklevel=2,
            )
        return model

    @staticmethod
    def _map(fn, x):
        if _is_scalar(x):
            return fn(float(x))
        arr = np.asarray(x, dtype=float)
        return np.array([fn(v) for v in arr.ravel()]).reshape(arr.shape)

    def cumulative_hazard(self, x):
        return self._map(self._integrator.cumulative, x)

    def hazard(self, x):
        return self._map(self._integrator.hazard, x)


# ---------------------------------------------------------------------------
# Diagonal hazard-ratio limit
# ---------------------------------------------------------------------------

#: offsets (in cumulative-hazard units) at which the ratio is sampled
_LIMIT_EPS0 = 1e-3
_LIMIT_LEVELS = 10
#: growth beyond which a monotone sequence is declared divergent
_DIVERGENCE_FACTOR = 50.0


def _richardson(seq: np.ndarray) -> np.ndarray:
    """Diagonal of the Richardson tableau for step-halved samples."""
    t = [np.asarray(seq, dtype=float)]
    for j in range(1, len(seq)):
        prev = t[-1]
        fac = 2.0**j
        t.append((fac * prev[1:] - prev[:-1]) / (fac - 1.0))
    return np.array([row[-1] for row in t])


def _aitken(seq: np.ndarray) -> np.ndarray:
    """One Aitken delta-squared pass; exact for geometric error terms."""
    s = np.asarray(seq, dtype=float)
    d1 = s[1:] - s[:-1]
    denom = d1[1:] - d1[:-1]
    out = []
    for k in range(len(denom)):
        if denom[k] == 0.0:
            out.append(s[k + 2])
        else:
            out.append(s[k + 2] - d1[k + 1] ** 2 / denom[k])
    return np.array(out)


def _sequence_limit(samples, *, rtol: float = 1e-7, atol: float = 1e-9,
                    what: str = "sequence") -> float:
    """Limit of a step-halved sample sequence.

    Returns ``math.inf`` when the samples grow without bound (divergence
    flag); raises :class:`~bisurv.errors.NumericError` carrying the samples
    when they oscillate or fail to settle.
    """
    ratios = np.asarray(samples, dtype=float)
    if np.any(np.isnan(ratios)):
        raise NumericError(f"{what} evaluated to NaN", samples=ratios)
    if np.any(np.isinf(ratios)):
        return math.inf

    scale = max(1.0, abs(ratios[0]))
    if np.max(np.abs(ratios - ratios[0])) <= 1e-13 * scale:
        return float(ratios[-1])

    # divergence: monotone tail whose increments do not shrink
    inc = np.diff(ratios)
    tail = inc[-4:]
    if np.all(tail > 0) or np.all(tail < 0):
        mags = np.abs(tail)
        if np.all(mags[1:] >= 0.9 * mags[:-1]) and (
            abs(ratios[-1]) > _DIVERGENCE_FACTOR * scale
            or mags[-1] > scale
        ):
            return math.inf

    def settled(diag: np.ndarray) -> float | None:
        if len(diag) < 2:
            return None
        a, b = diag[-2], diag[-1]
        if np.isfinite(a) and np.isfinite(b) and abs(b - a) <= max(atol, rtol * abs(b)):
            return float(b)
        return None

    val = settled(_richardson(ratios))
    if val is not None:
        return val
    acc = _aitken(ratios)
    val = settled(acc)
    if val is not None:
        return val
    if len(acc) >= 3:
        val = settled(_aitken(acc))
        if val is not None:
            return val
    raise NumericError(f"{what} did not converge", samples=ratios)


def limit_hazard_ratio(marginal: MarginalModel, baseline: BaselineModel, *,
                       eps0: float = _LIMIT_EPS0, levels: int = _LIMIT_LEVELS,
                       rtol: float = 1e-7, atol: float = 1e-9) -> float:
    """Limit of ``marginal.hazard / baseline.hazard`` at the left endpoint.

    Samples the ratio at ``y_k = R0^{-1}(eps0 * 2**-k)`` and accelerates the
    sequence (Richardson tableau with an Aitken fallback).  Returns
    ``math.inf`` when the sequence grows without bound (divergence flag);
    raises :class:`~bisurv.errors.NumericError` carrying the sampled values
    when the sequence oscillates or fails to settle.
    """
    if marginal.x_L != baseline.x_L:
        raise DomainError(
            f"marginal left endpoint {marginal.x_L} differs from baseline {baseline.x_L}"
        )
    eps = eps0 * 0.5 ** np.arange(levels)
    ys = np.asarray(baseline.inverse_cumulative_hazard(eps), dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        num = np.array([float(marginal.hazard(y)) for y in ys])
        den = np.array([float(baseline.hazard(y)) for y in ys])
        ratios = num / den
    return _sequence_limit(ratios, rtol=rtol, atol=atol,
                           what="hazard ratio near the left endpoint")
