"""Bivariate survival models with a singular component on the diagonal.

Two model classes share one evaluation surface:

* ``GeneralBivariateModel`` -- built from a baseline, two marginal models
  and an exponent ``theta``.  On the wedge ``x1 >= x2`` the survival
  function is ``S1(x1 (-) x2) * S0(x2)**theta`` (symmetric on the other
  wedge), where ``(-)`` is the baseline semigroup difference.  Nothing
  guarantees such a model is a true distribution; the ``validity`` module
  provides the checks, and the counter-examples live there too.

* ``PHBivariateModel`` -- the proportional-hazards subclass parameterized
  by positive ``(theta1, theta2, theta3)``.  Its survival is
  ``S0(x1)**d1 * S0(x2)**(theta-d1)`` for ``x1 >= x2`` with
  ``d_i = theta_i + theta3``; always a valid distribution, with diagonal
  (tie) mass ``theta3 / theta``.

Both decompose into an absolutely continuous part with weight ``alpha`` and
a diagonal singular part with weight ``1 - alpha``, where
``alpha = 2 - (u1 + u2)/theta`` and ``u_i`` is the diagonal limit of
``marginal_i.hazard / baseline.hazard``.

All survival evaluation happens in cumulative-hazard (log-survival)
coordinates; raw survival factors are never multiplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .baseline import BaselineModel, _is_scalar, _ret
from .errors import (
    DecompositionError,
    DomainError,
    InvalidModelError,
    ModelError,
    UndefinedComponentError,
)
from .marginals import MarginalModel, ProportionalHazard, limit_hazard_ratio

__all__ = [
    "Decomposition",
    "GeneralBivariateModel",
    "PHBivariateModel",
    "mixed_survival_difference",
]

#: mixture weights within this distance of {0, 1} are treated as exact
_WEIGHT_EPS = 1e-12

#: relative step for mixed central differences: eps**(1/4)
_FD_STEP = float(np.finfo(float).eps) ** 0.25

#: negative density values no larger than this times the stencil scale are noise
_DENSITY_NOISE = 1e-9


@dataclass(frozen=True)
class Decomposition:
    """Mixture decomposition of a bivariate model.

    ``alpha`` is the weight of the absolutely continuous part, ``u1``/``u2``
    the diagonal hazard-ratio limits, and ``singular_mass = 1 - alpha`` the
    diagonal tie mass.  For an invalid model ``alpha`` may leave [0, 1]; the
    values are still reported so callers can show the violation.
    """

    alpha: float
    u1: float
    u2: float
    singular_mass: float

    @property
    def weight_in_range(self) -> bool:
        return -_WEIGHT_EPS <= self.alpha <= 1.0 + _WEIGHT_EPS


def _validate_theta(theta: float) -> float:
    if not (np.isfinite(theta) and theta > 0):
        raise ModelError(f"theta must be a positive real, got {theta}")
    return float(theta)


def _nan_check(*values) -> None:
    for v in values:
        if np.any(np.isnan(v)):
            raise DomainError(f"coordinates must not be NaN, got {v!r}")


def mixed_survival_difference(survival_fn, x1: float, x2: float, x_L: float):
    """Mixed central second difference of a bivariate survival function.

    Steps are ``eps**(1/4)`` relative per axis, shrunk so the 2x2 stencil
    never straddles the diagonal (where the survival surface has a crease)
    nor the support boundary.  Returns ``(value, scale)`` where ``scale`` is
    the magnitude against which cancellation noise should be judged.
    """
    if x1 == x2:
        raise DomainError("mixed difference undefined on the diagonal")
    if x1 <= x_L or x2 <= x_L:
        raise DomainError("mixed difference requires interior points")
    gap = abs(x1 - x2)
    h1 = min(_FD_STEP * max(1.0, abs(x1)), gap / 4.0, (x1 - x_L) / 2.0)
    h2 = min(_FD_STEP * max(1.0, abs(x2)), gap / 4.0, (x2 - x_L) / 2.0)
    s_pp = survival_fn(x1 + h1, x2 + h2)
    s_pm = survival_fn(x1 + h1, x2 - h2)
    s_mp = survival_fn(x1 - h1, x2 + h2)
    s_mm = survival_fn(x1 - h1, x2 - h2)
    denom = 4.0 * h1 * h2
    value = (s_pp - s_pm - s_mp + s_mm) / denom
    scale = max(abs(s_pp), abs(s_pm), abs(s_mp), abs(s_mm)) / denom
    return value, scale


class _BivariateBase:
    """Evaluation surface shared by the general and PH models."""

    baseline: BaselineModel
    marginal1: MarginalModel
    marginal2: MarginalModel
    theta: float

    def log_survival(self, x1, x2):
        raise NotImplementedError

    def survival(self, x1, x2):
        """Joint survival P(X1 > x1, X2 > x2); accepts scalars or arrays."""
        return _ret(np.exp(self.log_survival(x1, x2)), x1, x2)

    # -- decomposition ---------------------------------------------------------

    def _compute_decomposition(self) -> Decomposition:
        raise NotImplementedError

    def decompose(self) -> Decomposition:
        """Mixture weight and diagonal limits; cached after the first call.

        Raises :class:`~bisurv.errors.DecompositionError` when a diagonal
        hazard-ratio limit diverges.  An out-of-range ``alpha`` is *not* an
        error here; it is reported through the returned value.
        """
        cached = getattr(self, "_decomposition", None)
        if cached is None:
            cached = self._compute_decomposition()
            object.__setattr__(self, "_decomposition", cached)
        return cached

    def singular_survival(self, x):
        """Survival of the diagonal component, ``S0(x)**theta``."""
        dec = self.decompose()
        if dec.singular_mass <= _WEIGHT_EPS:
            raise UndefinedComponentError(
                "model has no singular component (singular mass is zero)"
            )
        xc = np.maximum(x, self.baseline.x_L)
        return _ret(np.exp(-self.theta * np.asarray(
            self.baseline.cumulative_hazard(xc), dtype=float)), x)

    # -- rectangle probabilities ----------------------------------------------

    def rectangle_probability(self, a1: float, b1: float, a2: float, b2: float) -> float:
        """P(a1 < X1 <= b1, a2 < X2 <= b2) by inclusion-exclusion.

        Degenerate rectangles return exactly 0.  Infinite upper corners are
        evaluated with limiting survival values, so the full quadrant gives
        the total mass.  For a valid model the result is nonnegative; this
        method reports whatever the survival function implies.
        """
        _nan_check(a1, b1, a2, b2)
        for v in (a1, a2):
            if v < self.baseline.x_L:
                raise DomainError(f"rectangle corner {v} below left endpoint")
        if b1 < a1 or b2 < a2:
            raise DomainError("rectangle requires a1 <= b1 and a2 <= b2")
        if a1 == b1 or a2 == b2:
            return 0.0
        return (self.survival(a1, a2) - self.survival(b1, a2)
                - self.survival(a1, b2) + self.survival(b1, b2))

    # -- density ---------------------------------------------------------------

    def ac_density(self, x1: float, x2: float) -> float:
        raise NotImplementedError

    def _alpha_for_density(self) -> float:
        dec = self.decompose()
        if dec.alpha <= _WEIGHT_EPS:
            raise UndefinedComponentError(
                "model is purely singular; the absolutely continuous density "
                "is undefined"
            )
        return dec.alpha

    def _screen_density(self, value: float, scale: float, x1: float, x2: float) -> float:
        if value >= 0.0:
            return value
        if abs(value) <= _DENSITY_NOISE * scale:
            return 0.0
        raise InvalidModelError(
            f"absolutely continuous density is negative at ({x1}, {x2})",
            witness=(x1, x2), value=value,
        )


class GeneralBivariateModel(_BivariateBase):
    """Bivariate model assembled from a baseline, two marginals and theta.

    The construction only requires the marginals to share the baseline's
    left endpoint; it does **not** require the result to be a proper
    distribution.  Use the ``validity`` checks before trusting one.
    """

    def __init__(self, baseline: BaselineModel, marginal1: MarginalModel,
                 marginal2: MarginalModel, theta: float):
        self.baseline = baseline
        self.marginal1 = marginal1
        self.marginal2 = marginal2
        self.theta = _validate_theta(theta)
        for i, m in ((1, marginal1), (2, marginal2)):
            if m.x_L != baseline.x_L:
                raise ModelError(
                    f"marginal {i} left endpoint {m.x_L} differs from "
                    f"baseline left endpoint {baseline.x_L}"
                )

    def log_survival(self, x1, x2):
        _nan_check(x1, x2)
        xl = self.baseline.x_L
        if _is_scalar(x1) and _is_scalar(x2):
            if math.isinf(x1) or math.isinf(x2):
                return -math.inf
            lo, hi = (float(x2), float(x1)) if x1 >= x2 else (float(x1), float(x2))
            lo, hi = max(lo, xl), max(hi, xl)
            marg = self.marginal1 if x1 >= x2 else self.marginal2
            d = self.baseline.difference(hi, lo)
            return -(float(marg.cumulative_hazard(d))
                     + self.theta * float(self.baseline.cumulative_hazard(lo)))
        x1a = np.maximum(np.asarray(x1, dtype=float), xl)
        x2a = np.maximum(np.asarray(x2, dtype=float), xl)
        inf_mask = np.isinf(x1a) | np.isinf(x2a)
        x1f = np.where(inf_mask, xl, x1a)
        x2f = np.where(inf_mask, xl, x2a)
        hi = np.maximum(x1f, x2f)
        lo = np.minimum(x1f, x2f)
        d = np.asarray(self.baseline.difference(hi, lo), dtype=float)
        rm = np.where(x1f >= x2f,
                      np.asarray(self.marginal1.cumulative_hazard(d), dtype=float),
                      np.asarray(self.marginal2.cumulative_hazard(d), dtype=float))
        out = -(rm + self.theta * np.asarray(self.baseline.cumulative_hazard(lo),
                                             dtype=float))
        return np.where(inf_mask, -np.inf, out)

    def _compute_decomposition(self) -> Decomposition:
        us = []
        for m in (self.marginal1, self.marginal2):
            if isinstance(m, ProportionalHazard) and m.baseline == self.baseline:
                us.append(m.delta)
            else:
                us.append(limit_hazard_ratio(m, self.baseline))
        u1, u2 = us
        if math.isinf(u1) or math.isinf(u2):
            raise DecompositionError(
                "diagonal hazard-ratio limit diverges; no mixture decomposition",
                samples=[u1, u2],
            )
        alpha = 2.0 - (u1 + u2) / self.theta
        return Decomposition(alpha=alpha, u1=u1, u2=u2, singular_mass=1.0 - alpha)

    def ac_density(self, x1: float, x2: float) -> float:
        """Absolutely continuous density off the diagonal.

        Evaluated as the mixed second difference of the survival function
        divided by the mixture weight.  Negative values beyond stencil noise
        raise :class:`~bisurv.errors.InvalidModelError`.
        """
        if x1 == x2:
            raise DomainError("density undefined on the diagonal")
        alpha = self._alpha_for_density()
        mixed, scale = mixed_survival_difference(
            self.survival, float(x1), float(x2), self.baseline.x_L
        )
        return self._screen_density(mixed / alpha, scale / alpha, x1, x2)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (f"GeneralBivariateModel(baseline={self.baseline!r}, "
                f"marginals=({self.marginal1!r}, {self.marginal2!r}), "
                f"theta={self.theta})")


class PHBivariateModel(_BivariateBase):
    """Proportional-hazards bivariate model with positive (theta1, theta2, theta3).

    Equivalent exponents: ``delta_i = theta_i + theta3`` and
    ``theta = theta1 + theta2 + theta3``, so ``delta_i < theta`` and
    ``theta <= delta1 + delta2 <= 2*theta`` hold by construction.
    """

    def __init__(self, baseline: BaselineModel, theta1: float, theta2: float,
                 theta3: float):
        for name, v in (("theta1", theta1), ("theta2", theta2), ("theta3", theta3)):
            if not (np.isfinite(v) and v > 0):
                raise ModelError(f"{name} must be a positive real, got {v}")
        self.baseline = baseline
        self.theta1 = float(theta1)
        self.theta2 = float(theta2)
        self.theta3 = float(theta3)
        self.theta = self.theta1 + self.theta2 + self.theta3
        self.delta1 = self.theta1 + self.theta3
        self.delta2 = self.theta2 + self.theta3
        self.marginal1 = ProportionalHazard(baseline, self.delta1)
        self.marginal2 = ProportionalHazard(baseline, self.delta2)

    @classmethod
    def from_deltas(cls, baseline: BaselineModel, delta1: float, delta2: float,
                    theta: float) -> "PHBivariateModel":
        """Construct from marginal exponents and the diagonal exponent.

        Requires ``delta_i < theta`` and ``theta < delta1 + delta2 <= 2*theta``
        so that the implied ``(theta1, theta2, theta3)`` are all positive.
        """
        theta = _validate_theta(theta)
        if not (0 < delta1 < theta and 0 < delta2 < theta):
            raise ModelError(
                f"marginal exponents must satisfy 0 < delta_i < theta, "
                f"got delta=({delta1}, {delta2}) with theta={theta}"
            )
        if not (theta < delta1 + delta2 <= 2 * theta):
            raise ModelError(
                f"exponents must satisfy theta < delta1 + delta2 <= 2*theta; "
                f"got delta1 + delta2 = {delta1 + delta2} with theta={theta}"
            )
        return cls(baseline, theta - delta2, theta - delta1, delta1 + delta2 - theta)

    def log_survival(self, x1, x2):
        _nan_check(x1, x2)
        xl = self.baseline.x_L
        r0 = self.baseline.cumulative_hazard
        if _is_scalar(x1) and _is_scalar(x2):
            if math.isinf(x1) or math.isinf(x2):
                return -math.inf
            x1c, x2c = max(float(x1), xl), max(float(x2), xl)
            if x1c >= x2c:
                e1, e2 = self.delta1, self.theta - self.delta1
            else:
                e1, e2 = self.theta - self.delta2, self.delta2
            return -(e1 * float(r0(x1c)) + e2 * float(r0(x2c)))
        x1a = np.maximum(np.asarray(x1, dtype=float), xl)
        x2a = np.maximum(np.asarray(x2, dtype=float), xl)
        inf_mask = np.isinf(x1a) | np.isinf(x2a)
        x1f = np.where(inf_mask, xl, x1a)
        x2f = np.where(inf_mask, xl, x2a)
        upper = x1f >= x2f
        e1 = np.where(upper, self.delta1, self.theta - self.delta2)
        e2 = np.where(upper, self.theta - self.delta1, self.delta2)
        out = -(e1 * np.asarray(r0(x1f), dtype=float)
                + e2 * np.asarray(r0(x2f), dtype=float))
        return np.where(inf_mask, -np.inf, out)

    def _compute_decomposition(self) -> Decomposition:
        alpha = (self.theta1 + self.theta2) / self.theta
        return Decomposition(alpha=alpha, u1=self.delta1, u2=self.delta2,
                             singular_mass=self.theta3 / self.theta)

    def ac_density(self, x1, x2):
        """Closed-form absolutely continuous density off the diagonal.

        On the wedge ``x1 > x2`` this is
        ``K * d1 * (theta - d1) * r0(x1) * r0(x2) * survival(x1, x2)`` with
        ``K = theta / (2*theta - d1 - d2)``; symmetric on the other wedge.
        """
        if np.any(np.asarray(x1) == np.asarray(x2)):
            raise DomainError("density undefined on the diagonal")
        _nan_check(x1, x2)
        k = self.theta / (self.theta1 + self.theta2)
        upper = np.asarray(x1) > np.asarray(x2)
        dw = np.where(upper, self.delta1, self.delta2)
        coeff = k * dw * (self.theta - dw)
        with np.errstate(over="ignore", invalid="ignore"):
            val = (coeff
                   * np.asarray(self.baseline.hazard(x1), dtype=float)
                   * np.asarray(self.baseline.hazard(x2), dtype=float)
                   * np.exp(self.log_survival(x1, x2)))
        return _ret(val, x1, x2)

    def as_general(self) -> GeneralBivariateModel:
        """The same distribution expressed through the general construction."""
        return GeneralBivariateModel(self.baseline, self.marginal1,
                                     self.marginal2, self.theta)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (f"PHBivariateModel(baseline={self.baseline!r}, "
                f"theta=({self.theta1}, {self.theta2}, {self.theta3}))")
