"""Grid-based validity diagnostics for bivariate models.

A model built by the general construction need not be a probability
distribution; this module implements every falsifiable condition:

* ``check_marginal_conditions`` -- can these marginals sit inside a valid
  bivariate model?  Condition (i) bounds the mixture weight through the
  diagonal hazard-ratio limits (``theta <= u1 + u2 <= 2*theta``); condition
  (ii) bounds the cross log-derivative of the wedge survival factor by
  ``theta * r0``.  A diagonal-constancy probe guards the limit itself.

* ``check_hazard_rate_conditions`` -- the same question asked of two hazard
  *functions* rather than fitted marginals: a nonnegativity/ratio bound (i),
  a divergence heuristic for the total hazard (ii), nonnegativity of the
  implied joint density (iii), and the mixture-weight bounds (iv).

* ``check_two_increasing`` -- every rectangle spanned by grid knots must
  carry nonnegative probability.

* ``check_functional_equation`` -- residual of the semigroup stability
  identity ``S(x1 (+) t, x2 (+) t) = S(x1, x2) * S(t, t)`` in log space;
  every model built here satisfies it to rounding error, valid or not.

* ``hazard_gradient`` / ``check_hazard_gradient_identity`` /
  ``reconstruct_survival_from_gradient`` -- the closed-form hazard gradient
  off the diagonal, the differential form of the stability identity, and
  survival reconstruction by integrating the gradient along an axis path.

Grid checks falsify; they never prove.  A ``Valid`` verdict means "no
violation found on grid" and the reports say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .baseline import BaselineModel, _is_scalar
from .bivariate import GeneralBivariateModel, PHBivariateModel
from .errors import DomainError, ModelError, NumericError
from .marginals import (
    FromHazard,
    MarginalModel,
    ProportionalHazard,
    _sequence_limit,
    limit_hazard_ratio,
)

__all__ = [
    "GridSpec",
    "ConditionResult",
    "ValidationReport",
    "ResidualReport",
    "check_marginal_conditions",
    "check_hazard_rate_conditions",
    "check_two_increasing",
    "check_functional_equation",
    "check_hazard_gradient_identity",
    "hazard_gradient",
    "reconstruct_survival_from_gradient",
    "combined_validation",
    "lfr_exponential_cross_bound",
]

VALID = "Valid"
INVALID = "Invalid"
INCONCLUSIVE = "Inconclusive"

#: two-increasing rectangles may be this negative before counting as violations
_RECT_TOL = 1e-9

#: cumulative hazard a marginal must reach for the divergence heuristic
_DIVERGENCE_TARGET = 30.0

#: cumulative-hazard levels probed by the divergence heuristic
_DIVERGENCE_PROBES = (8.0, 16.0, 32.0, 64.0, 128.0)

#: relative spread allowed between diagonal-limit anchors
_CONSTANCY_RTOL = 1e-4

_FD_STEP = float(np.finfo(float).eps) ** 0.25


def _ineq_tol(rhs_scale, floor: float = 1e-8) -> np.ndarray:
    """Slack allowed when testing ``lhs <= rhs``: max(floor, 1e-6 * |rhs|)."""
    return np.maximum(floor, 1e-6 * np.abs(rhs_scale))


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid in cumulative-hazard coordinates.

    ``r0_knots`` are the axis knots (log-spaced by default); a pair of knots
    is treated as off-diagonal only when the knots differ by at least
    ``wedge_margin`` (in R0 units).  ``t_r0_knots`` are the shift amounts
    used by the functional-equation and gradient-identity checks.
    """

    r0_knots: tuple[float, ...]
    wedge_margin: float = 0.02
    t_r0_knots: tuple[float, ...] = ()

    def __post_init__(self):
        knots = tuple(float(k) for k in self.r0_knots)
        if len(knots) < 1 or any(k <= 0 for k in knots):
            raise DomainError("grid knots must be positive cumulative-hazard values")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise DomainError("grid knots must be strictly increasing")
        object.__setattr__(self, "r0_knots", knots)
        object.__setattr__(self, "t_r0_knots", tuple(float(t) for t in self.t_r0_knots))

    @classmethod
    def default(cls, *, knots: int = 16, r0_min: float = 0.05, r0_max: float = 8.0,
                wedge_margin: float = 0.02, t_knots: int = 8,
                t_min: float = 0.1, t_max: float = 4.0) -> "GridSpec":
        """Standard grid: log-spaced knots covering bulk and tail.

        Meaningful qualification checks need at least 8 knots per axis; the
        factory enforces that (degenerate grids can still be constructed
        directly, e.g. for vacuous two-increasing checks).
        """
        if knots < 8:
            raise DomainError("default grids need at least 8 knots per axis")
        return cls(
            r0_knots=tuple(np.geomspace(r0_min, r0_max, knots)),
            wedge_margin=wedge_margin,
            t_r0_knots=tuple(np.geomspace(t_min, t_max, t_knots)),
        )

    @property
    def counts(self) -> tuple[int, int]:
        return (len(self.r0_knots), len(self.t_r0_knots))

    def axis_points(self, baseline: BaselineModel) -> np.ndarray:
        return np.asarray(
            baseline.inverse_cumulative_hazard(np.asarray(self.r0_knots)), dtype=float
        )

    def t_points(self, baseline: BaselineModel) -> np.ndarray:
        return np.asarray(
            baseline.inverse_cumulative_hazard(np.asarray(self.t_r0_knots)), dtype=float
        )

    def wedge_pairs(self, baseline: BaselineModel) -> tuple[np.ndarray, np.ndarray]:
        """All ordered knot pairs (hi, lo) clear of the diagonal margin."""
        knots = np.asarray(self.r0_knots)
        xs = self.axis_points(baseline)
        his, los = [], []
        for j in range(len(knots)):
            for k in range(j):
                if knots[j] - knots[k] >= self.wedge_margin:
                    his.append(xs[j])
                    los.append(xs[k])
        return np.asarray(his), np.asarray(los)

    def describe(self) -> dict:
        return {
            "axis_knots_r0": list(self.r0_knots),
            "t_knots_r0": list(self.t_r0_knots),
            "wedge_margin_r0": self.wedge_margin,
            "counts": list(self.counts),
        }


@dataclass
class ConditionResult:
    """Outcome of one checkable condition.

    ``passed`` is True/False for a decided condition and None when the
    condition could not be decided (failed limit, skipped grid, heuristic).
    ``margin`` is the worst signed slack (negative = violated) and
    ``witness`` the point where it occurred.
    """

    cid: str
    label: str
    passed: bool | None
    witness: tuple[float, ...] | None = None
    margin: float | None = None
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "id": self.cid,
            "label": self.label,
            "pass": self.passed,
            "witness": list(self.witness) if self.witness is not None else None,
            "margin": self.margin,
            "note": self.note,
        }


@dataclass
class ValidationReport:
    """Per-condition verdicts with worst witnesses and diagnostics."""

    verdict: str
    conditions: list[ConditionResult]
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "conditions": [c.to_json_dict() for c in self.conditions],
            "diagnostics": self.diagnostics,
        }

    def to_table(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        if self.verdict == VALID:
            lines[0] += "  (no violation found on grid)"
        header = f"{'condition':<34} {'pass':<6} {'margin':>13}  witness"
        lines.append(header)
        lines.append("-" * len(header))
        for c in self.conditions:
            status = {True: "yes", False: "NO", None: "?"}[c.passed]
            margin = f"{c.margin:.6g}" if c.margin is not None else "-"
            witness = ("(" + ", ".join(f"{v:.6g}" for v in c.witness) + ")"
                       if c.witness is not None else "-")
            label = f"{c.cid}: {c.label}"
            lines.append(f"{label:<34} {status:<6} {margin:>13}  {witness}")
            if c.note:
                lines.append(f"{'':<34} {c.note}")
        return "\n".join(lines)


@dataclass
class ResidualReport:
    """Maximum residual of an identity over a grid."""

    max_residual: float
    witness: tuple[float, ...]
    n_points: int
    relative: bool

    def to_json_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "witness": list(self.witness),
            "n_points": self.n_points,
            "relative": self.relative,
        }


def _combine_verdict(conditions: list[ConditionResult]) -> str:
    if any(c.passed is False for c in conditions):
        return INVALID
    if any(c.passed is None for c in conditions):
        return INCONCLUSIVE
    return VALID


# ---------------------------------------------------------------------------
# Diagonal limits and their constancy along the diagonal
# ---------------------------------------------------------------------------


def _diagonal_limit(marginal: MarginalModel, baseline: BaselineModel) -> float:
    if isinstance(marginal, ProportionalHazard) and marginal.baseline == baseline:
        return marginal.delta
    return limit_hazard_ratio(marginal, baseline)


def _anchored_limit(marginal: MarginalModel, baseline: BaselineModel,
                    anchor: float, levels: int = 8) -> float:
    """Diagonal limit approached from a specific diagonal point.

    Offsets are taken in raw coordinates so the pre-limit samples genuinely
    depend on the anchor for non-exponential baselines; all anchors must
    agree for the decomposition to be meaningful.
    """
    h0 = 0.05 * max(1.0, abs(anchor))
    samples = []
    with np.errstate(divide="ignore", over="ignore"):
        for j in range(levels):
            h = h0 * 0.5**j
            d = baseline.difference(anchor + h, anchor)
            samples.append(float(marginal.density(d)) / float(baseline.hazard(d)))
    return _sequence_limit(samples, what=f"diagonal limit anchored at {anchor:g}")


def _constancy_condition(model, grid: GridSpec, us: list[float | None]) -> ConditionResult:
    cid, label = "u-constancy", "diagonal-limit constancy"
    if any(u is None or math.isinf(u) for u in us):
        return ConditionResult(cid, label, None,
                               note="skipped: diagonal limits unavailable")
    anchors = grid.axis_points(model.baseline)
    worst = 0.0
    worst_anchor = None
    for idx, (marg, u) in enumerate(((model.marginal1, us[0]),
                                     (model.marginal2, us[1])), start=1):
        if isinstance(marg, ProportionalHazard) and marg.baseline == model.baseline:
            continue  # ratio is constant by construction
        scale = max(abs(u), 1e-12)
        for a in anchors:
            try:
                val = _anchored_limit(marg, model.baseline, float(a))
            except NumericError:
                return ConditionResult(
                    cid, label, None, witness=(float(a), float(a)),
                    note=f"anchored limit for marginal {idx} did not converge",
                )
            dev = abs(val - u) / scale
            if dev > worst:
                worst, worst_anchor = dev, (float(a), float(a))
    if worst > _CONSTANCY_RTOL:
        return ConditionResult(
            cid, label, None, witness=worst_anchor, margin=_CONSTANCY_RTOL - worst,
            note=f"diagonal limits vary across anchors (relative spread {worst:.3g})",
        )
    return ConditionResult(cid, label, True, margin=_CONSTANCY_RTOL - worst)


def _weight_bounds_condition(cid: str, theta: float, us: list[float | None],
                             names=("u1", "u2"),
                             floor: float = 1e-8) -> ConditionResult:
    label = "mixture-weight-bounds"
    if any(u is None for u in us):
        return ConditionResult(cid, label, None,
                               note="diagonal hazard-ratio limit did not converge")
    total = sum(us)
    if math.isinf(total):
        return ConditionResult(cid, label, False, margin=-math.inf,
                               note=f"{names[0]}+{names[1]} diverges")
    margin = min(total - theta, 2.0 * theta - total)
    tol = float(_ineq_tol(2.0 * theta, floor))
    note = f"{names[0]}+{names[1]} = {total:.12g}, bounds [{theta:.12g}, {2 * theta:.12g}]"
    return ConditionResult(cid, label, bool(margin >= -tol), margin=float(margin),
                           note=note)


# ---------------------------------------------------------------------------
# Condition (ii): cross log-derivative bound for marginal models
# ---------------------------------------------------------------------------


def _cross_log_derivative(marg: MarginalModel, base: BaselineModel,
                          hi: np.ndarray, lo: np.ndarray):
    """d/d(lo) of ln(-d/d(hi) S_marg(hi (-) lo)), vectorized when analytic.

    Returns an array aligned with (hi, lo), with NaN for points that had to
    be skipped (finite-difference stencil leaving the domain).
    """
    d = np.asarray(base.difference(hi, lo), dtype=float)
    r0_lo = np.asarray(base.hazard(lo), dtype=float)
    if isinstance(marg, ProportionalHazard) and marg.baseline == base:
        return marg.delta * r0_lo
    r0_d = np.asarray(base.hazard(d), dtype=float)
    rd = np.asarray(marg.hazard(d), dtype=float)
    rdp = marg.hazard_derivative(d)
    r0dp = base.hazard_derivative(d)
    if rdp is not None and r0dp is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (r0_lo / r0_d) * (
                rd - np.asarray(rdp, dtype=float) / rd
                + np.asarray(r0dp, dtype=float) / r0_d
            )

    # finite-difference fallback on ln( f(d) * r0(hi) / r0(d) ) in lo
    def ln_g(hi_v: float, lo_v: float) -> float:
        dv = base.difference(hi_v, lo_v)
        fd = float(marg.density(dv))
        if fd <= 0.0:
            return math.nan
        return math.log(fd) + math.log(float(base.hazard(hi_v))) \
            - math.log(float(base.hazard(dv)))

    out = np.full_like(np.asarray(hi, dtype=float), math.nan)
    for i, (hv, lv) in enumerate(zip(np.atleast_1d(hi), np.atleast_1d(lo))):
        h = min(_FD_STEP * max(1.0, abs(lv)), (hv - lv) / 4.0, (lv - base.x_L) / 2.0)
        if h <= 0.0:
            continue
        gp, gm = ln_g(hv, lv + h), ln_g(hv, lv - h)
        if math.isnan(gp) or math.isnan(gm):
            continue
        out[i] = (gp - gm) / (2.0 * h)
    return out


def _grid_bound_condition(cid: str, label: str, lhs_by_marg, rhs, witnesses,
                          *, lower_zero: bool = False,
                          floor: float = 1e-8) -> ConditionResult:
    """Check ``lhs <= rhs`` (optionally also ``lhs >= 0``) over grid points."""
    worst = math.inf
    worst_witness = None
    decided = 0
    skipped = 0
    passed = True
    for lhs, wit in zip(lhs_by_marg, witnesses):
        lhs = np.asarray(lhs, dtype=float)
        ok = np.isfinite(lhs)
        skipped += int(np.sum(~ok))
        if not np.any(ok):
            continue
        decided += int(np.sum(ok))
        margin = rhs[ok] - lhs[ok]
        if lower_zero:
            margin = np.minimum(margin, lhs[ok])
        tol = _ineq_tol(rhs[ok], floor)
        bad = margin < -tol
        if np.any(bad):
            passed = False
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst = float(margin[i])
            pts = (wit[0][ok], wit[1][ok])
            worst_witness = (float(pts[0][i]), float(pts[1][i]))
    if decided == 0:
        return ConditionResult(cid, label, None,
                               note=f"all {skipped} grid points skipped")
    note = f"{decided} grid points" + (f", {skipped} skipped" if skipped else "")
    return ConditionResult(cid, label, passed, witness=worst_witness,
                           margin=worst, note=note)


def check_marginal_conditions(model: GeneralBivariateModel | PHBivariateModel,
                              grid: GridSpec | None = None,
                              tol: float | None = None) -> ValidationReport:
    """Do the model's marginals qualify for a valid bivariate distribution?

    Condition (i): ``theta <= u1 + u2 <= 2*theta`` for the diagonal
    hazard-ratio limits.  Condition (ii): at every off-diagonal grid point
    the cross log-derivative of the wedge survival factor must not exceed
    ``theta * r0``.  The diagonal limits are additionally probed at several
    anchors; disagreement makes the report Inconclusive.
    """
    grid = grid or GridSpec.default()
    floor = 1e-8 if tol is None else float(tol)
    base = model.baseline
    theta = model.theta

    us: list[float | None] = []
    limit_notes = []
    for m in (model.marginal1, model.marginal2):
        try:
            us.append(_diagonal_limit(m, base))
        except NumericError as exc:
            us.append(None)
            limit_notes.append(str(exc))

    cond_i = _weight_bounds_condition("i", theta, us, floor=floor)
    if limit_notes:
        cond_i.note = "; ".join(limit_notes)

    hi, lo = grid.wedge_pairs(base)
    rhs = theta * np.asarray(base.hazard(lo), dtype=float)
    lhs1 = _cross_log_derivative(model.marginal1, base, hi, lo)
    lhs2 = _cross_log_derivative(model.marginal2, base, hi, lo)
    cond_ii = _grid_bound_condition(
        "ii", "cross-derivative-bound",
        [lhs1, lhs2], rhs, [(hi, lo), (lo, hi)], floor=floor,
    )

    cond_const = _constancy_condition(model, grid, us)

    conditions = [cond_i, cond_ii, cond_const]
    alpha = None
    if all(u is not None and math.isfinite(u) for u in us):
        alpha = 2.0 - (us[0] + us[1]) / theta
    diagnostics = {
        "u1": us[0], "u2": us[1], "alpha": alpha, "theta": theta,
        "grid": grid.describe(),
        "tolerance": f"lhs <= rhs + max({floor:g}, 1e-6*|rhs|)",
    }
    return ValidationReport(_combine_verdict(conditions), conditions, diagnostics)


# ---------------------------------------------------------------------------
# Hazard-rate qualification (conditions on hazard function handles)
# ---------------------------------------------------------------------------


def _as_marginal(handle, baseline: BaselineModel) -> MarginalModel:
    if isinstance(handle, MarginalModel):
        if handle.x_L != baseline.x_L:
            raise ModelError("hazard handle left endpoint differs from baseline")
        return handle
    if callable(handle):
        return FromHazard(handle, x_L=baseline.x_L)
    raise ModelError(f"expected a MarginalModel or callable hazard, got {handle!r}")


def _gradient_amplitude(marg: MarginalModel, base: BaselineModel,
                        hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """r_i(d) * r0(hi) / r0(d) -- the off-diagonal gradient component."""
    d = np.asarray(base.difference(hi, lo), dtype=float)
    if isinstance(marg, ProportionalHazard) and marg.baseline == base:
        return marg.delta * np.asarray(base.hazard(hi), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (np.asarray(marg.hazard(d), dtype=float)
                * np.asarray(base.hazard(hi), dtype=float)
                / np.asarray(base.hazard(d), dtype=float))


def _density_sign_terms(marg: MarginalModel, base: BaselineModel,
                        hi: np.ndarray, lo: np.ndarray):
    """LHS of the joint-density nonnegativity condition, plus its scale."""
    d = np.asarray(base.difference(hi, lo), dtype=float)
    r0_hi = np.asarray(base.hazard(hi), dtype=float)
    r0_lo = np.asarray(base.hazard(lo), dtype=float)
    r0_d = np.asarray(base.hazard(d), dtype=float)
    rd = np.asarray(marg.hazard(d), dtype=float)

    if isinstance(marg, ProportionalHazard) and marg.baseline == base:
        g = marg.delta * r0_hi
        dg = np.zeros_like(g)
        return g, -marg.delta * r0_lo, dg

    with np.errstate(divide="ignore", invalid="ignore"):
        g = rd * r0_hi / r0_d
        ddx_lo = -rd * r0_lo / r0_d  # r_i(d) * d d/d(lo)
    rdp = marg.hazard_derivative(d)
    r0dp = base.hazard_derivative(d)
    if rdp is not None and r0dp is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            dg = -(r0_hi * r0_lo
                   * (np.asarray(rdp, dtype=float) * r0_d
                      - rd * np.asarray(r0dp, dtype=float))
                   / r0_d**3)
        return g, ddx_lo, dg

    dg = np.full_like(g, math.nan)
    for i, (hv, lv) in enumerate(zip(np.atleast_1d(hi), np.atleast_1d(lo))):
        h = min(_FD_STEP * max(1.0, abs(lv)), (hv - lv) / 4.0, (lv - base.x_L) / 2.0)
        if h <= 0.0:
            continue
        gp = _gradient_amplitude(marg, base, np.asarray([hv]), np.asarray([lv + h]))[0]
        gm = _gradient_amplitude(marg, base, np.asarray([hv]), np.asarray([lv - h]))[0]
        if math.isfinite(gp) and math.isfinite(gm):
            dg[i] = (gp - gm) / (2.0 * h)
    return g, ddx_lo, dg


def check_hazard_rate_conditions(r1, r2, baseline: BaselineModel, theta: float,
                                 grid: GridSpec | None = None,
                                 tol: float | None = None) -> ValidationReport:
    """Do two hazard functions qualify as marginal hazards of a valid model?

    ``r1``/``r2`` may be callables or :class:`MarginalModel` instances.
    Condition (ii) (total hazard diverges) is decided by an explicit
    heuristic -- cumulative hazard exceeding 30 with monotone growth over
    probe points far in the tail -- and is reported as such; a hazard that
    decays too fast yields Inconclusive, never Valid.
    """
    if not (np.isfinite(theta) and theta > 0):
        raise ModelError(f"theta must be positive, got {theta}")
    grid = grid or GridSpec.default()
    floor = 1e-8 if tol is None else float(tol)
    margs = [_as_marginal(r1, baseline), _as_marginal(r2, baseline)]
    hi, lo = grid.wedge_pairs(baseline)
    r0_lo = np.asarray(baseline.hazard(lo), dtype=float)
    rhs = theta * r0_lo

    # (i) 0 <= r_i(d) * r0(lo)/r0(d) <= theta * r0(lo)
    d = np.asarray(baseline.difference(hi, lo), dtype=float)
    lhs = []
    for m in margs:
        if isinstance(m, ProportionalHazard) and m.baseline == baseline:
            lhs.append(m.delta * r0_lo)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                lhs.append(np.asarray(m.hazard(d), dtype=float) * r0_lo
                           / np.asarray(baseline.hazard(d), dtype=float))
    cond_i = _grid_bound_condition("i", "gradient-nonnegativity-bound",
                                   lhs, rhs, [(hi, lo), (lo, hi)],
                                   lower_zero=True, floor=floor)

    # (ii) divergence heuristic
    probes = np.asarray(baseline.inverse_cumulative_hazard(
        np.asarray(_DIVERGENCE_PROBES)), dtype=float)
    cond_ii_pass: bool | None = True
    worst_tail = math.inf
    for m in margs:
        ri = np.asarray([float(m.cumulative_hazard(x)) for x in probes])
        growing = bool(np.all(np.diff(ri) > 0))
        worst_tail = min(worst_tail, float(ri[-1]))
        if not (growing and ri[-1] > _DIVERGENCE_TARGET):
            cond_ii_pass = None
    cond_ii = ConditionResult(
        "ii", "total-hazard-divergence", cond_ii_pass,
        margin=worst_tail - _DIVERGENCE_TARGET,
        note=("heuristic: cumulative hazard %.4g at the farthest probe, "
              "target > %g with monotone growth; divergence cannot be proven "
              "from finite samples" % (worst_tail, _DIVERGENCE_TARGET)),
    )

    # (iii) implied joint density nonnegative:
    #       G * (theta*r0(lo) + r_i(d) dd/dlo) - dG/dlo >= 0
    terms = []
    for m in margs:
        g, ddx_lo, dg = _density_sign_terms(m, baseline, hi, lo)
        with np.errstate(invalid="ignore", over="ignore"):
            value = g * (rhs + ddx_lo) - dg
        # margins are normalized by the term scale so one tolerance fits all
        scale = np.abs(g * rhs) + np.abs(dg) + 1.0
        terms.append(np.where(np.isfinite(value), value / scale, math.nan))
    zeros = np.zeros_like(rhs)
    cond_iii = _grid_bound_condition("iii", "density-nonnegativity",
                                     [-t for t in terms], zeros,
                                     [(hi, lo), (lo, hi)], floor=floor)

    # (iv) mixture-weight bounds on the diagonal limits
    vs: list[float | None] = []
    notes = []
    for m in margs:
        try:
            vs.append(_diagonal_limit(m, baseline))
        except NumericError as exc:
            vs.append(None)
            notes.append(str(exc))
    cond_iv = _weight_bounds_condition("iv", theta, vs, names=("v1", "v2"),
                                       floor=floor)
    if notes:
        cond_iv.note = "; ".join(notes)

    conditions = [cond_i, cond_ii, cond_iii, cond_iv]
    diagnostics = {
        "v1": vs[0], "v2": vs[1], "theta": theta,
        "alpha": (2.0 - (vs[0] + vs[1]) / theta
                  if all(v is not None and math.isfinite(v) for v in vs) else None),
        "grid": grid.describe(),
        "divergence_heuristic": f"cumulative hazard > {_DIVERGENCE_TARGET} at "
                                f"R0 probes {list(_DIVERGENCE_PROBES)}",
    }
    return ValidationReport(_combine_verdict(conditions), conditions, diagnostics)


def lfr_exponential_cross_bound(a: float, x_hi: float, x_lo: float) -> float:
    """Reduced cross-derivative statistic for LFR marginals over the
    exponential baseline: ``2*a*d - 1/d + 1`` with ``d = x_hi - x_lo``.

    Lies below the exact cross-derivative by ``1/(d*(1+2*a*d))``, so any
    value exceeding ``theta`` certifies that the exact bound fails too.
    Used by the built-in counterexample reproduction.
    """
    d = float(x_hi) - float(x_lo)
    if d <= 0:
        raise DomainError("requires x_hi > x_lo")
    return 2.0 * a * d - 1.0 / d + 1.0


# ---------------------------------------------------------------------------
# Two-increasing rectangle check
# ---------------------------------------------------------------------------


def check_two_increasing(model, grid: GridSpec | None = None,
                         tol: float | None = None) -> ValidationReport:
    """Every rectangle spanned by grid knots carries probability >= -1e-9.

    Scans all knot pairs per axis and reports the most negative rectangle,
    breaking ties by lexicographic point order.
    """
    grid = grid or GridSpec.default()
    rect_tol = _RECT_TOL if tol is None else float(tol)
    xs = grid.axis_points(model.baseline)
    n = len(xs)
    if n < 2:
        cond = ConditionResult("two-increasing", "rectangle-nonnegativity", True,
                               note="degenerate grid; vacuously satisfied")
        return ValidationReport(VALID, [cond], {"grid": grid.describe()})
    s = np.asarray(model.survival(xs[:, None], xs[None, :]), dtype=float)
    # P[i,j,k,l] = P(xs[i] < X1 <= xs[j], xs[k] < X2 <= xs[l])
    p = (s[:, None, :, None] - s[None, :, :, None]
         - s[:, None, None, :] + s[None, :, None, :])
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    upper = ii < jj
    mask = upper[:, :, None, None] & upper[None, None, :, :]
    p_masked = np.where(mask, p, np.inf)
    flat = int(np.argmin(p_masked))
    i, j, k, l = np.unravel_index(flat, p_masked.shape)
    worst = float(p_masked[i, j, k, l])
    rect = (float(xs[i]), float(xs[j]), float(xs[k]), float(xs[l]))
    passed = worst >= -rect_tol
    cond = ConditionResult(
        "two-increasing", "rectangle-nonnegativity", bool(passed),
        witness=(rect[0], rect[2]), margin=worst,
        note=(f"most negative rectangle ({rect[0]:.6g}, {rect[1]:.6g}) x "
              f"({rect[2]:.6g}, {rect[3]:.6g}) has probability {worst:.6g}"),
    )
    diagnostics = {"grid": grid.describe(), "min_rectangle_probability": worst,
                   "rectangle": list(rect), "tolerance": rect_tol}
    return ValidationReport(VALID if passed else INVALID, [cond], diagnostics)


# ---------------------------------------------------------------------------
# Functional-equation residual
# ---------------------------------------------------------------------------


def check_functional_equation(model, grid: GridSpec | None = None,
                              t_knots=None) -> ResidualReport:
    """Max log-space residual of S(x1 (+) t, x2 (+) t) = S(x1,x2) * S(t,t).

    Any model built from the wedge construction satisfies this identically;
    the residual measures only arithmetic error, whether or not the model is
    a valid distribution.  ``t_knots`` takes explicit shift points in raw
    coordinates; by default the grid's shift knots are used.
    """
    grid = grid or GridSpec.default()
    base = model.baseline
    xs = grid.axis_points(base)
    ts = (np.asarray(t_knots, dtype=float) if t_knots is not None
          else grid.t_points(base))
    x1 = np.repeat(xs, len(xs))
    x2 = np.tile(xs, len(xs))
    log_s = np.asarray(model.log_survival(x1, x2), dtype=float)
    worst = -1.0
    witness = (float(x1[0]), float(x2[0]), float(ts[0]) if len(ts) else base.x_L)
    total = 0
    for t in ts:
        t = float(t)
        y1 = np.asarray(base.combine(x1, t), dtype=float)
        y2 = np.asarray(base.combine(x2, t), dtype=float)
        shift = model.theta * float(base.cumulative_hazard(t))
        res = np.abs(np.asarray(model.log_survival(y1, y2), dtype=float)
                     - log_s + shift)
        total += res.size
        i = int(np.argmax(res))
        if res[i] > worst:
            worst = float(res[i])
            witness = (float(x1[i]), float(x2[i]), t)
    return ResidualReport(max_residual=max(worst, 0.0), witness=witness,
                          n_points=total, relative=False)


# ---------------------------------------------------------------------------
# Hazard gradient, its identity, and survival reconstruction
# ---------------------------------------------------------------------------


def _gradient_components(model, x1, x2):
    base = model.baseline
    theta = model.theta
    x1a = np.asarray(x1, dtype=float)
    x2a = np.asarray(x2, dtype=float)
    hi = np.maximum(x1a, x2a)
    lo = np.minimum(x1a, x2a)
    d = np.asarray(base.difference(hi, lo), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r0_1 = np.asarray(base.hazard(x1a), dtype=float)
        r0_2 = np.asarray(base.hazard(x2a), dtype=float)
        r0_d = np.asarray(base.hazard(d), dtype=float)
        h1 = np.asarray(model.marginal1.hazard(d), dtype=float)
        h2 = np.asarray(model.marginal2.hazard(d), dtype=float)
        upper = x1a > x2a
        g1 = np.where(upper, h1 * r0_1 / r0_d, theta * r0_1 - h2 * r0_1 / r0_d)
        g2 = np.where(upper, theta * r0_2 - h1 * r0_2 / r0_d, h2 * r0_2 / r0_d)
    return g1, g2


def hazard_gradient(model, x1, x2):
    """Closed-form hazard gradient (-d ln S/dx1, -d ln S/dx2) off the diagonal.

    For the larger coordinate the component is
    ``r_i(d) * r0(x_i)/r0(d)`` with ``d`` the wedge difference; for the
    smaller it is ``theta * r0(x_i) - r_other(d) * r0(x_i)/r0(d)``.  Raises
    on diagonal input, where the singular mass makes the gradient undefined.
    """
    if np.any(np.asarray(x1) == np.asarray(x2)):
        raise DomainError("hazard gradient undefined on the diagonal")
    for v in (x1, x2):
        if np.any(~np.isfinite(v)) or np.any(np.asarray(v) < model.baseline.x_L):
            raise DomainError(f"coordinates must be finite and >= {model.baseline.x_L}")
    g1, g2 = _gradient_components(model, x1, x2)
    if _is_scalar(x1) and _is_scalar(x2):
        return float(g1), float(g2)
    return g1, g2


def check_hazard_gradient_identity(model, grid: GridSpec | None = None,
                                   t_knots=None) -> ResidualReport:
    """Differential form of the stability identity, relative residual.

    Checks ``sum_i grad_i(x1 (+) t, x2 (+) t) * r0(t)/r0(x_i (+) t)`` against
    ``theta * r0(t)`` over off-diagonal grid pairs and shift knots.
    """
    grid = grid or GridSpec.default()
    base = model.baseline
    hi, lo = grid.wedge_pairs(base)
    x1 = np.concatenate([hi, lo])
    x2 = np.concatenate([lo, hi])
    ts = (np.asarray(t_knots, dtype=float) if t_knots is not None
          else grid.t_points(base))
    worst = -1.0
    witness = (float(x1[0]), float(x2[0]), float(ts[0]) if len(ts) else base.x_L)
    total = 0
    theta = model.theta
    for t in ts:
        t = float(t)
        y1 = np.asarray(base.combine(x1, t), dtype=float)
        y2 = np.asarray(base.combine(x2, t), dtype=float)
        g1, g2 = _gradient_components(model, y1, y2)
        r0t = float(base.hazard(t))
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs = (g1 * r0t / np.asarray(base.hazard(y1), dtype=float)
                   + g2 * r0t / np.asarray(base.hazard(y2), dtype=float))
        res = np.abs(lhs - theta * r0t) / (theta * r0t)
        total += res.size
        i = int(np.argmax(res))
        if res[i] > worst:
            worst = float(res[i])
            witness = (float(x1[i]), float(x2[i]), t)
    return ResidualReport(max_residual=max(worst, 0.0), witness=witness,
                          n_points=total, relative=True)


def reconstruct_survival_from_gradient(model, x1: float, x2: float,
                                       *, epsabs: float = 1e-10,
                                       epsrel: float = 1e-10) -> float:
    """Survival recovered by integrating the hazard gradient along axes.

    Integrates the first component along (u, x_L) for u in [x_L, x1], then
    the second along (x1, u) for u in [x_L, x2], splitting at the diagonal
    crossing where the gradient jumps.  Must agree with the direct survival
    for any model of this class.
    """
    base = model.baseline
    xl = base.x_L
    x1, x2 = float(x1), float(x2)
    if not (math.isfinite(x1) and math.isfinite(x2)) or x1 < xl or x2 < xl:
        raise DomainError(f"coordinates must be finite and >= {xl}")
    total = 0.0
    err_budget = 0.0

    def add_piece(fn, a: float, b: float) -> None:
        nonlocal total, err_budget
        if b <= a:
            return
        val, err = quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=200)
        total += val
        err_budget += err

    add_piece(lambda u: _gradient_components(model, u, xl)[0], xl, x1)
    mid = min(x1, x2)
    add_piece(lambda u: _gradient_components(model, x1, u)[1], xl, mid)
    if x2 > x1:
        add_piece(lambda u: _gradient_components(model, x1, u)[1], x1, x2)
    if err_budget > 1e-6 * max(1.0, abs(total)):
        raise NumericError(
            f"gradient path quadrature error {err_budget:.3g} too large",
            samples=[total, err_budget],
        )
    return math.exp(-total)


# ---------------------------------------------------------------------------
# Merged report for the CLI
# ---------------------------------------------------------------------------


def combined_validation(model, grid: GridSpec | None = None,
                        tol: float | None = None) -> ValidationReport:
    """All checks on one model, merged into a single report.

    Runs the marginal conditions, the hazard-rate conditions on the model's
    own marginal hazards, and the two-increasing grid scan; condition ids
    are prefixed by the check they came from.
    """
    grid = grid or GridSpec.default()
    reports = [
        ("marginal", check_marginal_conditions(model, grid, tol)),
        ("hazard", check_hazard_rate_conditions(model.marginal1, model.marginal2,
                                                model.baseline, model.theta,
                                                grid, tol)),
        ("", check_two_increasing(model, grid, tol)),
    ]
    conditions: list[ConditionResult] = []
    diagnostics: dict = {"grid": grid.describe()}
    for prefix, rep in reports:
        for c in rep.conditions:
            cid = f"{prefix}-{c.cid}" if prefix else c.cid
            conditions.append(ConditionResult(cid, c.label, c.passed,
                                              c.witness, c.margin, c.note))
        for key in ("u1", "u2", "v1", "v2", "alpha", "min_rectangle_probability"):
            if key in rep.diagnostics and rep.diagnostics[key] is not None:
                diagnostics.setdefault(key, rep.diagnostics[key])
    return ValidationReport(_combine_verdict(conditions), conditions, diagnostics)
