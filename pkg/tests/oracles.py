"""Independent numerical oracles used by the tests.

These deliberately avoid the library's own differentiation/quadrature paths
so that agreement between an oracle and an implementation is evidence, not
tautology.
"""

import math

import numpy as np
from scipy.integrate import dblquad


def mixed_fd(survival_fn, x1: float, x2: float, rel_step: float = 1e-4):
    """Mixed second difference of a bivariate function, plain central stencil.

    The step is shrunk to stay inside one wedge; callers must pass
    off-diagonal points.
    """
    gap = abs(x1 - x2)
    h1 = min(rel_step * max(1.0, abs(x1)), gap / 4.0, x1 / 2.0 if x1 > 0 else gap)
    h2 = min(rel_step * max(1.0, abs(x2)), gap / 4.0, x2 / 2.0 if x2 > 0 else gap)
    return (survival_fn(x1 + h1, x2 + h2) - survival_fn(x1 + h1, x2 - h2)
            - survival_fn(x1 - h1, x2 + h2) + survival_fn(x1 - h1, x2 - h2)) \
        / (4.0 * h1 * h2)


def fd_log_gradient(survival_fn, x1: float, x2: float, rel_step: float = 1e-6):
    """Central-difference estimate of (-d ln S/dx1, -d ln S/dx2)."""
    out = []
    for axis, x in ((0, x1), (1, x2)):
        h = min(rel_step * max(1.0, abs(x)), abs(x1 - x2) / 4.0)
        if axis == 0:
            sp, sm = survival_fn(x1 + h, x2), survival_fn(x1 - h, x2)
        else:
            sp, sm = survival_fn(x1, x2 + h), survival_fn(x1, x2 - h)
        out.append(-(math.log(sp) - math.log(sm)) / (2.0 * h))
    return tuple(out)


def trapezoid_cumulative_hazard(hazard_fn, x_L: float, x: float, n: int = 200001):
    """Dense-trapezoid integral of a hazard, independent of adaptive quad."""
    if x <= x_L:
        return 0.0
    grid = np.linspace(x_L, x, n)
    return float(np.trapezoid([hazard_fn(g) for g in grid], grid))


def wedge_ac_mass(model, upper: bool, epsabs: float = 1e-9) -> float:
    """alpha * integral of the AC density over one wedge, by 2-D quadrature.

    Transforms to ``w = R0(min)``, ``s = R0(max) - R0(min)`` and compactifies
    both to (0, 1); the integrand calls the model's ``ac_density`` so this
    verifies the closed-form mass identities rather than re-deriving them.
    """
    base = model.baseline
    alpha = model.decompose().alpha

    def integrand(v, u):
        if u <= 0.0 or v <= 0.0 or u >= 1.0 or v >= 1.0:
            return 0.0
        w = u / (1.0 - u)
        s = v / (1.0 - v)
        lo = float(base.inverse_cumulative_hazard(w))
        hi = float(base.inverse_cumulative_hazard(w + s))
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            return 0.0
        x1, x2 = (hi, lo) if upper else (lo, hi)
        fa = model.ac_density(x1, x2)
        if fa == 0.0:
            return 0.0
        r1 = float(base.hazard(x1))
        r2 = float(base.hazard(x2))
        if not (math.isfinite(r1) and math.isfinite(r2)) or r1 <= 0 or r2 <= 0:
            return 0.0
        val = alpha * fa / (r1 * r2) / ((1.0 - u) ** 2 * (1.0 - v) ** 2)
        return val if math.isfinite(val) else 0.0

    mass, _ = dblquad(integrand, 0.0, 1.0, 0.0, 1.0,
                      epsabs=epsabs, epsrel=epsabs)
    return mass
