"""Two-parameter summary (mu*, gamma) of a symmetric trade-off curve.

mu* is the parameter of the Gaussian curve sharing the input's fixed point
with the diagonal, gamma is the area under the curve.  The two numbers induce
a partial privacy order: strictly smaller mu* together with strictly larger
gamma means strictly more private.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.special import ndtri

from .curves import (PrivacyParams, TradeoffCurve, area_under_curve,
                     curve_inverse, fixed_point)
from .errors import AsymmetricCurveError

_SYMMETRY_CELLS = 3.0
_COMPARE_TOL = 1e-12


class Ordering(enum.Enum):
    MORE_PRIVATE = "more_private"
    LESS_PRIVATE = "less_private"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def interpret(f: TradeoffCurve) -> PrivacyParams:
    """(mu*, gamma) of a symmetric curve; raises on asymmetric input.

    mu* = Phi^{-1}(1 - alpha*) - Phi^{-1}(alpha*) at the fixed point alpha*,
    gamma is the trapezoidal area.  Symmetrize asymmetric curves first.
    """
    tol = _SYMMETRY_CELLS * f.grid_spacing
    inv = curve_inverse(f)
    gap = float(np.max(np.abs(f.betas - inv.betas)))
    if gap > tol:
        raise AsymmetricCurveError(
            f"curve differs from its inverse by {gap:.3g} (> {tol:.3g}); "
            "symmetrize it before interpreting")
    alpha_star = fixed_point(f)
    mu_star = float(ndtri(1.0 - alpha_star) - ndtri(alpha_star))
    return PrivacyParams(mu_star=max(mu_star, 0.0), gamma=area_under_curve(f))


def compare(a: PrivacyParams, b: PrivacyParams) -> Ordering:
    """Position of b relative to a in the (mu*, gamma) partial order."""
    if (abs(a.mu_star - b.mu_star) <= _COMPARE_TOL
            and abs(a.gamma - b.gamma) <= _COMPARE_TOL):
        return Ordering.EQUAL
    if b.mu_star < a.mu_star and b.gamma > a.gamma:
        return Ordering.MORE_PRIVATE
    if b.mu_star > a.mu_star and b.gamma < a.gamma:
        return Ordering.LESS_PRIVATE
    return Ordering.INCOMPARABLE
