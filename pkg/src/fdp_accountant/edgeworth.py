"""Approximate composition engine: CLT and degree-2 Edgeworth expansions.

The composed trade-off curve of n mechanisms is

    f(alpha) = Ftilde_n((F_n^{-1}(1 - alpha) - mu_n) * sqrt(Var_P/Var_Q))

where F_n and Ftilde_n are the CDFs of the standardized log-likelihood-ratio
sum under P and Q.  Both CDFs are replaced by Edgeworth approximants built
from the summed cumulants; the inverse is taken either by bracketed bisection
on the approximant (numeric) or by the Cornish-Fisher expansion.

Degree 0 reduces to the normal CDF, i.e. the CLT approximation.  The degree-2
approximant need not be monotone in h, so sampled curves are repaired with a
running minimum before they are returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .cumulants import CompositionCumulants, aggregate, llr_cumulants
from .curves import TradeoffCurve, default_alpha_grid, DEFAULT_GRID_SIZE
from .distributions import DistributionPair
from .errors import BracketingError, InvalidParameterError

_DEGREES = (0, 1, 2)
_BOUNDARY_CLAMP = 1e-6
_BRACKET_LIMIT = 64.0


def _phi(h):
    return np.exp(-0.5 * np.square(h)) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class EdgeworthApproximant:
    """CDF approximant for the standardized sum under one law.

    Degree 0 is the standard normal CDF; degree 2 adds the skewness and
    kurtosis Hermite corrections.  Degree 1 (skewness only) is accepted but
    the default engines use 0 and 2.
    """

    cc: CompositionCumulants
    degree: int = 2

    def __post_init__(self):
        if self.degree not in _DEGREES:
            raise InvalidParameterError(
                f"degree must be one of {_DEGREES}, got {self.degree}")


def edgeworth_cdf(a: EdgeworthApproximant, h):
    """Raw approximant value at h (not clamped to [0, 1])."""
    h = np.asarray(h, dtype=float)
    out = ndtr(h)
    if a.degree == 0:
        return out
    k3 = a.cc.bold_kappa[2]
    s = a.cc.sigma_n
    phi = _phi(h)
    out = out - s ** -3 / 6.0 * k3 * (h ** 2 - 1.0) * phi
    if a.degree == 2:
        k4 = a.cc.bold_kappa[3]
        out = out - (s ** -4 / 24.0 * k4 * (h ** 3 - 3.0 * h)
                     + s ** -6 / 72.0 * k3 ** 2
                     * (h ** 5 - 10.0 * h ** 3 + 15.0 * h)) * phi
    return out


def cornish_fisher_quantile(a: EdgeworthApproximant, alpha):
    """Closed-form approximation of the 1 - alpha quantile."""
    if a.degree not in (1, 2):
        raise InvalidParameterError(
            "the Cornish-Fisher expansion needs a degree 1 or 2 approximant")
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0.0) or np.any(alpha >= 1.0):
        raise InvalidParameterError("alpha must lie strictly in (0, 1)")
    z = ndtri(1.0 - alpha)
    k3 = a.cc.bold_kappa[2]
    s = a.cc.sigma_n
    out = z + s ** -3 / 6.0 * k3 * (z ** 2 - 1.0)
    if a.degree == 2:
        k4 = a.cc.bold_kappa[3]
        out = (out + s ** -4 / 24.0 * k4 * (z ** 3 - 3.0 * z)
               - s ** -6 / 36.0 * k3 ** 2 * (2.0 * z ** 3 - 5.0 * z))
    return out


def numeric_quantile(a: EdgeworthApproximant, alpha):
    """Root h of edgeworth_cdf(a, h) = 1 - alpha by bracketed bisection.

    The bracket grows geometrically around the Cornish-Fisher initializer, so
    on locally non-monotone approximants the root nearest the initializer is
    selected.
    """
    alpha = np.asarray(alpha, dtype=float)
    scalar = alpha.ndim == 0
    alpha = np.atleast_1d(alpha)
    if np.any(alpha <= 0.0) or np.any(alpha >= 1.0):
        raise InvalidParameterError("alpha must lie strictly in (0, 1)")
    targets = 1.0 - alpha
    if a.degree == 0:
        out = ndtri(targets)
        return float(out[0]) if scalar else out
    h0 = np.asarray(cornish_fisher_quantile(
        EdgeworthApproximant(a.cc, min(a.degree, 2)), alpha), dtype=float)
    h0 = np.clip(h0, -_BRACKET_LIMIT, _BRACKET_LIMIT)
    width = np.full_like(h0, 0.5)
    lo = h0 - width
    hi = h0 + width
    for _ in range(12):
        bad_lo = edgeworth_cdf(a, lo) - targets > 0.0
        bad_hi = edgeworth_cdf(a, hi) - targets < 0.0
        if not (bad_lo.any() or bad_hi.any()):
            break
        width = np.where(bad_lo | bad_hi, 2.0 * width, width)
        lo = np.where(bad_lo, np.maximum(h0 - width, -_BRACKET_LIMIT), lo)
        hi = np.where(bad_hi, np.minimum(h0 + width, _BRACKET_LIMIT), hi)
    else:
        bad = (edgeworth_cdf(a, lo) - targets > 0.0) | (edgeworth_cdf(a, hi) - targets < 0.0)
        raise BracketingError(
            f"no sign change within [{-_BRACKET_LIMIT}, {_BRACKET_LIMIT}] "
            f"for {int(bad.sum())} quantile(s)")
    for _ in range(110):
        mid = 0.5 * (lo + hi)
        above = edgeworth_cdf(a, mid) - targets >= 0.0
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if float(np.max(hi - lo)) <= 1e-15:
            break
    out = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Composer:
    """Shared precomputation for evaluating the composed curve of an iid pair."""

    approx_p: EdgeworthApproximant
    approx_q: EdgeworthApproximant
    mu_n: float
    var_ratio: float  # sqrt(Var_P / Var_Q)

    @classmethod
    def build(cls, pair: DistributionPair, n: int, degree: int,
              force_unit_ratio: bool = False) -> "_Composer":
        if n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {n}")
        cc_p = aggregate(llr_cumulants(pair, "P"), repeat=n)
        cc_q = aggregate(llr_cumulants(pair, "Q"), repeat=n)
        mu_n = (cc_q.mean - cc_p.mean) / cc_p.sigma_n
        ratio = 1.0 if force_unit_ratio else cc_p.sigma_n / cc_q.sigma_n
        return cls(EdgeworthApproximant(cc_p, degree),
                   EdgeworthApproximant(cc_q, degree), mu_n, ratio)

    def value(self, alpha: np.ndarray, inverse_method: str) -> np.ndarray:
        alpha = np.clip(alpha, _BOUNDARY_CLAMP, 1.0 - _BOUNDARY_CLAMP)
        if inverse_method == "numeric":
            h = numeric_quantile(self.approx_p, alpha)
        elif inverse_method == "cornish_fisher":
            if self.approx_p.degree == 0:
                h = ndtri(1.0 - alpha)
            else:
                h = cornish_fisher_quantile(self.approx_p, alpha)
        else:
            raise InvalidParameterError(
                f"inverse_method must be 'numeric' or 'cornish_fisher', "
                f"got {inverse_method!r}")
        beta = edgeworth_cdf(self.approx_q, (h - self.mu_n) * self.var_ratio)
        return np.clip(beta, 0.0, 1.0)


def truncation_diagnostics(pair: DistributionPair, n: int,
                           under: str = "Q") -> dict[str, float]:
    """Magnitudes of the first terms dropped by the degree-2 expansion.

    The characteristic-function series is cut after the third- and
    fourth-cumulant terms; the dominant remainders scale as
    |kappa_5| sigma_n^-5 / 120 (order n^-3/2) and
    kappa_4^2 sigma_n^-8 / 576 (order n^-2).
    """
    from .cumulants import fifth_cumulant, moments_to_cumulants
    from .distributions import llr_moments
    moments = llr_moments(pair, under, 5)
    ks = moments_to_cumulants(moments)
    cc = aggregate(ks, repeat=n)
    k5 = n * fifth_cumulant(moments)
    return {
        "skew_tail": abs(k5) / (120.0 * cc.sigma_n ** 5),
        "kurtosis_sq_tail": cc.bold_kappa[3] ** 2 / (576.0 * cc.sigma_n ** 8),
    }


def compose_edgeworth(pair: DistributionPair, n: int, alpha: float,
                      degree: int = 2, inverse_method: str = "numeric",
                      force_unit_ratio: bool = False) -> float:
    """Composed trade-off value f(alpha) for n iid copies of the pair."""
    if not (0.0 <= alpha <= 1.0):
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 0.0:
        return 1.0
    if alpha == 1.0:
        return 0.0
    comp = _Composer.build(pair, n, degree, force_unit_ratio)
    return float(comp.value(np.atleast_1d(alpha), inverse_method)[0])


def compose_edgeworth_curve(pair: DistributionPair, n: int, degree: int = 2,
                            inverse_method: str = "numeric",
                            grid_size: int = DEFAULT_GRID_SIZE,
                            force_unit_ratio: bool = False) -> TradeoffCurve:
    """Composed curve on the alpha grid; cumulants are computed once.

    The sampled approximant is forced non-increasing by a running minimum
    before the curve is built.
    """
    comp = _Composer.build(pair, n, degree, force_unit_ratio)
    alphas = default_alpha_grid(grid_size)
    betas = np.empty_like(alphas)
    betas[0] = 1.0
    betas[-1] = 0.0
    betas[1:-1] = comp.value(alphas[1:-1], inverse_method)
    betas = np.minimum.accumulate(betas)
    return TradeoffCurve(alphas, betas)
