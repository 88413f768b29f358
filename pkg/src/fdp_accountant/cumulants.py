"""Moments-to-cumulants conversion and composition-level aggregation.

Cumulants are additive over independent sums, so composing n private
mechanisms only needs the per-component cumulants of the log-likelihood
ratio summed (or scaled by n in the iid case).  Only orders 1..4 are
carried; the degree-2 expansion uses exactly these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .distributions import (DistributionPair, GaussianPair, LaplacePair,
                            SubsampledGaussianPair, _gh_expect, llr_moments)
from .errors import DegenerateVarianceError, InvalidParameterError


@dataclass(frozen=True)
class CumulantSet:
    """Cumulants kappa_1..kappa_4 of one component's log-likelihood ratio."""

    kappa: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.kappa) != 4:
            raise InvalidParameterError("exactly four cumulants are carried")
        if not (self.kappa[1] > 0.0):
            raise DegenerateVarianceError(
                f"kappa_2 must be positive, got {self.kappa[1]}")


@dataclass(frozen=True)
class CompositionCumulants:
    """Summed cumulants of T_n = sum_i L_i under one law."""

    bold_kappa: tuple[float, float, float, float]
    sigma_n: float
    n: int

    @property
    def mean(self) -> float:
        return self.bold_kappa[0]

    @property
    def variance(self) -> float:
        return self.bold_kappa[1]


def moments_to_cumulants(moments: Sequence[float]) -> CumulantSet:
    """kappa_1..kappa_4 from non-central moments mu_1..mu_4."""
    if len(moments) < 4:
        raise InvalidParameterError("four moments are required")
    m1, m2, m3, m4 = (float(m) for m in moments[:4])
    k1 = m1
    k2 = m2 - m1 ** 2
    k3 = m3 - 3.0 * m2 * m1 + 2.0 * m1 ** 3
    k4 = m4 - 4.0 * m3 * m1 - 3.0 * m2 ** 2 + 12.0 * m2 * m1 ** 2 - 6.0 * m1 ** 4
    return CumulantSet((k1, k2, k3, k4))


def fifth_cumulant(moments: Sequence[float]) -> float:
    """kappa_5 from non-central moments mu_1..mu_5.

    Only needed for truncation diagnostics; the general moment-cumulant
    relation through Bell polynomials is deliberately not implemented.
    """
    if len(moments) < 5:
        raise InvalidParameterError("five moments are required")
    m1, m2, m3, m4, m5 = (float(m) for m in moments[:5])
    return (m5 - 5.0 * m4 * m1 - 10.0 * m3 * m2 + 20.0 * m3 * m1 ** 2
            + 30.0 * m2 ** 2 * m1 - 60.0 * m2 * m1 ** 3 + 24.0 * m1 ** 5)


def aggregate(components: CumulantSet | Sequence[CumulantSet],
              repeat: int = 1) -> CompositionCumulants:
    """Sum cumulants over independent components.

    ``aggregate(cs, repeat=n)`` is the O(1) iid fast path equivalent to
    aggregating a list of n copies.
    """
    if isinstance(components, CumulantSet):
        components = [components]
    if not components:
        raise InvalidParameterError("components must be non-empty")
    if repeat < 1:
        raise InvalidParameterError(f"repeat must be >= 1, got {repeat}")
    sums = [repeat * sum(c.kappa[r] for c in components) for r in range(4)]
    return CompositionCumulants(
        bold_kappa=tuple(sums),
        sigma_n=math.sqrt(sums[1]),
        n=repeat * len(components),
    )


def llr_cumulants(pair: DistributionPair, under: str) -> CumulantSet:
    """Per-component cumulants of L under one law, via family fast paths.

    Gaussian pairs are exact (L is normal), Laplace pairs use the piecewise
    closed-form moment integrals, and the mixture uses Gauss-Hermite.  Agrees
    with ``moments_to_cumulants(llr_moments(...))`` but avoids adaptive
    quadrature inside the composition engines.
    """
    if isinstance(pair, GaussianPair):
        sign = 1.0 if under == "Q" else -1.0
        return CumulantSet((sign * 0.5 * pair.mu ** 2, pair.mu ** 2, 0.0, 0.0))
    if isinstance(pair, LaplacePair):
        moments_p = _laplace_llr_moments(pair.theta, 4)
        if under == "P":
            return moments_to_cumulants(moments_p)
        return moments_to_cumulants([(-1.0) ** r * m
                                     for r, m in zip(range(1, 5), moments_p)])
    if isinstance(pair, SubsampledGaussianPair):
        return moments_to_cumulants(_subsampled_llr_moments(pair, under))
    return moments_to_cumulants(llr_moments(pair, under, 4))


def _laplace_llr_moments(theta: float, max_order: int) -> list[float]:
    """E_P[L^r] for the Laplace pair in closed form.

    L = -theta on x <= 0 (mass 1/2), L = theta on x >= theta (mass e^-th/2),
    and L = 2x - theta in between where P has density e^-x/2.
    """
    if theta == 0.0:
        raise DegenerateVarianceError("theta = 0 gives a degenerate ratio")
    # I(r) = integral_-th^th u^r e^{-u/2} du via integration by parts.
    ivals = []
    e_pos = math.exp(theta / 2.0)   # e^{-u/2} at u = -theta
    e_neg = math.exp(-theta / 2.0)  # at u = +theta
    for r in range(max_order + 1):
        if r == 0:
            ivals.append(2.0 * (e_pos - e_neg))
        else:
            boundary = -2.0 * (theta ** r * e_neg - (-theta) ** r * e_pos)
            ivals.append(boundary + 2.0 * r * ivals[r - 1])
    moments = []
    for r in range(1, max_order + 1):
        val = ((-theta) ** r * 0.5
               + theta ** r * 0.5 * math.exp(-theta)
               + 0.25 * math.exp(-theta / 2.0) * ivals[r])
        moments.append(val)
    return moments


def _subsampled_llr_moments(pair: SubsampledGaussianPair, under: str) -> list[float]:
    moments = []
    for r in range(1, 5):
        def fn(x, _r=r):
            return pair.log_likelihood_ratio(x) ** _r
        if under == "P":
            moments.append(_gh_expect(fn, 0.0))
        else:
            moments.append(pair.p * _gh_expect(fn, pair.mu)
                           + (1.0 - pair.p) * _gh_expect(fn, 0.0))
    return moments
