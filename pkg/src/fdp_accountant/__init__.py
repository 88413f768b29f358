"""Composition accounting for f-differential privacy.

Computes the overall trade-off curve of n composed private mechanisms with
three engines (CLT, degree-2 Edgeworth expansion, exact dual-domain
recursion), converts between the curve and its (eps, delta) dual, and
summarizes symmetric curves with the two-parameter (mu*, gamma) interpreter.
"""

from .accountant import compose_iid, sgd_privacy, subsample_curve
from .cumulants import (CompositionCumulants, CumulantSet, aggregate,
                        llr_cumulants, moments_to_cumulants)
from .curves import (DualCurve, PrivacyParams, TradeoffCurve, area_under_curve,
                     curve_inverse, double_conjugate, dual_to_primal,
                     eps_delta_curve, fixed_point, gdp_curve, identity_curve,
                     make_curve, mixture_curve, primal_to_dual, read_curve_csv,
                     symmetrize, write_curve_csv)
from .distributions import (DistributionPair, GaussianPair, LaplacePair,
                            SubsampledGaussianPair, llr_moments,
                            log_likelihood_ratio, make_pair)
from .edgeworth import (EdgeworthApproximant, compose_edgeworth,
                        compose_edgeworth_curve, cornish_fisher_quantile,
                        edgeworth_cdf, numeric_quantile)
from .exact import (DeltaGrid, compose_exact, compose_exact_dual,
                    delta_initial, delta_one, delta_one_grid, delta_step,
                    default_eps_grid)
from .interpreter import Ordering, compare, interpret

__version__ = "0.1.0"

__all__ = [
    "CompositionCumulants", "CumulantSet", "DeltaGrid", "DistributionPair",
    "DualCurve", "EdgeworthApproximant", "GaussianPair", "LaplacePair",
    "Ordering", "PrivacyParams", "SubsampledGaussianPair", "TradeoffCurve",
    "aggregate", "area_under_curve", "compare", "compose_edgeworth",
    "compose_edgeworth_curve", "compose_exact", "compose_exact_dual",
    "compose_iid", "cornish_fisher_quantile", "curve_inverse",
    "default_eps_grid", "delta_initial", "delta_one", "delta_one_grid",
    "delta_step", "double_conjugate", "dual_to_primal", "edgeworth_cdf",
    "eps_delta_curve", "fixed_point", "gdp_curve", "identity_curve",
    "interpret", "llr_cumulants", "llr_moments", "log_likelihood_ratio",
    "make_curve", "make_pair", "mixture_curve", "moments_to_cumulants",
    "numeric_quantile", "primal_to_dual", "read_curve_csv", "sgd_privacy",
    "subsample_curve", "symmetrize", "write_curve_csv",
]
