"""High-level orchestration: iid composition and the noisy-SGD bound.

``compose_iid`` dispatches one hypothesis pair to a composition engine;
``sgd_privacy`` runs the subsampled-Gaussian pipeline (compose n-fold, then
symmetrize), with the CLT method using its closed-form Gaussian limit.
"""

from __future__ import annotations

import math

from .curves import (DEFAULT_GRID_SIZE, TradeoffCurve, default_alpha_grid,
                     gdp_curve, identity_curve, symmetrize)
from .distributions import DistributionPair, make_pair
from .edgeworth import compose_edgeworth_curve
from .errors import InvalidParameterError
from .exact import compose_exact, default_eps_grid

METHODS = ("clt", "edgeworth", "exact")


def _is_degenerate(pair: DistributionPair) -> bool:
    lo, hi = pair.llr_range()
    return lo == hi == 0.0


def compose_iid(pair: DistributionPair, n: int, method: str,
                grid_size: int = DEFAULT_GRID_SIZE,
                degree: int = 2, inverse_method: str = "numeric",
                eps_grid_size: int | None = None) -> TradeoffCurve:
    """Trade-off curve of n iid copies of the pair under one engine.

    ``clt`` is the degree-0 expansion (normal CDFs on both sides),
    ``edgeworth`` the degree-2 expansion, and ``exact`` the dual-domain
    recursion.  The returned curve may be asymmetric.
    """
    if method not in METHODS:
        raise InvalidParameterError(
            f"method must be one of {METHODS}, got {method!r}")
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if _is_degenerate(pair):
        return identity_curve(grid_size)
    if method == "clt":
        return compose_edgeworth_curve(pair, n, degree=0, grid_size=grid_size)
    if method == "edgeworth":
        return compose_edgeworth_curve(pair, n, degree=degree,
                                       inverse_method=inverse_method,
                                       grid_size=grid_size)
    eps_grid = None
    if eps_grid_size is not None:
        eps_grid = default_eps_grid(pair, n, eps_grid_size)
    return compose_exact(pair, n, eps_grid=eps_grid,
                         alpha_grid=default_alpha_grid(grid_size))


def sgd_privacy(n: int, p: float, sigma: float, method: str,
                grid_size: int = DEFAULT_GRID_SIZE,
                degree: int = 2, inverse_method: str = "numeric",
                eps_grid_size: int | None = None) -> TradeoffCurve:
    """Privacy bound of n noisy-SGD steps at sampling rate p, noise sigma.

    CLT returns its closed-form limit G_{p sqrt(n (e^{1/sigma^2} - 1))};
    the other engines compose the subsampled-Gaussian pair n-fold and
    symmetrize the result.
    """
    if method not in METHODS:
        raise InvalidParameterError(
            f"method must be one of {METHODS}, got {method!r}")
    pair = make_pair("subsampled_gaussian", p=p, sigma=sigma)
    if p == 0.0:
        return identity_curve(grid_size)
    if method == "clt":
        mu = p * math.sqrt(n * math.expm1(1.0 / sigma ** 2))
        return gdp_curve(mu, grid_size)
    composed = compose_iid(pair, n, method, grid_size=grid_size, degree=degree,
                           inverse_method=inverse_method,
                           eps_grid_size=eps_grid_size)
    return symmetrize(composed)


def subsample_curve(f: TradeoffCurve, p: float) -> TradeoffCurve:
    """Privacy amplification by subsampling:
    min{p f + (1-p) Id, (p f + (1-p) Id)^{-1}}**."""
    if not (0.0 <= p <= 1.0):
        raise InvalidParameterError(f"p must lie in [0, 1], got {p}")
    mixed = TradeoffCurve(f.alphas, p * f.betas + (1.0 - p) * (1.0 - f.alphas))
    return symmetrize(mixed)
