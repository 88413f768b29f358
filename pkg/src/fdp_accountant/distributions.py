"""Hypothesis pairs (P, Q) and their log-likelihood ratio.

Three pair families are supported:

* ``gaussian(mu)``:             N(0,1) vs N(mu,1)
* ``laplace(theta)``:           Lap(0,1) vs Lap(theta,1)
* ``subsampled_gaussian(p, s)``: N(0,1) vs p*N(1/s,1) + (1-p)*N(0,1)

Each pair exposes densities, the log-likelihood ratio L(x) = log(q(x)/p(x)),
and numeric moments of L under either law.  Moments are computed by adaptive
Gauss-Kronrod quadrature split at the kinks of the integrand; the mixture
family uses Gauss-Hermite nodes against its Gaussian components since its
integrands are entire.

The module also provides closed-form distribution functions of L (survival,
CDF, and partial mean under Q) consumed by the exact composition engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .errors import InvalidParameterError, QuadratureError

MAX_MOMENT_ORDER = 8
_QUAD_ABS_TOL = 1e-10

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(256)


def _gh_expect(fn, mean: float) -> float:
    """E[fn(X)] for X ~ N(mean, 1) by 256-node Gauss-Hermite."""
    x = mean + math.sqrt(2.0) * _GH_NODES
    return float(np.dot(_GH_WEIGHTS, fn(x)) / math.sqrt(math.pi))


def _quad(fn, lo, hi, *, points=None) -> float:
    val, abserr = integrate.quad(fn, lo, hi, epsabs=1e-13, epsrel=1e-12,
                                 limit=200, points=points)
    if abserr > _QUAD_ABS_TOL:
        raise QuadratureError(
            f"quadrature on [{lo}, {hi}] stopped at abserr={abserr:.3g}")
    return val


@dataclass(frozen=True)
class DistributionPair:
    """Base class; use the concrete families or :func:`make_pair`."""

    kind = "abstract"

    def log_likelihood_ratio(self, x):
        raise NotImplementedError

    def pdf(self, law: str, x):
        raise NotImplementedError

    def llr_range(self) -> tuple[float, float]:
        """Essential range of L (may be infinite)."""
        raise NotImplementedError

    def llr_root(self, eps: float) -> float | None:
        """Solution of L(x) = eps when L crosses eps, else None.

        L is non-decreasing for every family, so {L > eps} is the half line
        right of the root."""
        raise NotImplementedError

    def llr_tail_prob(self, law: str, t):
        """P_law(L > t), vectorized over t."""
        raise NotImplementedError

    def llr_cdf_partial_mean(self, t):
        """Under Q: (F(t), M(t)) with F(t) = Q(L <= t), M(t) = E_Q[L 1{L <= t}]."""
        raise NotImplementedError

    def _moment_segments(self, law: str):
        """(lo, hi, density, breakpoints) describing E_law[L^r] integration."""
        raise NotImplementedError


def _check_law(law: str) -> str:
    if law not in ("P", "Q"):
        raise InvalidParameterError(f"law must be 'P' or 'Q', got {law!r}")
    return law


@dataclass(frozen=True)
class GaussianPair(DistributionPair):
    """N(0,1) vs N(mu,1); L(x) = mu*x - mu^2/2 is exactly normal."""

    mu: float
    kind = "gaussian"

    def __post_init__(self):
        if not (self.mu >= 0.0):
            raise InvalidParameterError(f"mu must be >= 0, got {self.mu}")

    def log_likelihood_ratio(self, x):
        x = np.asarray(x, dtype=float)
        return self.mu * x - 0.5 * self.mu ** 2

    def pdf(self, law, x):
        _check_law(law)
        x = np.asarray(x, dtype=float)
        shift = self.mu if law == "Q" else 0.0
        return np.exp(-0.5 * (x - shift) ** 2) / math.sqrt(2.0 * math.pi)

    def llr_range(self):
        if self.mu == 0.0:
            return (0.0, 0.0)
        return (-math.inf, math.inf)

    def llr_root(self, eps):
        if self.mu == 0.0:
            return None
        return (eps + 0.5 * self.mu ** 2) / self.mu

    def llr_tail_prob(self, law, t):
        _check_law(law)
        t = np.asarray(t, dtype=float)
        if self.mu == 0.0:
            return np.where(t < 0.0, 1.0, 0.0)
        mean = 0.5 * self.mu ** 2 if law == "Q" else -0.5 * self.mu ** 2
        return ndtr(-(t - mean) / self.mu)

    def llr_cdf_partial_mean(self, t):
        t = np.asarray(t, dtype=float)
        if self.mu == 0.0:
            f = np.where(t >= 0.0, 1.0, 0.0)
            return f, np.zeros_like(t)
        mean, sd = 0.5 * self.mu ** 2, self.mu
        z = (t - mean) / sd
        f = ndtr(z)
        m = mean * f - sd * np.exp(-0.5 * z ** 2) / math.sqrt(2.0 * math.pi)
        return f, m

    def _moment_segments(self, law):
        shift = self.mu if law == "Q" else 0.0
        return (-np.inf, np.inf, lambda x: self.pdf(law, x), None)


@dataclass(frozen=True)
class LaplacePair(DistributionPair):
    """Lap(0,1) vs Lap(theta,1); L(x) = |x| - |x - theta| is bounded by theta."""

    theta: float
    kind = "laplace"

    def __post_init__(self):
        if not (self.theta >= 0.0):
            raise InvalidParameterError(f"theta must be >= 0, got {self.theta}")

    def log_likelihood_ratio(self, x):
        x = np.asarray(x, dtype=float)
        return np.abs(x) - np.abs(x - self.theta)

    def pdf(self, law, x):
        _check_law(law)
        x = np.asarray(x, dtype=float)
        shift = self.theta if law == "Q" else 0.0
        return 0.5 * np.exp(-np.abs(x - shift))

    def llr_range(self):
        return (-self.theta, self.theta)

    def llr_root(self, eps):
        if not (-self.theta < eps < self.theta):
            return None
        return 0.5 * (eps + self.theta)

    def llr_tail_prob(self, law, t):
        _check_law(law)
        th = self.theta
        t = np.asarray(t, dtype=float)
        if th == 0.0:
            return np.where(t < 0.0, 1.0, 0.0)
        x = 0.5 * (t + th)  # threshold in x space for -th <= t < th
        if law == "P":
            interior = 0.5 * np.exp(-x)
        else:
            interior = 1.0 - 0.5 * np.exp(x - th)
        return np.select([t < -th, t < th], [np.ones_like(t), interior], 0.0)

    def llr_cdf_partial_mean(self, t):
        th = self.theta
        t = np.asarray(t, dtype=float)
        if th == 0.0:
            f = np.where(t >= 0.0, 1.0, 0.0)
            return f, np.zeros_like(t)
        # Under Q, L has atoms at -th (mass e^{-th}/2) and th (mass 1/2) and
        # density e^{(l-th)/2}/4 on (-th, th).
        interior_f = 0.5 * np.exp(0.5 * (t - th))
        f = np.select([t < -th, t < th], [np.zeros_like(t), interior_f], 1.0)
        interior_m = 0.5 * np.exp(0.5 * (t - th)) * (t - 2.0) + math.exp(-th)
        full_mean = th - 1.0 + math.exp(-th)
        m = np.select([t < -th, t < th], [np.zeros_like(t), interior_m], full_mean)
        return f, m

    def _moment_segments(self, law):
        return (-np.inf, np.inf, lambda x: self.pdf(law, x), [0.0, self.theta])


@dataclass(frozen=True)
class SubsampledGaussianPair(DistributionPair):
    """N(0,1) vs p*N(1/sigma,1) + (1-p)*N(0,1).

    This is the per-step pair of noisy SGD with sampling rate p and noise
    scale sigma; L(x) = log(p e^{x/sigma - 1/(2 sigma^2)} + 1 - p).
    """

    p: float
    sigma: float
    kind = "subsampled_gaussian"

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise InvalidParameterError(f"p must lie in [0, 1], got {self.p}")
        if not (self.sigma > 0.0):
            raise InvalidParameterError(f"sigma must be > 0, got {self.sigma}")

    @property
    def mu(self) -> float:
        return 1.0 / self.sigma

    def log_likelihood_ratio(self, x):
        x = np.asarray(x, dtype=float)
        expo = self.mu * x - 0.5 * self.mu ** 2
        if self.p == 1.0:
            return expo
        # log(p e^expo + 1 - p) split by sign of expo to stay finite for any x
        pos = expo + np.log(self.p + (1.0 - self.p) * np.exp(-np.maximum(expo, 0.0)))
        neg = np.log1p(self.p * np.expm1(np.minimum(expo, 0.0)))
        return np.where(expo > 0.0, pos, neg)

    def pdf(self, law, x):
        _check_law(law)
        x = np.asarray(x, dtype=float)
        base = np.exp(-0.5 * x ** 2) / math.sqrt(2.0 * math.pi)
        if law == "P":
            return base
        shifted = np.exp(-0.5 * (x - self.mu) ** 2) / math.sqrt(2.0 * math.pi)
        return self.p * shifted + (1.0 - self.p) * base

    def llr_range(self):
        if self.p == 0.0:
            return (0.0, 0.0)
        if self.p == 1.0:
            return (-math.inf, math.inf)
        return (math.log1p(-self.p), math.inf)

    def llr_root(self, eps):
        if self.p == 0.0:
            return None
        lhs = math.exp(eps) - (1.0 - self.p)
        if lhs <= 0.0:
            return None
        return (math.log(lhs / self.p) + 0.5 * self.mu ** 2) / self.mu

    def _x_star(self, t):
        """Vectorized inverse of L; -inf where t is at or below the range."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lhs = np.exp(t) - (1.0 - self.p)
            xs = (np.log(lhs / self.p) + 0.5 * self.mu ** 2) / self.mu
        return np.where(lhs > 0.0, xs, -np.inf)

    def llr_tail_prob(self, law, t):
        _check_law(law)
        t = np.asarray(t, dtype=float)
        if self.p == 0.0:
            return np.where(t < 0.0, 1.0, 0.0)
        xs = self._x_star(t)
        if law == "P":
            return ndtr(-xs)
        return self.p * ndtr(-(xs - self.mu)) + (1.0 - self.p) * ndtr(-xs)

    def llr_cdf_partial_mean(self, t):
        t = np.asarray(t, dtype=float)
        if self.p == 0.0:
            f = np.where(t >= 0.0, 1.0, 0.0)
            return f, np.zeros_like(t)
        f = 1.0 - self.llr_tail_prob("Q", t)
        m = self._partial_mean_table(t)
        return f, m

    def _partial_mean_table(self, t: np.ndarray) -> np.ndarray:
        """M(t) = E_Q[L 1{L <= t}] accumulated by Gauss-Legendre panels.

        There is no closed form for the mixture, so the table is built once
        per grid: panel integrals of L(y) q(y) between consecutive thresholds
        x*(t_k), with panels capped at width 0.5 in y.
        """
        order = np.argsort(t, kind="stable")
        ts = t[order]
        xs = self._x_star(ts)
        finite = xs > -np.inf
        m_sorted = np.zeros_like(ts)
        if finite.any():
            x_lo = min(-40.0, float(xs[finite].min()) - 1.0)
            edges = [x_lo]
            for x in xs[finite]:
                edges.append(max(x, edges[-1]))
            edges = np.asarray(edges)
            nodes, weights = np.polynomial.legendre.leggauss(24)
            seg_vals = np.zeros(len(edges) - 1)
            widths = np.diff(edges)
            for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
                if widths[i] <= 0.0:
                    continue
                npan = max(1, int(math.ceil(widths[i] / 0.5)))
                bounds = np.linspace(a, b, npan + 1)
                mid = 0.5 * (bounds[1:] + bounds[:-1])[:, None]
                half = 0.5 * (bounds[1:] - bounds[:-1])[:, None]
                y = mid + half * nodes[None, :]
                vals = self.log_likelihood_ratio(y) * self.pdf("Q", y)
                seg_vals[i] = float(np.sum(half[:, 0] * (vals @ weights)))
            # Mass below x_lo contributes |L| <= |log(1-p)| times ~Phi(-40).
            cum = np.cumsum(seg_vals)
            m_sorted[finite] = cum
        out = np.empty_like(m_sorted)
        out[order] = m_sorted
        return out

    def _moment_segments(self, law):
        return None  # moments use Gauss-Hermite, see llr_moments


def make_pair(kind: str, **params) -> DistributionPair:
    """Factory used by the CLI: gaussian(mu), laplace(theta),
    subsampled_gaussian(p, sigma)."""
    families = {
        "gaussian": GaussianPair,
        "laplace": LaplacePair,
        "subsampled_gaussian": SubsampledGaussianPair,
    }
    if kind not in families:
        raise InvalidParameterError(
            f"unknown pair kind {kind!r}; expected one of {sorted(families)}")
    return families[kind](**params)


def log_likelihood_ratio(pair: DistributionPair, x):
    """L(x) = log(q(x)/p(x))."""
    return pair.log_likelihood_ratio(x)


def llr_moments(pair: DistributionPair, under: str, max_order: int) -> list[float]:
    """Non-central moments E[L^r], r = 1..max_order, of L under one law.

    Gaussian and Laplace pairs integrate against the selected density with
    adaptive quadrature split at the kinks; the subsampled-Gaussian pair uses
    Gauss-Hermite against each mixture component.
    """
    _check_law(under)
    if not (2 <= max_order <= MAX_MOMENT_ORDER):
        raise InvalidParameterError(
            f"max_order must lie in [2, {MAX_MOMENT_ORDER}], got {max_order}")
    if isinstance(pair, SubsampledGaussianPair):
        return _subsampled_moments(pair, under, max_order)
    lo, hi, density, breaks = pair._moment_segments(under)
    cuts = [lo] + (sorted(breaks) if breaks else []) + [hi]
    moments = []
    for r in range(1, max_order + 1):
        def integrand(x, _r=r):
            return pair.log_likelihood_ratio(x) ** _r * density(x)
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            total += _quad(integrand, a, b)
        moments.append(total)
    return moments


def _subsampled_moments(pair: SubsampledGaussianPair, under: str,
                        max_order: int) -> list[float]:
    moments = []
    for r in range(1, max_order + 1):
        def fn(x, _r=r):
            return pair.log_likelihood_ratio(x) ** _r
        if under == "P":
            moments.append(_gh_expect(fn, 0.0))
        else:
            moments.append(pair.p * _gh_expect(fn, pair.mu)
                           + (1.0 - pair.p) * _gh_expect(fn, 0.0))
    return moments
