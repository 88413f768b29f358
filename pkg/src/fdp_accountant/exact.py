"""Exact composition engine: the delta recursion in the dual domain.

Composing n copies of a mechanism is intractable in the primal domain (it
is an n-dimensional testing problem), but the dual curve obeys a
one-dimensional recursion

    delta_0(eps)     = max{1 - e^eps, 0}
    delta_{k+1}(eps) = integral of delta_k(eps - L(y)) q(y) dy
    f(alpha)         = sup over eps of 1 - delta_n(eps) - e^eps alpha

with L the log-likelihood ratio and q the density of Q.  delta is stored on
a uniform signed eps grid (asymmetric pairs need negative eps) and evaluated
off-grid by linear interpolation, with delta = 1 assumed left of the grid
and delta = 0 right of it.

Each recursion step integrates the piecewise-linear interpolant exactly:
after substituting l = L(y), the integral over one linear segment reduces to
increments of the CDF F(t) = Q(L <= t) and the partial mean
M(t) = E_Q[L 1{L <= t}], both tabulated once per grid on the lattice of node
differences.  Because source and target nodes share one uniform lattice the
per-step sums are discrete correlations, so a step costs three length-N
convolutions instead of N adaptive integrals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .cumulants import llr_cumulants
from .curves import TradeoffCurve, default_alpha_grid, support_lines_max
from .distributions import (DistributionPair, GaussianPair, LaplacePair,
                            SubsampledGaussianPair)
from .errors import GridTruncationWarning, InvalidParameterError, QuadratureError

DEFAULT_EPS_GRID_SIZE = 2_001
_MIN_HALF_WIDTH = 15.0
_TRUNCATION_TOL = 1e-6


@dataclass
class DeltaGrid:
    """delta_k sampled on a uniform eps grid after k composition steps."""

    epsilons: np.ndarray
    deltas: np.ndarray
    k: int

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=float)
        deltas = np.clip(np.asarray(self.deltas, dtype=float), 0.0, 1.0)
        if eps.ndim != 1 or eps.shape != deltas.shape or eps.size < 3:
            raise InvalidParameterError("epsilons and deltas must be matching 1-d arrays")
        self.epsilons = eps
        self.deltas = deltas

    def __call__(self, eps):
        return np.interp(eps, self.epsilons, self.deltas, left=1.0, right=0.0)


def default_eps_grid(pair: DistributionPair, n: int,
                     size: int = DEFAULT_EPS_GRID_SIZE) -> np.ndarray:
    """Uniform grid over [-E, E] sized to cover the composed ratio's support.

    For bounded ratios (Laplace) the half-width snaps so the bound theta is
    an integer number of cells; the dual's change point at n*theta then falls
    on grid nodes and stays exactly zero through the recursion.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if size < 3:
        raise InvalidParameterError(f"size must be >= 3, got {size}")
    if size % 2 == 0:
        size += 1  # an odd size keeps eps = 0 on the grid
    half = _half_width(pair, n)
    if isinstance(pair, LaplacePair) and pair.theta > 0.0:
        cells = math.floor(pair.theta * (size - 1) / (2.0 * half))
        if cells >= 1:
            half = pair.theta * (size - 1) / (2.0 * cells)
    return np.linspace(-half, half, size)


def _half_width(pair: DistributionPair, n: int) -> float:
    if isinstance(pair, LaplacePair):
        scale = n * pair.theta
    elif isinstance(pair, GaussianPair):
        scale = n * pair.mu ** 2 + 6.0 * math.sqrt(n) * pair.mu
    elif isinstance(pair, SubsampledGaussianPair):
        if pair.p == 0.0:
            scale = 0.0
        elif pair.p == 1.0:
            scale = n * pair.mu ** 2 + 6.0 * math.sqrt(n) * pair.mu
        else:
            # The generic n/sigma^2 bound over-covers badly for small p and
            # would waste resolution; size from the ratio's cumulants instead.
            kq = llr_cumulants(pair, "Q")
            scale = max(n * kq.kappa[0] + 8.0 * math.sqrt(n * kq.kappa[1]),
                        n * abs(math.log1p(-pair.p)) + 4.0)
    else:
        scale = 0.0
    return max(max(scale, 8.0) + 2.0, _MIN_HALF_WIDTH)


def delta_initial(eps_grid: np.ndarray) -> DeltaGrid:
    """delta_0(eps) = max{1 - e^eps, 0}: the dual of perfect privacy."""
    eps = np.asarray(eps_grid, dtype=float)
    return DeltaGrid(eps, np.maximum(1.0 - np.exp(eps), 0.0), k=0)


def delta_one(pair: DistributionPair, eps: float) -> float:
    """delta_1(eps) = integral of (q - e^eps p)_+ by adaptive quadrature.

    The integration region {q > e^eps p} is the half line right of the root
    of L(x) = eps; the Laplace kink at theta splits the region further.
    """
    lo, hi = pair.llr_range()
    if eps >= hi:
        return 0.0
    if eps < lo or (eps == lo == hi):
        return max(1.0 - math.exp(eps), 0.0)
    root = pair.llr_root(eps)
    if root is None:
        return max(1.0 - math.exp(eps), 0.0)
    e_eps = math.exp(eps)

    def integrand(x):
        return pair.pdf("Q", x) - e_eps * pair.pdf("P", x)

    pieces = [root, np.inf]
    if isinstance(pair, LaplacePair) and root < pair.theta:
        pieces = [root, pair.theta, np.inf]
    total = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        val, abserr = integrate.quad(integrand, a, b, epsabs=1e-12,
                                     epsrel=1e-12, limit=200)
        if abserr > 1e-9:
            raise QuadratureError(
                f"delta_1({eps}) quadrature stopped at abserr={abserr:.3g}")
        total += val
    return min(max(total, 0.0), 1.0)


def delta_one_grid(pair: DistributionPair, eps_grid: np.ndarray) -> DeltaGrid:
    """delta_1 on a whole grid via the tail identity
    delta_1(eps) = Q(L > eps) - e^eps P(L > eps), vectorized."""
    eps = np.asarray(eps_grid, dtype=float)
    deltas = (pair.llr_tail_prob("Q", eps)
              - np.exp(eps) * pair.llr_tail_prob("P", eps))
    return DeltaGrid(eps, np.maximum(deltas, 0.0), k=1)


class _Stepper:
    """Applies one recursion step; CDF/partial-mean tables are built once.

    For node spacing D, both eps_j - eps_i arguments live on the lattice
    {r D}; the exact integral of the piecewise-linear delta against dF over
    one lattice cell needs F and M increments there, so a step is three
    discrete correlations of length-N sequences.
    """

    def __init__(self, pair: DistributionPair, eps_grid: np.ndarray):
        eps = np.asarray(eps_grid, dtype=float)
        steps = np.diff(eps)
        if steps.size < 2 or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-15):
            raise InvalidParameterError("the delta recursion needs a uniform eps grid")
        self.pair = pair
        self.eps = eps
        self.spacing = float(steps[0])
        n = eps.size
        lattice = np.arange(-(n - 1), n, dtype=float) * self.spacing
        f_tab, m_tab = pair.llr_cdf_partial_mean(lattice)
        self.f_at_node_diff = f_tab[(n - 1):]  # F(j*D) for j = 0..n-1
        self.mass = np.diff(f_tab)
        self.mass_mean = np.diff(m_tab)

    def step(self, d: DeltaGrid) -> DeltaGrid:
        if d.epsilons.shape != self.eps.shape or not np.array_equal(d.epsilons, self.eps):
            raise InvalidParameterError("DeltaGrid does not match this stepper's grid")
        n = self.eps.size
        values = d.deltas
        self._check_truncation(values)
        slopes = np.diff(values) / self.spacing
        intercepts = values[:-1] - slopes * self.eps[:-1]
        lo = n - 2
        conv_a = np.convolve(intercepts, self.mass)[lo:lo + n]
        conv_sf = np.convolve(slopes, self.mass)[lo:lo + n]
        conv_sm = np.convolve(slopes, self.mass_mean)[lo:lo + n]
        out = (1.0 - self.f_at_node_diff) + conv_a + self.eps * conv_sf - conv_sm
        # Composing one more mechanism never lowers delta, so delta_k is a
        # certified lower bound; projecting onto it only removes error.
        out = np.maximum(np.clip(out, 0.0, 1.0), values)
        out = np.minimum.accumulate(out)
        return DeltaGrid(self.eps, out, k=d.k + 1)

    def _check_truncation(self, values: np.ndarray) -> None:
        # Convention error: delta = 1 left of the grid overstates 1 - delta
        # by at most e^{eps_0} there, delta = 0 right of it understates by at
        # most the last node value.
        f0 = float(self.f_at_node_diff[0])
        left = min(math.exp(self.eps[0]), 1.0 - float(values[0])) * (1.0 - f0)
        right = float(values[-1]) * f0
        if left + right > _TRUNCATION_TOL:
            warnings.warn(
                f"eps grid truncation may contribute error ~{left + right:.2e}; "
                "enlarge the grid half-width", GridTruncationWarning, stacklevel=3)


def delta_step(d: DeltaGrid, pair: DistributionPair) -> DeltaGrid:
    """One composition step of the recursion (k -> k+1)."""
    return _Stepper(pair, d.epsilons).step(d)


def compose_exact_dual(pair: DistributionPair, n: int,
                       eps_grid: np.ndarray | None = None) -> DeltaGrid:
    """delta_n on the grid: analytic delta_1, then n-1 recursion steps."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    grid = default_eps_grid(pair, n) if eps_grid is None else np.asarray(eps_grid, float)
    d = delta_one_grid(pair, grid)
    if n > 1:
        stepper = _Stepper(pair, grid)
        for _ in range(n - 1):
            d = stepper.step(d)
    return d


def compose_exact(pair: DistributionPair, n: int,
                  eps_grid: np.ndarray | None = None,
                  alpha_grid: np.ndarray | None = None) -> TradeoffCurve:
    """Composed trade-off curve via the dual recursion.

    Step 1 converts the pair to delta_1 on the grid, step 2 iterates the
    recursion, step 3 converts back through the supporting-line supremum over
    the full signed grid.
    """
    d = compose_exact_dual(pair, n, eps_grid)
    alphas = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, float)
    slopes = -np.minimum(np.exp(d.epsilons), 1e300)
    betas = support_lines_max(slopes[::-1], (1.0 - d.deltas)[::-1], alphas)
    return TradeoffCurve(alphas, np.clip(betas, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Checkpoint serialization
# ---------------------------------------------------------------------------

def write_delta_csv(d: DeltaGrid, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("eps,delta,k\n")
        for e, dl in zip(d.epsilons, d.deltas):
            fh.write(f"{format(e, '.17g')},{format(dl, '.17g')},{d.k}\n")


def read_delta_csv(path) -> DeltaGrid:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return DeltaGrid(data[:, 0], data[:, 1], k=int(data[0, 2]))
