"""Trade-off curves and their algebra.

A trade-off curve is a sampled decreasing convex function f: [0,1] -> [0,1]
mapping a type-I error level to the smallest achievable type-II error.  The
module provides the canonical families (identity, Gaussian, (eps, delta),
mixture), inversion, convexification, symmetrization, the conversion between
the curve and its (eps, delta) dual, and the scalar summaries used by the
two-parameter interpreter.

Curves are stored on a sorted alpha grid with linear interpolation between
samples, so suprema and conjugates reduce to vertex scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DegenerateCurveError, InvalidParameterError

DEFAULT_GRID_SIZE = 10_001
DEFAULT_EPS_GRID_SIZE = 2_001

# Slack for float dust when validating monotonicity at construction time.
_MONOTONE_SLACK = 1e-9


def default_alpha_grid(grid_size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    if grid_size < 2:
        raise InvalidParameterError(f"grid_size must be >= 2, got {grid_size}")
    return np.linspace(0.0, 1.0, grid_size)


@dataclass
class TradeoffCurve:
    """Sampled trade-off function with linear interpolation between nodes."""

    alphas: np.ndarray
    betas: np.ndarray
    symmetric_flag: bool | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        alphas = np.asarray(self.alphas, dtype=float)
        betas = np.asarray(self.betas, dtype=float)
        if alphas.ndim != 1 or alphas.shape != betas.shape or alphas.size < 2:
            raise DegenerateCurveError("alphas and betas must be equal-length 1-d arrays")
        if alphas[0] != 0.0 or alphas[-1] != 1.0 or np.any(np.diff(alphas) <= 0):
            raise DegenerateCurveError("alphas must increase strictly from 0 to 1")
        if np.any(betas < -_MONOTONE_SLACK) or np.any(betas > 1 + _MONOTONE_SLACK):
            raise DegenerateCurveError("betas must lie in [0, 1]")
        if np.any(np.diff(betas) > _MONOTONE_SLACK):
            raise DegenerateCurveError("betas must be non-increasing")
        betas = np.minimum.accumulate(np.clip(betas, 0.0, 1.0))
        alphas.flags.writeable = False
        betas.flags.writeable = False
        self.alphas = alphas
        self.betas = betas

    def __call__(self, alpha) -> np.ndarray | float:
        return np.interp(alpha, self.alphas, self.betas)

    @property
    def grid_spacing(self) -> float:
        return float(np.max(np.diff(self.alphas)))

    @property
    def is_symmetric(self) -> bool:
        if self.symmetric_flag is None:
            tol = 3.0 * self.grid_spacing
            inv = curve_inverse(self)
            self.symmetric_flag = bool(np.max(np.abs(self.betas - inv.betas)) <= tol)
        return self.symmetric_flag


@dataclass
class DualCurve:
    """delta(eps) samples of the (eps, delta)-DP dual of a trade-off curve."""

    epsilons: np.ndarray
    deltas: np.ndarray

    def __post_init__(self) -> None:
        eps = np.asarray(self.epsilons, dtype=float)
        deltas = np.asarray(self.deltas, dtype=float)
        if eps.ndim != 1 or eps.shape != deltas.shape or eps.size < 1:
            raise DegenerateCurveError("epsilons and deltas must be equal-length 1-d arrays")
        if np.any(np.diff(eps) <= 0):
            raise DegenerateCurveError("epsilons must be strictly increasing")
        if np.any(deltas < -_MONOTONE_SLACK) or np.any(deltas > 1 + _MONOTONE_SLACK):
            raise DegenerateCurveError("deltas must lie in [0, 1]")
        if np.any(np.diff(deltas) > _MONOTONE_SLACK):
            raise DegenerateCurveError("deltas must be non-increasing in eps")
        deltas = np.minimum.accumulate(np.clip(deltas, 0.0, 1.0))
        eps.flags.writeable = False
        deltas.flags.writeable = False
        self.epsilons = eps
        self.deltas = deltas

    def __call__(self, eps) -> np.ndarray | float:
        return np.interp(eps, self.epsilons, self.deltas)


@dataclass(frozen=True)
class PrivacyParams:
    """Two-parameter summary of a symmetric curve: GDP fixed-point parameter
    and area under the curve."""

    mu_star: float
    gamma: float

    def __post_init__(self) -> None:
        if not (self.mu_star >= 0.0):
            raise InvalidParameterError(f"mu_star must be >= 0, got {self.mu_star}")
        if not (-1e-12 <= self.gamma <= 0.5 + 1e-12):
            raise InvalidParameterError(f"gamma must lie in [0, 1/2], got {self.gamma}")


# ---------------------------------------------------------------------------
# Canonical families
# ---------------------------------------------------------------------------

def identity_curve(grid_size: int = DEFAULT_GRID_SIZE) -> TradeoffCurve:
    """Perfect privacy: f(alpha) = 1 - alpha."""
    alphas = default_alpha_grid(grid_size)
    return TradeoffCurve(alphas, 1.0 - alphas, symmetric_flag=True)


def gdp_curve(mu: float, grid_size: int = DEFAULT_GRID_SIZE) -> TradeoffCurve:
    """Gaussian trade-off G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu)."""
    if not (mu >= 0.0):
        raise InvalidParameterError(f"mu must be >= 0, got {mu}")
    alphas = default_alpha_grid(grid_size)
    betas = np.empty_like(alphas)
    betas[0] = 1.0
    betas[-1] = 0.0
    inner = alphas[1:-1]
    betas[1:-1] = ndtr(ndtri(1.0 - inner) - mu)
    return TradeoffCurve(alphas, betas, symmetric_flag=True)


def eps_delta_curve(eps: float, delta: float, grid_size: int = DEFAULT_GRID_SIZE) -> TradeoffCurve:
    """Trade-off of an (eps, delta)-DP guarantee:
    max{0, 1 - delta - e^eps a, e^{-eps}(1 - delta - a)}."""
    if not (eps >= 0.0):
        raise InvalidParameterError(f"eps must be >= 0, got {eps}")
    if not (0.0 <= delta <= 1.0):
        raise InvalidParameterError(f"delta must lie in [0, 1], got {delta}")
    alphas = default_alpha_grid(grid_size)
    betas = np.maximum.reduce([
        np.zeros_like(alphas),
        1.0 - delta - np.exp(eps) * alphas,
        np.exp(-eps) * (1.0 - delta - alphas),
    ])
    return TradeoffCurve(alphas, betas, symmetric_flag=True)


def mixture_curve(p: float, mu: float, grid_size: int = DEFAULT_GRID_SIZE) -> TradeoffCurve:
    """Subsampling mixture p*G_mu + (1-p)*Id."""
    if not (0.0 <= p <= 1.0):
        raise InvalidParameterError(f"p must lie in [0, 1], got {p}")
    gdp = gdp_curve(mu, grid_size)
    betas = p * gdp.betas + (1.0 - p) * (1.0 - gdp.alphas)
    return TradeoffCurve(gdp.alphas, betas)


def make_curve(family: str, grid_size: int = DEFAULT_GRID_SIZE, **params) -> TradeoffCurve:
    """Build a named curve family; accepted names: identity, gdp, eps_delta, mixture."""
    builders = {
        "identity": identity_curve,
        "gdp": gdp_curve,
        "eps_delta": eps_delta_curve,
        "mixture": mixture_curve,
    }
    if family not in builders:
        raise InvalidParameterError(
            f"unknown family {family!r}; expected one of {sorted(builders)}")
    return builders[family](grid_size=grid_size, **params)


# ---------------------------------------------------------------------------
# Curve algebra
# ---------------------------------------------------------------------------

def curve_inverse(f: TradeoffCurve) -> TradeoffCurve:
    """f^{-1}(alpha) = inf{t in [0,1] : f(t) <= alpha}, sampled on f's grid."""
    inv = _inverse_values(f.alphas, f.betas, f.alphas)
    return TradeoffCurve(f.alphas, inv)


def _inverse_values(alphas: np.ndarray, betas: np.ndarray, query: np.ndarray) -> np.ndarray:
    # First index with beta <= q; flat runs resolve to the leftmost crossing.
    neg = -betas
    idx = np.searchsorted(neg, -np.asarray(query, dtype=float), side="left")
    out = np.empty(len(query), dtype=float)
    out[idx == 0] = 0.0
    out[idx == len(alphas)] = 1.0  # level below f(1); inf over an empty set
    mid = (idx > 0) & (idx < len(alphas))
    i = idx[mid]
    b_hi, b_lo = betas[i - 1], betas[i]
    q = np.asarray(query, dtype=float)[mid]
    frac = (b_hi - q) / (b_hi - b_lo)
    out[mid] = alphas[i - 1] + frac * (alphas[i] - alphas[i - 1])
    return np.minimum.accumulate(np.clip(out, 0.0, 1.0))


def _lower_hull(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the greatest convex minorant of the sampled points
    (Andrew monotone chain, lower hull)."""
    hx: list[float] = []
    hy: list[float] = []
    for xi, yi in zip(x, y):
        while len(hx) >= 2 and (
            (hx[-1] - hx[-2]) * (yi - hy[-2]) - (hy[-1] - hy[-2]) * (xi - hx[-2]) <= 0.0
        ):
            hx.pop()
            hy.pop()
        hx.append(float(xi))
        hy.append(float(yi))
    return np.array(hx), np.array(hy)


def double_conjugate(f: TradeoffCurve) -> TradeoffCurve:
    """Greatest convex minorant of f on its grid (the biconjugate f**)."""
    hx, hy = _lower_hull(f.alphas, f.betas)
    betas = np.interp(f.alphas, hx, hy)
    betas = np.minimum(betas, f.betas)  # the envelope never exceeds the data
    return TradeoffCurve(f.alphas, betas)


def symmetrize(f: TradeoffCurve) -> TradeoffCurve:
    """min{f, f^{-1}}**: the symmetric convex curve dominated by f and f^{-1}."""
    inv = curve_inverse(f)
    mixed = TradeoffCurve(f.alphas, np.minimum(f.betas, inv.betas))
    out = double_conjugate(mixed)
    out.symmetric_flag = True
    return out


def default_dual_grid(eps_max: float = 10.0,
                      grid_size: int = DEFAULT_EPS_GRID_SIZE) -> np.ndarray:
    return np.linspace(-eps_max, eps_max, grid_size)


def support_lines_max(slopes: np.ndarray, intercepts: np.ndarray,
                      queries: np.ndarray) -> np.ndarray:
    """max_j (intercepts[j] + slopes[j] * x) at each query point.

    ``slopes`` must be non-decreasing.  The upper envelope is built with a
    monotone stack, then evaluated by binary search, so the cost is
    O(lines + queries log lines) instead of a dense cross product.
    """
    sm: list[float] = []
    sb: list[float] = []
    brk: list[float] = []  # brk[i]: x from which line i beats line i-1
    for m, b in zip(slopes, intercepts):
        while sm:
            if m == sm[-1]:
                if b <= sb[-1]:
                    break
                sm.pop(); sb.pop(); brk.pop()
                continue
            x = (sb[-1] - b) / (m - sm[-1])
            if x <= brk[-1]:
                sm.pop(); sb.pop(); brk.pop()
                continue
            sm.append(m); sb.append(b); brk.append(x)
            break
        else:
            sm.append(m); sb.append(b); brk.append(-math.inf)
    idx = np.clip(np.searchsorted(np.asarray(brk), queries, side="right") - 1,
                  0, len(sm) - 1)
    return np.asarray(sb)[idx] + np.asarray(sm)[idx] * queries


def _conjugate_grid_for(hx: np.ndarray, hy: np.ndarray) -> np.ndarray:
    # Uniform grid covering the hull's slope range, joined with the log of
    # every edge slope: the conjugate of a piecewise-linear curve is captured
    # exactly at those points, which makes the dual round trip sharp.
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.diff(hy) / np.diff(hx)
    edge_eps = np.log(-slopes[slopes < 0.0])
    edge_eps = np.clip(edge_eps, -40.0, 40.0)
    half = 2.0
    if edge_eps.size:
        half = max(half, float(np.max(np.abs(edge_eps))))
    half = min(half + 1.0, 40.0)
    base = np.linspace(-half, half, DEFAULT_EPS_GRID_SIZE)
    return np.unique(np.concatenate([base, edge_eps]))


def primal_to_dual(f: TradeoffCurve, eps_grid: np.ndarray | None = None) -> DualCurve:
    """delta(eps) = 1 + f*(-e^eps), the convex conjugate evaluated on a grid.

    The supremum is taken over the vertices of the lower convex hull of f,
    which is exact for the piecewise-linear interpolant: in the variable
    t = e^eps the vertices are support lines with slopes -x.  The default
    grid spans the curve's own slope range and includes every edge slope.
    """
    hx, hy = _lower_hull(f.alphas, f.betas)
    eps = (_conjugate_grid_for(hx, hy) if eps_grid is None
           else np.asarray(eps_grid, dtype=float))
    t = np.minimum(np.exp(eps), 1e300)
    deltas = support_lines_max(-hx[::-1], (1.0 - hy)[::-1], t)
    deltas = np.minimum.accumulate(np.clip(deltas, 0.0, 1.0))
    return DualCurve(eps, deltas)


def dual_to_primal(d: DualCurve, alpha_grid: np.ndarray | None = None) -> TradeoffCurve:
    """f(alpha) = max over the eps grid of 1 - delta(eps) - e^eps alpha, clamped at 0."""
    alphas = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    slopes = -np.minimum(np.exp(d.epsilons), 1e300)
    betas = support_lines_max(slopes[::-1], (1.0 - d.deltas)[::-1], alphas)
    return TradeoffCurve(alphas, np.clip(betas, 0.0, 1.0))


def area_under_curve(f: TradeoffCurve) -> float:
    """Trapezoidal integral of the curve over [0, 1]."""
    return float(np.trapezoid(f.betas, f.alphas))


def fixed_point(f: TradeoffCurve, *, refine: bool = True) -> float:
    """The unique alpha* with f(alpha*) = alpha*, located by bisection.

    On smooth neighborhoods the piecewise-linear root is polished against a
    local cubic through the four surrounding nodes; linear interpolation alone
    cannot resolve alpha* well enough for steep curves.  Kinked neighborhoods
    keep the piecewise-linear root.
    """
    if f.betas[0] < 0.0:
        raise DegenerateCurveError("cannot bracket: f(0) < 0 after clamping")
    lo, hi = 0.0, 1.0  # g(0) = f(0) >= 0 and g(1) = f(1) - 1 <= 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = float(f(mid)) - mid
        if g > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    root = 0.5 * (lo + hi)
    if refine:
        refined = _refine_fixed_point(f, root)
        if refined is not None:
            root = refined
    return root


def _refine_fixed_point(f: TradeoffCurve, root: float) -> float | None:
    a, b = f.alphas, f.betas
    cell = int(np.clip(np.searchsorted(a, root) - 1, 0, len(a) - 2))
    i0 = int(np.clip(cell - 1, 0, len(a) - 4))
    x = a[i0:i0 + 4]
    y = b[i0:i0 + 4]
    slopes = np.diff(y) / np.diff(x)
    c1, c2 = slopes[1] - slopes[0], slopes[2] - slopes[1]
    # Curvature must vary slowly across the window, otherwise a node kink
    # sits nearby and the cubic would overshoot.
    if abs(c1 - c2) > 0.25 * (abs(c1) + abs(c2)) + 1e-12:
        return None
    h = float(x[-1] - x[0])
    xs = (x - root) / h  # rescale for a well-conditioned Vandermonde solve
    coeffs = np.linalg.solve(np.vander(xs, 4), y)

    def g(t: float) -> float:
        return float(np.polyval(coeffs, (t - root) / h)) - t

    glo, ghi = g(x[0]), g(x[-1])
    if glo < 0.0 or ghi > 0.0:
        return None
    lo, hi = float(x[0]), float(x[-1])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    return 0.5 * (lo + hi)


def sup_distance(f: TradeoffCurve, g: TradeoffCurve) -> float:
    """Sup-norm distance between two curves, evaluated on the union grid."""
    grid = np.union1d(f.alphas, g.alphas)
    return float(np.max(np.abs(np.interp(grid, f.alphas, f.betas)
                               - np.interp(grid, g.alphas, g.betas))))


# ---------------------------------------------------------------------------
# Serialization (17 significant digits, LF line endings)
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_curve_csv(f: TradeoffCurve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("alpha,beta\n")
        for a, b in zip(f.alphas, f.betas):
            fh.write(f"{_fmt(a)},{_fmt(b)}\n")


def read_curve_csv(path) -> TradeoffCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return TradeoffCurve(data[:, 0], data[:, 1])


def write_dual_csv(d: DualCurve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("eps,delta\n")
        for e, dl in zip(d.epsilons, d.deltas):
            fh.write(f"{_fmt(e)},{_fmt(dl)}\n")


def read_dual_csv(path) -> DualCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return DualCurve(data[:, 0], data[:, 1])
