"""Trade-off curve algebra: families, inversion, conjugation, duality."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import ndtr, ndtri

from fdp_accountant import curves
from fdp_accountant.errors import DegenerateCurveError, InvalidParameterError

GRID = 10_001


def lines_eps_delta(eps, delta, alphas):
    return np.maximum.reduce([
        np.zeros_like(alphas),
        1.0 - delta - np.exp(eps) * alphas,
        np.exp(-eps) * (1.0 - delta - alphas),
    ])


@st.composite
def family_curves(draw, grid_size=801):
    kind = draw(st.sampled_from(["identity", "gdp", "eps_delta", "mixture"]))
    if kind == "identity":
        return curves.identity_curve(grid_size)
    if kind == "gdp":
        return curves.gdp_curve(draw(st.floats(0.0, 3.0)), grid_size)
    if kind == "eps_delta":
        return curves.eps_delta_curve(draw(st.floats(0.0, 2.5)),
                                      draw(st.floats(0.0, 0.9)), grid_size)
    return curves.mixture_curve(draw(st.floats(0.0, 1.0)),
                                draw(st.floats(0.0, 3.0)), grid_size)


class TestFamilies:
    def test_gdp_zero_is_identity(self):
        c = curves.gdp_curve(0.0, GRID)
        assert np.allclose(c.betas, 1.0 - c.alphas, atol=1e-12)

    def test_gdp_one_at_half(self):
        c = curves.gdp_curve(1.0, GRID)
        assert c(0.5) == pytest.approx(ndtr(-1.0), abs=1e-12)

    def test_eps_delta_value(self):
        c = curves.eps_delta_curve(math.log(2.0), 0.1, GRID)
        assert c(0.3) == pytest.approx(0.3, abs=1e-12)

    def test_mixture_degenerate_weights(self):
        mu = 1.7
        assert np.allclose(curves.mixture_curve(1.0, mu, GRID).betas,
                           curves.gdp_curve(mu, GRID).betas, atol=1e-14)
        ident = curves.mixture_curve(0.0, mu, GRID)
        assert np.allclose(ident.betas, 1.0 - ident.alphas, atol=1e-14)

    def test_make_curve_dispatch(self):
        got = curves.make_curve("gdp", grid_size=501, mu=1.0)
        assert np.array_equal(got.betas, curves.gdp_curve(1.0, 501).betas)
        ident = curves.make_curve("identity", grid_size=501)
        assert np.allclose(ident.betas, 1.0 - ident.alphas)

    @pytest.mark.parametrize("family,params", [
        ("gdp", {"mu": -0.5}),
        ("eps_delta", {"eps": -1.0, "delta": 0.5}),
        ("eps_delta", {"eps": 1.0, "delta": 1.5}),
        ("mixture", {"p": 1.2, "mu": 1.0}),
        ("nope", {}),
    ])
    def test_invalid_parameters(self, family, params):
        with pytest.raises(InvalidParameterError):
            curves.make_curve(family, **params)

    def test_shape_invariants(self):
        for c in (curves.gdp_curve(2.0), curves.eps_delta_curve(1.0, 0.2),
                  curves.mixture_curve(0.3, 1.5)):
            assert c.alphas[0] == 0.0 and c.alphas[-1] == 1.0
            assert np.all(np.diff(c.betas) <= 0.0)
            assert c.betas.min() >= 0.0 and c.betas.max() <= 1.0

    def test_constructor_rejects_bad_data(self):
        a = np.linspace(0, 1, 11)
        with pytest.raises(DegenerateCurveError):
            curves.TradeoffCurve(a, np.linspace(0, 1, 11))  # increasing betas
        with pytest.raises(DegenerateCurveError):
            curves.TradeoffCurve(a + 0.1, 1.0 - a)


class TestInverse:
    def test_identity_self_inverse(self):
        c = curves.identity_curve(GRID)
        assert np.allclose(curves.curve_inverse(c).betas, c.betas, atol=1e-12)

    def test_gdp_self_inverse(self):
        # The inverse of the sampled curve deviates from the curve by the
        # interpolation error amplified where the curve is flat, well inside
        # one grid cell.
        c = curves.gdp_curve(1.5, GRID)
        assert np.max(np.abs(curves.curve_inverse(c).betas - c.betas)) < c.grid_spacing

    def test_eps_delta_self_inverse_against_bruteforce(self):
        # Oracle: inf{t : f(t) <= a} by direct scan on a dense grid.
        eps, delta = 0.8, 0.15
        c = curves.eps_delta_curve(eps, delta, 2001)
        dense = np.linspace(0.0, 1.0, 400_001)
        fdense = lines_eps_delta(eps, delta, dense)
        inv = curves.curve_inverse(c)
        for a in (0.0, 0.05, 0.2, 0.5, 0.85):
            oracle = dense[np.argmax(fdense <= a)]
            assert inv(a) == pytest.approx(oracle, abs=2 * c.grid_spacing)
        # The family is exactly self-inverse; the sampled one is, up to the
        # off-grid kink positions.
        assert np.max(np.abs(inv.betas - c.betas)) < c.grid_spacing

    @given(family_curves())
    @settings(max_examples=40, deadline=None)
    def test_involution_on_convex_curves(self, c):
        back = curves.curve_inverse(curves.curve_inverse(c))
        cell = c.grid_spacing
        assert np.max(np.abs(back.betas - c.betas)) <= cell + 1e-9


class TestConjugateAndSymmetrize:
    def test_line_is_its_own_envelope(self):
        c = curves.identity_curve(GRID)
        assert np.allclose(curves.double_conjugate(c).betas, c.betas, atol=1e-12)

    def test_gdp_already_convex(self):
        c = curves.gdp_curve(1.0, GRID)
        assert np.max(np.abs(curves.double_conjugate(c).betas - c.betas)) < 1e-12

    def test_envelope_of_crossing_curves_matches_bruteforce_hull(self):
        grid = 201
        a = curves.default_alpha_grid(grid)
        b = np.minimum(lines_eps_delta(0.3, 0.02, a), lines_eps_delta(1.5, 0.0, a))
        env = curves.double_conjugate(curves.TradeoffCurve(a, b))
        # Oracle: largest value at x attainable by a chord below all points.
        oracle = np.full(grid, -np.inf)
        for i in range(grid):
            for j in range(i + 1, grid):
                slope = (b[j] - b[i]) / (a[j] - a[i])
                chord = b[i] + slope * (a - a[i])
                if np.all(chord <= b + 1e-12):
                    oracle = np.maximum(oracle, chord)
        assert np.max(np.abs(env.betas - oracle)) < 1e-9

    def test_envelope_below_and_convex(self):
        a = curves.default_alpha_grid(501)
        b = np.minimum(lines_eps_delta(0.5, 0.1, a), lines_eps_delta(2.0, 0.0, a))
        env = curves.double_conjugate(curves.TradeoffCurve(a, b))
        assert np.all(env.betas <= b + 1e-12)
        second = np.diff(env.betas, 2)
        assert np.all(second >= -1e-9)

    @given(family_curves())
    @settings(max_examples=40, deadline=None)
    def test_symmetrize_is_self_inverse_and_dominated(self, c):
        s = curves.symmetrize(c)
        inv_s = curves.curve_inverse(s)
        tol = 3.0 * c.grid_spacing
        assert np.max(np.abs(s.betas - inv_s.betas)) <= tol
        assert np.all(s.betas <= c.betas + 1e-9)
        assert np.all(s.betas <= curves.curve_inverse(c).betas + 1e-9)


class TestDuality:
    def test_identity_dual(self):
        eps = np.linspace(-2.0, 2.0, 801)
        d = curves.primal_to_dual(curves.identity_curve(GRID), eps)
        expect = np.maximum(1.0 - np.exp(eps), 0.0)
        assert np.max(np.abs(d.deltas - expect)) < 1e-9

    def test_eps_delta_dual_recovers_delta(self):
        eps0, delta0 = 1.2, 0.07
        d = curves.primal_to_dual(curves.eps_delta_curve(eps0, delta0, GRID),
                                  np.array([0.0, eps0, 2 * eps0]))
        assert d.deltas[1] == pytest.approx(delta0, abs=1e-9)

    def test_gdp_dual_value(self):
        d = curves.primal_to_dual(curves.gdp_curve(1.0, GRID),
                                  np.linspace(-4, 4, 1601))
        expect = ndtr(-0.5) - math.e * ndtr(-1.5)
        assert float(d(1.0)) == pytest.approx(expect, abs=1e-6)

    def test_dual_lower_bound_invariant(self):
        eps = np.linspace(-3, 3, 601)
        for c in (curves.gdp_curve(0.7), curves.eps_delta_curve(0.5, 0.1),
                  curves.mixture_curve(0.4, 2.0)):
            d = curves.primal_to_dual(c, eps)
            assert np.all(d.deltas >= np.maximum(1.0 - np.exp(eps), 0.0) - 1e-9)

    def test_dual_to_primal_perfect_privacy(self):
        eps = np.linspace(-4.0, 4.0, 1601)
        d = curves.DualCurve(eps, np.maximum(1.0 - np.exp(eps), 0.0))
        f = curves.dual_to_primal(d, curves.default_alpha_grid(2001))
        assert np.max(np.abs(f.betas - (1.0 - f.alphas))) < 1e-9

    def test_single_supporting_line(self):
        d = curves.DualCurve(np.array([0.5]), np.array([0.1]))
        f = curves.dual_to_primal(d, curves.default_alpha_grid(2001))
        expect = np.maximum(0.0, 1.0 - 0.1 - np.exp(0.5) * f.alphas)
        assert np.max(np.abs(f.betas - expect)) < 1e-12

    def test_gdp_round_trip(self):
        c = curves.gdp_curve(1.0, GRID)
        back = curves.dual_to_primal(curves.primal_to_dual(c), c.alphas)
        assert np.max(np.abs(back.betas - c.betas)) <= 2.0 * c.grid_spacing

    @given(st.floats(0.2, 2.0), st.floats(0.2, 2.0))
    @settings(max_examples=30, deadline=None)
    def test_monotone_privacy_order(self, mu_small, bump):
        eps = np.linspace(-3, 3, 301)
        lower = curves.gdp_curve(mu_small + bump, 801)   # less private, smaller f
        upper = curves.gdp_curve(mu_small, 801)
        d_low = curves.primal_to_dual(lower, eps)
        d_up = curves.primal_to_dual(upper, eps)
        assert np.all(d_low.deltas >= d_up.deltas - 1e-12)


class TestScalars:
    def test_area_identity(self):
        assert curves.area_under_curve(curves.identity_curve(GRID)) == pytest.approx(0.5, abs=1e-15)

    def test_area_blatantly_non_private(self):
        assert curves.area_under_curve(curves.eps_delta_curve(0.0, 1.0, GRID)) == 0.0

    def test_area_gdp_one_against_quadrature(self):
        oracle, _ = integrate.quad(lambda a: ndtr(ndtri(1.0 - a) - 1.0), 0.0, 1.0)
        area = curves.area_under_curve(curves.gdp_curve(1.0, GRID))
        assert area == pytest.approx(oracle, abs=1e-6)
        assert oracle == pytest.approx(ndtr(-1.0 / math.sqrt(2.0)), abs=1e-10)

    def test_fixed_point_identity(self):
        assert curves.fixed_point(curves.identity_curve(GRID)) == pytest.approx(0.5, abs=1e-12)

    def test_fixed_point_gdp(self):
        # Oracle: solve Phi(Phi^-1(1-a) - 1) = a by bisection on the closed form.
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if ndtr(ndtri(1.0 - mid) - 1.0) > mid:
                lo = mid
            else:
                hi = mid
        oracle = 0.5 * (lo + hi)
        assert oracle == pytest.approx(ndtr(-0.5), abs=1e-12)
        got = curves.fixed_point(curves.gdp_curve(1.0, GRID))
        assert got == pytest.approx(oracle, abs=1e-9)

    def test_fixed_point_eps_delta(self):
        got = curves.fixed_point(curves.eps_delta_curve(0.0, 0.2, GRID))
        assert got == pytest.approx(0.4, abs=1e-10)

    def test_fixed_point_residual(self):
        for c in (curves.gdp_curve(2.5), curves.mixture_curve(0.5, 1.0)):
            # Unrefined root: residual against the piecewise-linear curve.
            a_pl = curves.fixed_point(c, refine=False)
            assert abs(float(c(a_pl)) - a_pl) < 1e-10
            # Refined root: agrees with the unrefined one to within the
            # interpolation error of one cell.
            a_star = curves.fixed_point(c)
            assert abs(a_star - a_pl) < c.grid_spacing
            assert abs(float(c(a_star)) - a_star) < 1e-6

    @pytest.mark.parametrize("mu", [0.5, 1.5])
    def test_scalars_stable_under_refinement(self, mu):
        coarse = curves.gdp_curve(mu, 2001)
        fine = curves.gdp_curve(mu, 4001)
        assert abs(curves.area_under_curve(coarse) - curves.area_under_curve(fine)) \
            <= coarse.grid_spacing
        assert abs(curves.fixed_point(coarse) - curves.fixed_point(fine)) \
            <= coarse.grid_spacing


class TestSerialization:
    def test_curve_round_trip(self, tmp_path):
        c = curves.gdp_curve(1.3, 501)
        path = tmp_path / "curve.csv"
        curves.write_curve_csv(c, path)
        back = curves.read_curve_csv(path)
        assert np.array_equal(back.alphas, c.alphas)
        assert np.array_equal(back.betas, c.betas)
        assert path.read_text().splitlines()[0] == "alpha,beta"

    def test_dual_round_trip(self, tmp_path):
        d = curves.primal_to_dual(curves.gdp_curve(1.0, 501),
                                  np.linspace(-2, 2, 101))
        path = tmp_path / "dual.csv"
        curves.write_dual_csv(d, path)
        back = curves.read_dual_csv(path)
        assert np.array_equal(back.epsilons, d.epsilons)
        assert np.array_equal(back.deltas, d.deltas)
