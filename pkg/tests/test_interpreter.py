"""Two-parameter summary and the induced partial privacy order."""

import math

import numpy as np
import pytest
from scipy.special import ndtr

from fdp_accountant import curves, interpreter
from fdp_accountant.curves import PrivacyParams
from fdp_accountant.errors import AsymmetricCurveError, InvalidParameterError
from fdp_accountant.interpreter import Ordering


class TestInterpret:
    def test_identity(self):
        params = interpreter.interpret(curves.identity_curve())
        assert params.mu_star == pytest.approx(0.0, abs=1e-9)
        assert params.gamma == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("mu", [0.25, 0.5, 1.0, 2.0, 4.0])
    def test_gdp_recovers_mu(self, mu):
        params = interpreter.interpret(curves.gdp_curve(mu))
        assert params.mu_star == pytest.approx(mu, abs=1e-8)

    def test_gdp_gamma(self):
        params = interpreter.interpret(curves.gdp_curve(1.0))
        assert params.gamma == pytest.approx(ndtr(-1.0 / math.sqrt(2.0)), abs=1e-6)

    def test_gamma_range(self):
        for mu in (0.0, 0.5, 2.0, 5.0):
            params = interpreter.interpret(curves.gdp_curve(mu))
            assert 0.0 <= params.gamma <= 0.5 + 1e-12

    def test_asymmetric_input_rejected(self):
        # A single one-sided supporting line is visibly asymmetric.
        alphas = curves.default_alpha_grid(2001)
        betas = np.maximum(0.0, 1.0 - 0.05 - math.e * alphas)
        with pytest.raises(AsymmetricCurveError):
            interpreter.interpret(curves.TradeoffCurve(alphas, betas))

    def test_params_validation(self):
        with pytest.raises(InvalidParameterError):
            PrivacyParams(mu_star=-1.0, gamma=0.3)
        with pytest.raises(InvalidParameterError):
            PrivacyParams(mu_star=1.0, gamma=0.7)


class TestCompare:
    def test_more_private(self):
        a = PrivacyParams(1.0, 0.30)
        b = PrivacyParams(0.5, 0.35)
        assert interpreter.compare(a, b) is Ordering.MORE_PRIVATE
        assert interpreter.compare(b, a) is Ordering.LESS_PRIVATE

    def test_incomparable(self):
        a = PrivacyParams(1.0, 0.30)
        b = PrivacyParams(0.5, 0.25)
        assert interpreter.compare(a, b) is Ordering.INCOMPARABLE

    def test_equal(self):
        a = PrivacyParams(1.0, 0.30)
        assert interpreter.compare(a, PrivacyParams(1.0, 0.30)) is Ordering.EQUAL

    def test_dominance_never_less_private(self):
        # Pointwise-dominating symmetric curves never compare as less private.
        rng = np.random.default_rng(11)
        for _ in range(25):
            mu_hi = rng.uniform(0.2, 3.0)
            mu_lo = mu_hi * rng.uniform(0.3, 1.0)
            big = interpreter.interpret(curves.gdp_curve(mu_lo))    # dominates
            small = interpreter.interpret(curves.gdp_curve(mu_hi))
            assert interpreter.compare(small, big) in (Ordering.MORE_PRIVATE,
                                                       Ordering.INCOMPARABLE,
                                                       Ordering.EQUAL)
