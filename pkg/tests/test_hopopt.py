"""Hop-distance optimization: stationary points, scaling laws, limits."""

import math

import numpy as np
import pytest

from conftest import bisect_scalar, make_rng
from hopcap.errors import DiscreteKindError, NoStationaryPoint
from hopcap.fading import FadingModel
from hopcap import hopopt

# mpmath quadrature + Newton oracle for the exponential stationary point
EXP_ETA2_LAMBDA = 0.25894690868039507
EXP_ETA2_PI = 1.9637611488840108
EXP_ETA2_GAMMA = 1.0170197577803513
EXP_ETA3_LAMBDA = 0.048683201717148424
# plain bisection on log(1+pi) = 3*pi/(1+pi)
SINGLE_STATE_ETA3_PI = 15.801016190708335

EXP_MODEL = FadingModel.exponential(1.0)
FIG1 = FadingModel.discrete([(100.0, 0.01), (0.5, 0.99)])


def exp_problem(eta=2.0, pt=1.0):
    return hopopt.HopProblem(model=EXP_MODEL, eta=eta, pt_prime=pt)


def fig1_problem(pt=1.0):
    return hopopt.HopProblem(model=FIG1, eta=3.0, pt_prime=pt)


class TestPsi:
    def test_single_state_value(self):
        problem = hopopt.HopProblem(
            model=FadingModel.discrete([(1.0, 1.0)]), eta=3.0, pt_prime=1.0
        )
        assert hopopt.psi(problem, 1.0) == pytest.approx(math.log(2.0), rel=1e-12)

    def test_exponential_positive_and_vanishing_at_ends(self):
        problem = exp_problem()
        ds = np.geomspace(0.05, 50.0, 400)
        vals = np.array([hopopt.psi(problem, float(d)) for d in ds])
        assert np.all(vals >= 0)
        # single interior peak; decay toward both ends is log-slow, so only
        # the direction and a coarse drop are asserted on this window
        assert np.all(np.diff(vals[:20]) > 0) and vals[0] < 0.5 * vals.max()
        assert np.all(np.diff(vals[-20:]) < 0) and vals[-1] < 0.5 * vals.max()

    def test_fig1_stationary_points_are_flat(self):
        problem = fig1_problem()
        sset = hopopt.stationary_points(problem)
        for pt in sset.points:
            h = 1e-6 * pt.d
            slope = (hopopt.psi(problem, pt.d + h) - hopopt.psi(problem, pt.d - h)) / (2 * h)
            assert abs(slope) < 1e-4 * pt.psi / pt.d

    def test_near_field_warning(self):
        problem = hopopt.HopProblem(model=EXP_MODEL, eta=2.0, pt_prime=1.0, d0=1.0)
        with pytest.warns(hopopt.NearFieldWarning):
            hopopt.psi(problem, 0.5)

    def test_low_eta_warning(self):
        with pytest.warns(hopopt.EtaBelowTwoWarning):
            hopopt.HopProblem(model=EXP_MODEL, eta=1.5, pt_prime=1.0)


class TestStationaryPoints:
    def test_fig1_has_three(self):
        sset = hopopt.stationary_points(fig1_problem())
        assert len(sset.points) == 3

    def test_exponential_eta2_unique_against_oracle(self):
        sset = hopopt.stationary_points(exp_problem())
        assert len(sset.points) == 1
        assert sset.unique
        point = sset.points[0]
        assert point.lam == pytest.approx(EXP_ETA2_LAMBDA, rel=1e-9)
        assert point.pi == pytest.approx(EXP_ETA2_PI, rel=1e-9)
        assert point.gamma == pytest.approx(EXP_ETA2_GAMMA, rel=1e-9)

    def test_single_state_root_against_bisection_oracle(self):
        root = bisect_scalar(lambda p: math.log1p(p) - 3 * p / (1 + p), 1.0, 1e3)
        assert root == pytest.approx(SINGLE_STATE_ETA3_PI, rel=1e-10)
        problem = hopopt.HopProblem(
            model=FadingModel.discrete([(1.0, 1.0)]), eta=3.0, pt_prime=1.0
        )
        sset = hopopt.stationary_points(problem)
        assert len(sset.points) == 1
        assert sset.points[0].pi == pytest.approx(root, rel=1e-8)

    def test_residual_bound_at_every_point(self):
        for problem in (exp_problem(), exp_problem(eta=3.0), fig1_problem()):
            for pt in hopopt.stationary_points(problem).points:
                residual = hopopt.stationary_residual(problem, pt.pi)
                assert abs(residual) < 1e-8 * max(pt.gamma, 1e-12)

    def test_psi_derivative_identity(self):
        rng = make_rng(77)
        problem = exp_problem()
        for _ in range(50):
            d = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
            h = 1e-6 * d
            fd = (hopopt.psi(problem, d + h) - hopopt.psi(problem, d - h)) / (2 * h)
            analytic = hopopt.stationary_residual(problem, problem.pi_of_d(d))
            assert fd == pytest.approx(analytic, rel=1e-4, abs=1e-10)


class TestRecharacterisation:
    def test_weight_vanishes_at_one(self):
        assert hopopt.stationarity_weight(1.0, 2.0) == 0.0
        assert hopopt.stationarity_weight(1.0, 3.7) == 0.0

    def test_exponential_eta2_cross_checks(self):
        lam = hopopt.solve_rechar(exp_problem())
        assert lam == pytest.approx(EXP_ETA2_LAMBDA, rel=1e-6)

    def test_exponential_eta3_has_root(self):
        lam = hopopt.solve_rechar(exp_problem(eta=3.0))
        assert lam == pytest.approx(EXP_ETA3_LAMBDA, rel=1e-6)

    def test_rejects_discrete(self):
        with pytest.raises(DiscreteKindError):
            hopopt.solve_rechar(fig1_problem())

    def test_tabulated_exponential_close_to_analytic(self):
        h = np.linspace(0.0, 25.0, 2001)
        a = np.exp(-h)
        a /= np.trapezoid(a, h)
        model = FadingModel.tabulated(h, a)
        problem = hopopt.HopProblem(model=model, eta=2.0, pt_prime=1.0)
        lam = hopopt.solve_rechar(problem)
        assert lam == pytest.approx(EXP_ETA2_LAMBDA, rel=1e-4)


class TestMonotonicityCondition:
    def test_exponential_certifies(self):
        assert hopopt.check_monotonicity_condition(EXP_MODEL)
        assert hopopt.check_monotonicity_condition(FadingModel.exponential(0.2, 3.0))

    def test_discrete_rejected(self):
        with pytest.raises(DiscreteKindError):
            hopopt.check_monotonicity_condition(FIG1)

    def test_tabulated_uniform_records_a_boolean(self):
        model = FadingModel.tabulated(np.linspace(0.5, 1.5, 101), np.ones(101))
        # compact support cannot be certified; no ground truth asserted
        assert hopopt.check_monotonicity_condition(model) in (True, False)

    def test_certified_plus_limits_means_one_point(self):
        for eta in (2.0, 3.0):
            for rate in (0.5, 1.0, 2.0):
                model = FadingModel.exponential(rate)
                problem = hopopt.HopProblem(model=model, eta=eta, pt_prime=1.0)
                assert hopopt.check_monotonicity_condition(model)
                limits = hopopt.boundary_limits(problem)
                assert limits.zero_ok and limits.infinity_ok
                assert len(hopopt.stationary_points(problem).points) == 1


class TestScaling:
    def test_exponential_eta2_factor4(self):
        check = hopopt.scaling_check(exp_problem(), 4.0)
        assert check.d_ratio == pytest.approx(2.0, abs=1e-6)
        assert check.psi_ratio == pytest.approx(2.0, abs=1e-6)
        assert check.gamma_opt_delta < 1e-8

    def test_identity_factor(self):
        check = hopopt.scaling_check(exp_problem(), 1.0)
        assert check.d_ratio == 1.0
        assert check.psi_ratio == 1.0
        assert check.gamma_opt_delta == 0.0

    def test_fig1_factor8(self):
        check = hopopt.scaling_check(fig1_problem(), 8.0)
        assert check.d_ratio == pytest.approx(2.0, rel=1e-6)

    def test_pi_opt_invariant_across_factors(self):
        base = hopopt.stationary_points(exp_problem()).maximizer.pi
        for factor in (0.5, 2.0, 4.0, 9.0):
            scaled = hopopt.stationary_points(exp_problem(pt=factor)).maximizer.pi
            assert scaled == pytest.approx(base, rel=1e-6)

    def test_d_opt_power_law_across_models(self):
        for problem, eta in ((exp_problem(), 2.0), (fig1_problem(), 3.0)):
            base = hopopt.stationary_points(problem).maximizer.d
            for factor in (0.5, 2.0, 4.0, 9.0):
                check = hopopt.scaling_check(problem, factor)
                assert check.d_ratio == pytest.approx(factor ** (1 / eta), rel=1e-6)


class TestBoundaryLimits:
    def test_exponential(self):
        limits = hopopt.boundary_limits(exp_problem())
        assert limits.zero_ok is True
        assert limits.infinity_ok is True

    def test_fig1_discrete(self):
        limits = hopopt.boundary_limits(fig1_problem())
        assert limits.zero_ok is True
        assert limits.infinity_ok is True

    def test_heavy_tail_skips_infinity_side(self):
        h = np.geomspace(1.0, 1e4, 2001)
        a = h**-1.5
        a /= np.trapezoid(a, h)
        model = FadingModel.tabulated(h, a)
        problem = hopopt.HopProblem(model=model, eta=2.0, pt_prime=1.0)
        limits = hopopt.boundary_limits(problem)
        assert limits.infinity_ok is None
        assert limits.zero_ok is True


class TestLambdaScanWindow:
    def test_window_can_exclude_roots(self):
        with pytest.raises(NoStationaryPoint):
            hopopt.stationary_points(exp_problem(), pi_min=1e6, pi_max=1e8)

    def test_psi_strictly_positive(self):
        problem = exp_problem()
        for d in np.geomspace(1e-2, 1e2, 17):
            assert hopopt.psi(problem, float(d)) > 0.0

    def test_exponential_extremes_stay_bracketed(self):
        # pi_opt/nu depends only on eta, so wildly scaled rates and gains
        # must land on one normalized optimum without bracket failures
        for eta in (2.0, 4.0, 6.0):
            normalized = []
            for mu, c in ((1e-3, 0.1), (1.0, 1.0), (1e3, 10.0), (1e-3, 10.0)):
                model = FadingModel.exponential(mu, c)
                problem = hopopt.HopProblem(model=model, eta=eta, pt_prime=1.0)
                sset = hopopt.stationary_points(problem)
                assert len(sset.points) == 1 and sset.unique
                normalized.append(sset.points[0].pi / (mu / c))
            assert max(normalized) / min(normalized) - 1 < 1e-12
