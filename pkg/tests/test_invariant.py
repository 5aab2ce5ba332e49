import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from oscinv import (
    PhaseState,
    classical_rhs,
    coefficient_ode_residuals,
    coefficients_at,
    conserved_coupling,
    integrate_classical,
    invariant_along_trajectory,
    invariant_value,
)
from oscinv.errors import DomainError
from oscinv.schedules import ExprSchedule


class TestCoefficients:
    def test_s1_values(self, s1):
        c = coefficients_at(0.0, s1)
        assert c.alpha == pytest.approx((1.0, 1.0))
        assert c.beta == pytest.approx((0.0, 0.0))
        assert c.gamma == pytest.approx((1.0, 1.0))
        assert c.delta == pytest.approx(0.2)

    def test_beta_vanishes_without_drag_and_breathing(self, s1):
        # b = 0 and rho' = 0 kill both terms of beta
        c = coefficients_at(7.3, s1)
        assert c.beta == (0.0, 0.0)

    def test_invariant_identity_pointwise(self, s2, s3, rng):
        # alpha gamma - beta^2 = (alpha0 Omega / 2)^2 at every time
        for sc in (s2, s3):
            lo, hi = sc.domain
            times = rng.uniform(lo, hi, size=100)
            c = coefficients_at(times, sc)
            for j in range(2):
                target = (sc.constants.alpha0[j] * sc.constants.Omega[j] / 2.0) ** 2
                lhs = c.alpha[j] * c.gamma[j] - c.beta[j] ** 2
                assert np.max(np.abs(lhs - target) / target) < 1e-10

    def test_domain_enforced(self, s1):
        with pytest.raises(DomainError):
            coefficients_at(1e6, s1)


class TestCoefficientOdeResiduals:
    def test_static_scenario_is_exact(self, s1):
        res = coefficient_ode_residuals(1.0, s1, h=1e-4)
        assert res.max() < 1e-8

    def test_breathing_scenario_small(self, s2):
        res = coefficient_ode_residuals(1.0, s2, h=1e-4)
        assert res.max() < 1e-6

    def test_second_order_in_h(self, s2):
        # FD-dominated regime: halving h divides the defect by ~4
        r1 = coefficient_ode_residuals(1.0, s2, h=2e-3).max()
        r2 = coefficient_ode_residuals(1.0, s2, h=1e-3).max()
        assert 3.0 < r1 / r2 < 5.0

    def test_richardson_tightens(self, s2):
        plain = coefficient_ode_residuals(1.0, s2, h=1e-3).max()
        better = coefficient_ode_residuals(1.0, s2, h=1e-3, richardson=True).max()
        assert better < plain / 10

    def test_detects_frozen_coupling(self, s2):
        # freezing d while G != 0 violates the coupling law; the delta
        # equation must flag a defect of order |G d|
        broken = replace(s2, d=ExprSchedule("0.2"))
        res = coefficient_ode_residuals(1.0, broken, h=1e-4)
        assert res.delta > 1e-3
        assert max(res.alpha + res.beta + res.gamma) < 1e-6


class TestConservedCoupling:
    def test_s1_value(self, s1):
        for t in (0.0, 3.0, 17.0):
            assert conserved_coupling(t, s1) == pytest.approx(0.2, abs=1e-14)

    def test_s2_constant_across_times(self, s2):
        vals = [conserved_coupling(t, s2) for t in (0.0, 1.0, 5.0)]
        assert np.max(np.abs(np.diff(vals))) < 1e-9 * abs(vals[0])

    def test_uncoupled_zero(self, s1_uncoupled):
        assert conserved_coupling(4.0, s1_uncoupled) == 0.0


class TestClassicalRhs:
    def test_s1_reference_point(self, s1):
        der = classical_rhs(PhaseState(x=(1.0, 0.0), p=(0.0, 0.0), t=0.0), s1)
        assert der.x == pytest.approx((0.0, 0.0))
        assert der.p == pytest.approx((-1.0, -0.2))

    def test_origin_is_fixed_point(self, s3):
        der = classical_rhs(PhaseState(x=(0.0, 0.0), p=(0.0, 0.0), t=1.0), s3)
        assert der.x == (0.0, 0.0)
        assert der.p == (0.0, 0.0)

    def test_second_order_reduction(self, s1):
        # eliminating p must reproduce x1'' + w~^2 x1 + (d/m) x2 = 0; oracle
        # is a fourth-order FD second derivative of the trajectory
        grid = np.linspace(0.0, 2.0, 2001)
        traj = integrate_classical(PhaseState(x=(1.0, 0.3), p=(0.0, 0.0), t=0.0), grid, s1)
        h = grid[1] - grid[0]
        x1 = traj.x[:, 0]
        dd = (-x1[4:] + 16 * x1[3:-1] - 30 * x1[2:-2] + 16 * x1[1:-3] - x1[:-4]) / (
            12 * h**2
        )
        resid = dd + 1.0 * x1[2:-2] + 0.2 * traj.x[2:-2, 1]
        assert np.max(np.abs(resid)) < 1e-8


class TestIntegrateClassical:
    def test_uncoupled_cosine(self, s1_uncoupled):
        grid = np.linspace(0.0, 10.0, 301)
        traj = integrate_classical(
            PhaseState(x=(1.0, 0.0), p=(0.0, 0.0), t=0.0), grid, s1_uncoupled
        )
        assert np.max(np.abs(traj.x[:, 0] - np.cos(grid))) < 1e-8

    def test_symmetric_normal_mode(self, s1):
        grid = np.linspace(0.0, 10.0, 301)
        traj = integrate_classical(PhaseState(x=(1.0, 1.0), p=(0.0, 0.0), t=0.0), grid, s1)
        assert np.max(np.abs(traj.x[:, 0] - np.cos(math.sqrt(1.2) * grid))) < 1e-6

    def test_antisymmetric_normal_mode(self, s1):
        grid = np.linspace(0.0, 10.0, 301)
        traj = integrate_classical(PhaseState(x=(1.0, -1.0), p=(0.0, 0.0), t=0.0), grid, s1)
        assert np.max(np.abs(traj.x[:, 0] - np.cos(math.sqrt(0.8) * grid))) < 1e-6

    def test_against_independent_integrator(self, s3):
        grid = np.linspace(0.0, 6.0, 121)
        traj = integrate_classical(PhaseState(x=(0.7, -0.4), p=(0.1, 0.0), t=0.0), grid, s3)

        def rhs(t, y):
            st = PhaseState(x=(y[0], y[1]), p=(y[2], y[3]), t=t)
            d = classical_rhs(st, s3)
            return [*d.x, *d.p]

        ref = solve_ivp(rhs, (0, 6), [0.7, -0.4, 0.1, 0.0], t_eval=grid,
                        method="DOP853", rtol=1e-12, atol=1e-12)
        got = np.column_stack([traj.x, traj.p])
        assert np.max(np.abs(got - ref.y.T)) < 1e-8

    def test_grid_must_start_at_initial_time(self, s1):
        with pytest.raises(ValueError, match="start"):
            integrate_classical(
                PhaseState(x=(1.0, 0.0), p=(0.0, 0.0), t=0.0),
                np.linspace(1.0, 2.0, 11),
                s1,
            )


class TestInvariantDrift:
    def test_s1_long_run(self, s1):
        grid = np.linspace(0.0, 20.0, 801)
        traj = integrate_classical(PhaseState(x=(1.0, 0.5), p=(0.0, 0.2), t=0.0), grid, s1)
        rep = invariant_along_trajectory(traj, s1)
        assert rep.relative
        assert rep.max_drift < 1e-8

    def test_s2_run(self, s2):
        grid = np.linspace(0.0, 10.0, 401)
        traj = integrate_classical(PhaseState(x=(1.0, 0.5), p=(0.0, 0.2), t=0.0), grid, s2)
        assert invariant_along_trajectory(traj, s2).max_drift < 1e-6

    def test_zero_state_reports_absolute(self, s1):
        grid = np.linspace(0.0, 5.0, 101)
        traj = integrate_classical(PhaseState(x=(0.0, 0.0), p=(0.0, 0.0), t=0.0), grid, s1)
        rep = invariant_along_trajectory(traj, s1)
        assert not rep.relative
        assert rep.max_drift == 0.0

    def test_drift_shrinks_with_tolerance(self, s2):
        grid = np.linspace(0.0, 10.0, 401)
        state = PhaseState(x=(1.0, 0.5), p=(0.0, 0.2), t=0.0)
        loose = invariant_along_trajectory(
            integrate_classical(state, grid, s2, rtol=1e-8, atol=1e-8), s2
        ).max_drift
        tight = invariant_along_trajectory(
            integrate_classical(state, grid, s2, rtol=1e-12, atol=1e-12), s2
        ).max_drift
        assert tight < loose

    def test_invariant_value_matches_quadratic_form(self, s3, rng):
        from oscinv import to_quadratic_form

        c = coefficients_at(2.0, s3)
        form = to_quadratic_form(c)
        for _ in range(5):
            z = rng.normal(size=4)
            direct = invariant_value(z[0], z[1], z[2], z[3], c)
            assert form.value(z) == pytest.approx(direct, rel=1e-13)
