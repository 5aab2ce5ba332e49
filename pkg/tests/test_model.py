import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from oscinv import (
    Constants,
    Scenario,
    build_inverse_scenario,
    coupling_schedule,
    equilibrium_rho,
    g_function,
    inverse_ermakov_omega_sq,
    modified_frequency_sq,
    solve_ermakov,
    validate_scenario,
)
from oscinv.errors import NonPositiveRhoError
from oscinv.model import ErmakovSolution
from oscinv.schedules import ExprSchedule


class TestModifiedFrequency:
    def test_all_corrections_vanish(self, s1):
        assert modified_frequency_sq(0, 0.0, s1) == pytest.approx(1.0)

    def test_constant_b(self):
        sc = build_inverse_scenario(Constants(), "1", "1", "0.3", "0.3", "1", 0.0, (0.0, 5.0))
        # omega^2 was derived so that omega_tilde^2 = 1; check the original
        # formula with hand-substituted values: w^2 - b^2 = 1 for w^2 = 1.09
        assert sc.omega_sq[0].value(1.0) == pytest.approx(1.09)
        assert modified_frequency_sq(0, 1.0, sc) == pytest.approx(1.0)

    def test_linear_b_symbolic_vs_fd(self):
        sc = build_inverse_scenario(Constants(), "1", "1", "0.1*t", "0", "1", 0.0, (-1.0, 5.0))
        # at t=0: b=0, bdot=0.1 -> modified = omega^2 - 0.1
        got = modified_frequency_sq(0, 0.0, sc)
        assert got == pytest.approx(sc.omega_sq[0].value(0.0) - 0.1)
        b = sc.b[0]
        h = 1e-6
        fd_bdot = (b.value(h) - b.value(-h)) / (2 * h)
        assert fd_bdot == pytest.approx(0.1, abs=1e-10)


class TestEquilibriumRho:
    def test_unit_case(self):
        assert equilibrium_rho(1.0, 1.0, 2.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("m,wt", [(1.0, 2.0), (2.0, 1.0)])
    def test_residual_vanishes(self, m, wt):
        rho = equilibrium_rho(m, wt, 2.0)
        assert rho == pytest.approx(math.sqrt(0.5))
        # substitute back: omega_tilde^2 rho = Omega^2 / (4 m^2 rho^3)
        assert wt**2 * rho == pytest.approx(4.0 / (4 * m**2 * rho**3))

    def test_nonpositive_inputs(self):
        for bad in [(-1, 1, 2), (1, 0, 2), (1, 1, -2)]:
            with pytest.raises(ValueError):
                equilibrium_rho(*bad)


class TestSolveErmakov:
    def test_equilibrium_stays_constant(self):
        grid = np.linspace(0, 10, 201)
        sol = solve_ermakov("1", "0", "1", 2.0, 1.0, 0.0, grid)
        assert np.max(np.abs(sol.rho(grid) - 1.0)) < 1e-12
        assert sol.max_residual < 1e-6

    def test_oscillating_solution_closed_form(self):
        # For m=1, b=0, w=1, Omega=2 the square sigma = rho^2 obeys
        # sigma'' = -4 (sigma - E) with E = (rho0^2 + rho0^-2)/2, so
        # rho(t) = sqrt(E + (rho0^2 - E) cos 2t): period pi, extrema
        # rho0 and 1/rho0.
        rho0 = 1.2
        e = 0.5 * (rho0**2 + rho0**-2)
        grid = np.linspace(0, 10, 2001)
        sol = solve_ermakov("1", "0", "1", 2.0, rho0, 0.0, grid)
        exact = np.sqrt(e + (rho0**2 - e) * np.cos(2 * grid))
        assert np.max(np.abs(sol.rho(grid) - exact)) < 1e-8
        # extrema bracket [1/rho0, rho0]; sampled extrema sit within the
        # grid-quantization error of the turning points
        assert sol.rho(grid).max() == pytest.approx(rho0, abs=1e-8)
        assert sol.rho(grid).min() == pytest.approx(1 / rho0, abs=1e-4)
        assert np.all(sol.rho(grid) >= 1 / rho0 - 1e-8)
        assert sol.rho(math.pi) == pytest.approx(rho0, abs=1e-8)

    def test_nonpositive_rho_initial(self):
        with pytest.raises(NonPositiveRhoError, match="nonpositive rho"):
            solve_ermakov("1", "0", "1", 2.0, 0.0, 0.0, np.linspace(0, 1, 11))

    def test_floor_crossing_detected(self):
        # with a tiny Omega the rho^-3 barrier only engages far below the
        # floor, so free fall crosses it and must be flagged
        with pytest.raises(NonPositiveRhoError, match="floor"):
            solve_ermakov(
                "1", "0", "0", 1e-6, 0.5, -1.0, np.linspace(0, 1, 51), rho_floor=1e-2
            )

    def test_against_independent_integrator(self):
        # oracle: scipy DOP853 at tolerance 1e-12 on a time-dependent case
        grid = np.linspace(0, 8, 161)
        sol = solve_ermakov("1", "0", "1 + 0.3*sin(t)", 2.0, 1.1, -0.2, grid)

        def rhs(t, y):
            return [y[1], -(1 + 0.3 * math.sin(t)) * y[0] + 1.0 / y[0] ** 3]

        ref = solve_ivp(rhs, (0, 8), [1.1, -0.2], t_eval=grid, method="DOP853",
                        rtol=1e-12, atol=1e-12)
        assert np.max(np.abs(sol.rho(grid) - ref.y[0])) < 1e-8


class TestInverseErmakov:
    def test_equilibrium_inversion(self):
        wsq = inverse_ermakov_omega_sq(ExprSchedule("1"), "1", "0", 2.0)
        assert wsq.value(3.7) == pytest.approx(1.0)

    def test_breathing_case_value(self):
        wsq = inverse_ermakov_omega_sq(ExprSchedule("sqrt(1 + 0.1*sin(t))"), "1", "0", 2.0)
        assert wsq.value(0.0) == pytest.approx(1.0025)
        # oracle: finite-difference second derivative of rho
        rho = ExprSchedule("sqrt(1 + 0.1*sin(t))")
        h = 1e-5
        rdd = (rho.value(h) - 2 * rho.value(0.0) + rho.value(-h)) / h**2
        expected = 4.0 / (4 * rho.value(0.0) ** 4) - rdd / rho.value(0.0)
        assert wsq.value(0.0) == pytest.approx(expected, abs=1e-5)

    def test_constant_b_restores_cross_terms(self):
        wsq = inverse_ermakov_omega_sq(ExprSchedule("1"), "1", "0.3", 2.0)
        assert wsq.value(0.0) == pytest.approx(1.09)
        sc = build_inverse_scenario(Constants(), "1", "1", "0.3", "0.3", "1", 0.0, (0.0, 4.0))
        assert modified_frequency_sq(0, 1.0, sc) == pytest.approx(1.0)

    def test_round_trip_reproduces_rho(self):
        rho = ExprSchedule("sqrt(1 + 0.1*sin(t))")
        wsq = inverse_ermakov_omega_sq(rho, "1", "0", 2.0)
        grid = np.linspace(0, 10, 501)
        sol = solve_ermakov("1", "0", wsq, 2.0, rho.value(0.0), rho.d1(0.0), grid)
        rel = np.abs(sol.rho(grid) - rho.value(grid)) / np.abs(rho.value(grid))
        assert np.max(rel) < 1e-6

    def test_nonpositive_rho_rejected(self):
        with pytest.raises(NonPositiveRhoError):
            inverse_ermakov_omega_sq(ExprSchedule("cos(t)"), "1", "0", 2.0, domain=(0.0, 3.0))


class TestGFunction:
    def test_static_scenario_vanishes(self, s1):
        for variant in ("m1", "m2", "symmetric"):
            assert g_function(1.0, s1, variant) == 0.0

    def test_variants_agree_on_valid_scenarios(self, s2, s3):
        tt = np.linspace(0, 20, 101)
        for sc in (s2, s3):
            vals = np.stack([g_function(tt, sc, v) for v in ("m1", "m2", "symmetric")])
            scale = np.maximum(np.max(np.abs(vals), axis=0), 1e-30)
            assert np.max((vals.max(axis=0) - vals.min(axis=0)) / scale) < 1e-9

    def test_exponential_rho_value(self):
        sc = build_inverse_scenario(
            Constants(), "1", "1", "0", "0", "exp(0.1*t)", 0.1, (0.0, 3.0)
        )
        assert g_function(1.7, sc, "m1") == pytest.approx(0.4)
        # oracle: finite-difference logarithmic derivatives
        r = sc.rho[0]
        h = 1e-6
        fd = (math.log(r.rho(1.7 + h)) - math.log(r.rho(1.7 - h))) / (2 * h)
        assert g_function(1.7, sc, "m1") == pytest.approx(4 * fd, abs=1e-8)

    def test_unknown_variant(self, s1):
        with pytest.raises(ValueError):
            g_function(0.0, s1, "bogus")


class TestCouplingSchedule:
    def test_constant_inputs_give_constant_coupling(self):
        d = coupling_schedule(0.2, ExprSchedule("1"), ExprSchedule("1"), ExprSchedule("1"), 0.0)
        assert d.value(9.0) == pytest.approx(0.2)

    def test_breathing_closed_form_and_quadrature_oracle(self):
        rho = ExprSchedule("sqrt(1 + 0.1*sin(t))")
        d = coupling_schedule(0.2, ExprSchedule("1"), rho, rho, 0.0)
        assert d.value(math.pi / 2) == pytest.approx(0.2 / 1.21)

        # oracle: d(t) = d0 exp(-int G), G = 4 rho'/rho here
        def g(t):
            h = 1e-6
            return 4 * (math.log(rho.value(t + h)) - math.log(rho.value(t - h))) / (2 * h)

        integral, _ = quad(g, 0.0, math.pi / 2, limit=200)
        assert d.value(math.pi / 2) == pytest.approx(0.2 * math.exp(-integral), rel=1e-8)

    def test_zero_coupling(self):
        rho = ExprSchedule("sqrt(1 + 0.1*sin(t))")
        d = coupling_schedule(0.0, ExprSchedule("1"), rho, rho, 0.0)
        assert d.value(2.0) == 0.0


class TestBuildInverseScenario:
    def test_symmetric_constants_unit_scenario(self, s1):
        tt = s1.times(11)
        assert np.max(np.abs(s1.omega_sq[0].value(tt) - 1.0)) < 1e-14
        assert np.max(np.abs(s1.omega_sq[1].value(tt) - 1.0)) < 1e-14
        assert np.max(np.abs(s1.d.value(tt) - 0.2)) < 1e-15

    def test_mass_ratio_scales_rho2(self):
        sc = build_inverse_scenario(Constants(), "1", "2", "0", "0", "1", 0.0, (0.0, 5.0))
        tt = sc.times(7)
        assert np.max(np.abs(sc.rho[1].rho(tt) - 1 / math.sqrt(2))) < 1e-14
        rep = validate_scenario(sc)
        assert rep.mass_constraint_max_residual < 1e-14

    def test_uncoupled_mode(self, s1_uncoupled):
        assert s1_uncoupled.d0 == 0.0
        assert s1_uncoupled.d.value(3.0) == 0.0

    def test_negative_frequency_warns_not_fails(self):
        # fast-growing rho drives the derived omega^2 negative
        with pytest.warns(UserWarning, match="negative"):
            sc = build_inverse_scenario(
                Constants(), "1", "1", "0", "0", "exp(t)", 0.0, (0.0, 2.0)
            )
        assert sc.omega_sq[0].value(1.0) < 0

    def test_nonpositive_rho_fails(self):
        with pytest.raises(NonPositiveRhoError, match="nonpositive rho"):
            build_inverse_scenario(Constants(), "1", "1", "0", "0", "cos(t)", 0.0, (0.0, 4.0))


class TestValidateScenario:
    def test_constructed_scenarios_are_tight(self, s1, s2, s3):
        for sc in (s1, s2, s3):
            rep = validate_scenario(sc)
            assert rep.max_residual() < 1e-12

    def test_detects_mass_constraint_violation(self, s1):
        broken = Scenario(
            constants=s1.constants,
            m=(s1.m[0], ExprSchedule("1.01")),
            b=s1.b,
            omega_sq=s1.omega_sq,
            d=s1.d,
            rho=s1.rho,
            domain=s1.domain,
            mode=s1.mode,
            d0=s1.d0,
            grid=s1.grid,
        )
        rep = validate_scenario(broken)
        assert rep.mass_constraint_max_residual == pytest.approx(0.01, rel=0.02)

    def test_zero_coupling_is_vacuous(self):
        sc = build_inverse_scenario(
            Constants(), "1", "1", "0", "0", "sqrt(1 + 0.1*sin(t))", 0.0, (0.0, 10.0)
        )
        rep = validate_scenario(sc)
        assert rep.coupling_ode_max_residual == 0.0

    def test_conserved_product_is_constant(self, s2, s3):
        for sc in (s2, s3):
            tt = sc.times(301)
            prod = (
                sc.d.value(tt)
                * sc.m[0].value(tt)
                * sc.rho[0].rho(tt) ** 3
                * sc.rho[1].rho(tt)
            )
            assert np.max(np.abs(prod - prod[0]) / np.abs(prod[0])) < 1e-9


class TestForwardScenario:
    def test_uncoupled_equilibrium(self):
        from oscinv import build_forward_scenario

        sc = build_forward_scenario(
            Constants(),
            ("1", "1"),
            ("0", "0"),
            ("1", "1"),
            [(1.0, 0.0), (1.0, 0.0)],
            (0.0, 10.0),
        )
        assert sc.mode == "forward-uncoupled"
        tt = sc.times(41)
        assert np.max(np.abs(sc.rho[0].rho(tt) - 1.0)) < 1e-10
        rep = validate_scenario(sc)
        assert rep.max_residual() < 1e-6

    def test_prescribed_frequency_with_linear_b(self):
        # with forward-specified omega = 1 the b-corrections are visible:
        # b = 0.1 t gives 1 - 0.1 at t = 0, constant b = 0.3 gives 0.91
        from oscinv import build_forward_scenario

        sc = build_forward_scenario(
            Constants(),
            ("1", "1"),
            ("0.1*t", "0.3"),
            ("1", "1"),
            [(1.0, 0.0), (1.0, 0.0)],
            (0.0, 3.0),
        )
        assert modified_frequency_sq(0, 0.0, sc) == pytest.approx(0.9)
        assert modified_frequency_sq(1, 1.0, sc) == pytest.approx(0.91)


class TestSampledSchedulePath:
    def test_inverse_scenario_from_samples_matches_symbolic(self, s2):
        from oscinv.schedules import SampledSchedule

        tt = np.linspace(-1.0, 21.0, 4401)
        rho1 = SampledSchedule(tt, np.sqrt(1 + 0.1 * np.sin(tt)))
        sc = build_inverse_scenario(
            Constants(), "1", "1", "0", "0", rho1, 0.2, (-1.0, 21.0)
        )
        assert sc.rho[0].source == "sampled"
        rep = validate_scenario(sc)
        assert rep.max_residual() < 1e-6
        probe = np.linspace(0.0, 10.0, 23)
        assert np.max(
            np.abs(sc.omega_sq[0].value(probe) - s2.omega_sq[0].value(probe))
        ) < 1e-6
        assert np.max(np.abs(sc.d.value(probe) - s2.d.value(probe))) < 1e-8


class TestErmakovSolutionType:
    def test_closed_form_wrap(self):
        grid = np.linspace(0, 5, 101)
        sol = ErmakovSolution.from_schedule("1 + 0.1*sin(t)", grid)
        assert sol.source == "closed-form"
        assert sol.rho(1.0) == pytest.approx(1 + 0.1 * math.sin(1.0))

    def test_sample_wrap_rejects_nonpositive(self):
        grid = np.linspace(0, 1, 11)
        with pytest.raises(NonPositiveRhoError):
            ErmakovSolution.from_samples(grid, np.linspace(1, -0.1, 11), np.zeros(11))
