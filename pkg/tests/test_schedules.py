import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscinv.errors import DomainError, ScheduleParseError
from oscinv.schedules import ExprSchedule, SampledSchedule, as_schedule, parse_expression


class TestExprSchedule:
    def test_value_and_exact_derivatives(self):
        s = ExprSchedule("sqrt(1 + 0.1*sin(t))")
        assert s.value(0.0) == pytest.approx(1.0)
        # d1 = 0.05 cos t / sqrt(1 + 0.1 sin t)
        assert s.d1(0.0) == pytest.approx(0.05)
        # d2(0) = -0.0025 (hand differentiation)
        assert s.d2(0.0) == pytest.approx(-0.0025, abs=1e-15)

    def test_symbolic_derivative_matches_finite_difference(self):
        s = ExprSchedule("exp(-t/5)*cos(2*t) + t^2/7")
        h = 1e-5
        for t in (0.0, 0.7, 3.1):
            fd1 = (s.value(t + h) - s.value(t - h)) / (2 * h)
            fd2 = (s.value(t + h) - 2 * s.value(t) + s.value(t - h)) / h**2
            assert s.d1(t) == pytest.approx(fd1, abs=1e-8)
            assert s.d2(t) == pytest.approx(fd2, abs=1e-5)

    def test_array_evaluation_matches_scalar(self):
        s = ExprSchedule("sin(t)/(2 + cos(t))")
        tt = np.linspace(-3, 3, 57)
        vals = s.value(tt)
        assert vals.shape == tt.shape
        for i in (0, 13, 56):
            assert vals[i] == pytest.approx(s.value(float(tt[i])), abs=1e-15)

    def test_constants_and_pi(self):
        assert ExprSchedule("pi/2").value(123.0) == pytest.approx(math.pi / 2)
        assert ExprSchedule(3).value(0.0) == 3.0
        assert ExprSchedule("2^3").value(0.0) == 8.0

    @pytest.mark.parametrize("text", ["sin(", "1 +* 2", "t)("])
    def test_parse_errors(self, text):
        with pytest.raises(ScheduleParseError):
            ExprSchedule(text)

    def test_unknown_symbols_rejected(self):
        with pytest.raises(ScheduleParseError, match="unknown symbol"):
            ExprSchedule("t + q")

    def test_unknown_functions_rejected(self):
        with pytest.raises(ScheduleParseError, match="unsupported"):
            ExprSchedule("tanh(t)")

    @given(
        coeffs=st.lists(
            st.floats(min_value=-3, max_value=3, allow_nan=False), min_size=1, max_size=4
        ),
        t=st.floats(min_value=-5, max_value=5, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_polynomial_derivative_property(self, coeffs, t):
        expr = " + ".join(f"({c!r})*t^{k}" for k, c in enumerate(coeffs))
        s = ExprSchedule(expr)
        d1 = sum(k * c * t ** (k - 1) for k, c in enumerate(coeffs) if k >= 1)
        assert s.d1(t) == pytest.approx(d1, rel=1e-9, abs=1e-9)


class TestSampledSchedule:
    def make(self, n=301):
        tt = np.linspace(0.0, 3.0, n)
        return SampledSchedule(tt, np.sin(tt)), tt

    def test_interpolates_and_differentiates(self):
        s, _ = self.make()
        assert s.value(1.234) == pytest.approx(math.sin(1.234), abs=1e-9)
        assert s.d1(1.234) == pytest.approx(math.cos(1.234), abs=1e-6)
        assert s.d2(1.234) == pytest.approx(-math.sin(1.234), abs=1e-4)

    def test_fd_consistency_within_bound(self):
        s, _ = self.make()
        report = s.fd_consistency()
        assert report["d1"] <= report["bound"]
        assert report["d2"] <= report["bound"]

    def test_domain_enforced(self):
        s, _ = self.make()
        with pytest.raises(DomainError):
            s.value(3.5)
        with pytest.raises(DomainError):
            s.d1(-0.2)

    def test_requires_uniform_increasing_times(self):
        with pytest.raises(ValueError, match="uniform"):
            SampledSchedule([0.0, 0.1, 0.3, 0.6], [1, 2, 3, 4])
        with pytest.raises(ValueError, match="increasing"):
            SampledSchedule([0.0, 0.2, 0.1, 0.3], [1, 2, 3, 4])
        with pytest.raises(ValueError):
            SampledSchedule([0.0, 0.1, 0.2], [1, 2, 3])


def test_as_schedule_coercions():
    assert as_schedule("t").value(2.0) == 2.0
    assert as_schedule(1.5).value(0.0) == 1.5
    sched = as_schedule(parse_expression("t^2"))
    assert sched.value(3.0) == 9.0
    with pytest.raises(TypeError):
        as_schedule(object())
