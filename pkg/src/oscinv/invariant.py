"""Invariant coefficients and their conservation checks.

The invariant is the quadratic form

    I(t) = 1/2 sum_j [alpha_j p_j^2 + beta_j (x_j p_j + p_j x_j)
                      + gamma_j x_j^2] + delta x_1 x_2,

with coefficients determined by the auxiliary solutions.  Its total time
derivative vanishes; this module verifies that statement two independent
ways: through the coefficient ODE system (finite differences against the
closed forms) and through constancy of I along integrated classical
trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import solve_classical_ode
from .model import Scenario

__all__ = [
    "InvariantCoefficients",
    "PhaseState",
    "Trajectory",
    "classical_rhs",
    "coefficient_ode_residuals",
    "coefficients_at",
    "conserved_coupling",
    "integrate_classical",
    "invariant_along_trajectory",
    "invariant_value",
]

_TINY = 1e-300


@dataclass
class InvariantCoefficients:
    """Coefficient tuple of the invariant at time t.

    alpha_j carries mass^-1, beta_j time^-1, gamma_j and delta mass/time^2.
    Satisfies alpha_j gamma_j - beta_j^2 = (alpha0_j Omega_j / 2)^2 at every
    time.  Fields broadcast: evaluating at an array t yields array entries.
    """

    alpha: tuple
    beta: tuple
    gamma: tuple
    delta: object
    t: object


def coefficients_at(t, scenario: Scenario) -> InvariantCoefficients:
    """Evaluate the invariant coefficients from the auxiliary solutions.

    alpha_j = alpha0_j rho_j^2;
    beta_j  = alpha0_j m_j (b_j rho_j^2 - rho_j rho_j');
    gamma_j = alpha0_j [Omega_j^2/(4 rho_j^2)
                        + m_j^2 (b_j^2 rho_j^2 - 2 b_j rho_j rho_j' + rho_j'^2)];
    delta   = alpha_1 m_1 d.
    """
    scenario.check_time(t)
    alpha, beta, gamma = [], [], []
    for j in range(2):
        a0 = scenario.constants.alpha0[j]
        Om = scenario.constants.Omega[j]
        r = scenario.rho[j].rho(t)
        v = scenario.rho[j].rho_dot(t)
        mv = scenario.m[j].value(t)
        bv = scenario.b[j].value(t)
        alpha.append(a0 * r * r)
        beta.append(a0 * mv * (bv * r * r - r * v))
        gamma.append(
            a0 * (Om * Om / (4.0 * r * r) + mv * mv * (bv * bv * r * r - 2.0 * bv * r * v + v * v))
        )
    delta = alpha[0] * scenario.m[0].value(t) * scenario.d.value(t)
    return InvariantCoefficients(
        alpha=(alpha[0], alpha[1]),
        beta=(beta[0], beta[1]),
        gamma=(gamma[0], gamma[1]),
        delta=delta,
        t=t,
    )


@dataclass
class CoefficientOdeResiduals:
    """Scaled defects of the coefficient evolution equations at one time."""

    alpha: tuple
    beta: tuple
    gamma: tuple
    delta: float
    h: float

    def max(self) -> float:
        return max(*self.alpha, *self.beta, *self.gamma, self.delta)

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "gamma": list(self.gamma),
            "delta": self.delta,
            "h": self.h,
            "max": self.max(),
        }


def _fd(values, h, richardson):
    # values: c(t-h), c(t+h) [, c(t-2h), c(t+2h)]; central difference,
    # optionally Richardson-extrapolated to fourth order
    if richardson:
        return (8.0 * (values[1] - values[0]) - (values[3] - values[2])) / (12.0 * h)
    return (values[1] - values[0]) / (2.0 * h)


def coefficient_ode_residuals(
    t: float, scenario: Scenario, h: float = 1e-4, richardson: bool = False
) -> CoefficientOdeResiduals:
    """Check the coefficient ODE system by finite differences.

    alpha' = 2 b alpha - 2 beta / m;   beta' = m alpha omega^2 - gamma / m;
    gamma' = -2 b gamma + 2 m beta omega^2;
    delta' = -delta (b_1 + b_2) + d (beta_1 + beta_2).

    Each residual is |FD - rhs| scaled by the largest participating term, so
    it converges to zero at second order in h (fourth with ``richardson``).
    """
    offsets = (-1.0, 1.0, -2.0, 2.0) if richardson else (-1.0, 1.0)
    scenario.check_time(t + h * min(offsets))
    scenario.check_time(t + h * max(offsets))
    stencil = [coefficients_at(t + s * h, scenario) for s in offsets]
    c = coefficients_at(t, scenario)

    def scaled(fd, *rhs_terms):
        rhs = sum(rhs_terms)
        scale = max(abs(fd), *(abs(term) for term in rhs_terms), _TINY)
        return abs(fd - rhs) / scale

    res_a, res_b, res_g = [], [], []
    for j in range(2):
        mv = scenario.m[j].value(t)
        bv = scenario.b[j].value(t)
        wsq = scenario.omega_sq[j].value(t)
        fd_a = _fd([s.alpha[j] for s in stencil], h, richardson)
        fd_b = _fd([s.beta[j] for s in stencil], h, richardson)
        fd_g = _fd([s.gamma[j] for s in stencil], h, richardson)
        res_a.append(scaled(fd_a, 2.0 * bv * c.alpha[j], -2.0 * c.beta[j] / mv))
        res_b.append(scaled(fd_b, mv * c.alpha[j] * wsq, -c.gamma[j] / mv))
        res_g.append(scaled(fd_g, -2.0 * bv * c.gamma[j], 2.0 * mv * c.beta[j] * wsq))
    fd_d = _fd([s.delta for s in stencil], h, richardson)
    b12 = scenario.b[0].value(t) + scenario.b[1].value(t)
    res_d = scaled(
        fd_d, -c.delta * b12, scenario.d.value(t) * (c.beta[0] + c.beta[1])
    )
    return CoefficientOdeResiduals(
        alpha=tuple(res_a), beta=tuple(res_b), gamma=tuple(res_g), delta=res_d, h=h
    )


def conserved_coupling(t, scenario: Scenario):
    """delta sqrt(alpha_1 alpha_2); constant in t on valid scenarios."""
    c = coefficients_at(t, scenario)
    return c.delta * np.sqrt(c.alpha[0] * c.alpha[1])


# ---------------------------------------------------------------------------
# classical dynamics


@dataclass(frozen=True)
class PhaseState:
    """Classical phase-space point (x_1, x_2, p_1, p_2) at time t."""

    x: tuple[float, float]
    p: tuple[float, float]
    t: float


class PhaseDerivative(NamedTuple):
    x: tuple[float, float]
    p: tuple[float, float]


def classical_rhs(state: PhaseState, scenario: Scenario) -> PhaseDerivative:
    """Hamiltonian flow: x_j' = p_j/m_j + b_j x_j,
    p_j' = -b_j p_j - m_j omega_j^2 x_j - d x_{2-j}."""
    t = state.t
    scenario.check_time(t)
    m = [scenario.m[j].value(t) for j in range(2)]
    b = [scenario.b[j].value(t) for j in range(2)]
    wsq = [scenario.omega_sq[j].value(t) for j in range(2)]
    d = scenario.d.value(t)
    xd = tuple(state.p[j] / m[j] + b[j] * state.x[j] for j in range(2))
    pd = tuple(
        -b[j] * state.p[j] - m[j] * wsq[j] * state.x[j] - d * state.x[1 - j]
        for j in range(2)
    )
    return PhaseDerivative(x=xd, p=pd)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray  # (n, 2)
    p: np.ndarray  # (n, 2)


def integrate_classical(
    initial: PhaseState,
    grid,
    scenario: Scenario,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Adaptive integration of the classical flow, sampled exactly on grid."""
    grid = np.asarray(grid, dtype=np.float64)
    scenario.check_time(grid)
    if abs(grid[0] - initial.t) > 1e-12 * max(1.0, abs(initial.t)):
        raise ValueError("grid must start at the initial state's time")
    curves = (
        scenario.m[0].kernel_curve(),
        scenario.m[1].kernel_curve(),
        scenario.b[0].kernel_curve(),
        scenario.b[1].kernel_curve(),
        scenario.omega_sq[0].kernel_curve(),
        scenario.omega_sq[1].kernel_curve(),
        scenario.d.kernel_curve(),
    )
    y0 = (initial.x[0], initial.x[1], initial.p[0], initial.p[1])
    ys = solve_classical_ode(curves, y0, grid, rtol, atol, max_steps)
    return Trajectory(t=grid, x=ys[:, :2].copy(), p=ys[:, 2:].copy())


def invariant_value(x1, x2, p1, p2, coeffs: InvariantCoefficients):
    """Weyl symbol of the invariant at a phase-space point."""
    a1, a2 = coeffs.alpha
    b1, b2 = coeffs.beta
    g1, g2 = coeffs.gamma
    return (
        0.5 * (a1 * p1 * p1 + a2 * p2 * p2 + g1 * x1 * x1 + g2 * x2 * x2)
        + b1 * x1 * p1
        + b2 * x2 * p2
        + coeffs.delta * x1 * x2
    )


@dataclass
class InvariantDriftReport:
    values: np.ndarray
    initial: float
    max_drift: float
    relative: bool

    def to_dict(self) -> dict:
        return {
            "initial": self.initial,
            "max_drift": self.max_drift,
            "relative": self.relative,
        }


def invariant_along_trajectory(traj: Trajectory, scenario: Scenario) -> InvariantDriftReport:
    """Evaluate I along a trajectory and report its worst drift.

    Drift is relative to I(t_0) unless the initial value vanishes, in which
    case the absolute deviation is reported.
    """
    c = coefficients_at(traj.t, scenario)
    vals = invariant_value(traj.x[:, 0], traj.x[:, 1], traj.p[:, 0], traj.p[:, 1], c)
    i0 = float(vals[0])
    dev = np.max(np.abs(vals - i0))
    relative = abs(i0) > 1e-150
    return InvariantDriftReport(
        values=vals,
        initial=i0,
        max_drift=float(dev / abs(i0)) if relative else float(dev),
        relative=relative,
    )
