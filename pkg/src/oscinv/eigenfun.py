"""Eigenfunctions of the invariant and their numerical validation.

In the rotated, alpha-scaled coordinates

    X_1 = cos(phi)/sqrt(alpha_1) x_1 + sin(phi)/sqrt(alpha_2) x_2,
    X_2 = -sin(phi)/sqrt(alpha_1) x_1 + cos(phi)/sqrt(alpha_2) x_2,

the eigenfunction with label (n_1, n_2) is a product of Hermite functions of
frequency omega_bar_j times the quadratic phase exp(-i beta_j x_j^2 /
(2 hbar alpha_j)) in the *unrotated* coordinates:

    u = prod_j (omega_bar_j / (pi hbar alpha_j))^(1/4) (2^n n!)^(-1/2)
        H_n(sqrt(omega_bar_j/hbar) X_j)
        exp[-(omega_bar_j X_j^2 + i (beta_j/alpha_j) x_j^2) / (2 hbar)].

This form is implemented exactly as stated and then checked numerically:
:func:`gram_matrix` verifies orthonormality by quadrature (the coordinate
Jacobian 1/sqrt(alpha_1 alpha_2) is absorbed by the prefactor) and
:func:`eigen_residual` applies the invariant as a finite-difference operator
and measures the eigenvalue defect.  The reference-mass scale drops out of
every quantity evaluated here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import hermite_functions
from .errors import GridTooCoarseError, NotPositiveDefiniteError
from .invariant import coefficients_at
from .model import Scenario
from .transforms import decouple

__all__ = [
    "FockLabel",
    "GridSpec",
    "characteristic_length",
    "eigen_residual",
    "eigenfunction",
    "eigenfunction_table",
    "gram_matrix",
    "grid_for_scenario",
    "rotated_coordinates",
    "sho_eigenfunction",
]

MIN_POINTS = 64
COVERAGE_LENGTHS = 6.0


@dataclass(frozen=True)
class FockLabel:
    """Quantum numbers (n1, n2) of a two-mode eigenstate."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("quantum numbers must be non-negative")

    @classmethod
    def coerce(cls, obj) -> "FockLabel":
        if isinstance(obj, cls):
            return obj
        n1, n2 = obj
        return cls(int(n1), int(n2))


@dataclass(frozen=True)
class GridSpec:
    """Tensor evaluation grid on [-L_1, L_1] x [-L_2, L_2]."""

    half_widths: tuple[float, float]
    points: tuple[int, int]
    rule: str = "gauss-legendre"

    def __post_init__(self):
        if any(l <= 0 for l in self.half_widths):
            raise ValueError("half widths must be positive")
        if any(n < MIN_POINTS for n in self.points):
            raise ValueError(f"need at least {MIN_POINTS} points per axis")
        if self.rule not in ("gauss-legendre", "uniform"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")

    def axis(self, j: int):
        """Nodes and quadrature weights along axis j."""
        half = self.half_widths[j]
        n = self.points[j]
        if self.rule == "gauss-legendre":
            nodes, weights = np.polynomial.legendre.leggauss(n)
            return half * nodes, half * weights
        nodes = np.linspace(-half, half, n)
        h = nodes[1] - nodes[0]
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2.0
        return nodes, weights


def characteristic_length(t: float, scenario: Scenario) -> float:
    """Largest Gaussian length scale of the eigenfunctions at time t."""
    c = coefficients_at(t, scenario)
    data = decouple(c, scenario.constants)
    wb = data.omega_bar
    return float(np.sqrt(scenario.constants.hbar * max(c.alpha) / min(wb)))


def grid_for_scenario(
    t: float,
    scenario: Scenario,
    points: int = 200,
    lengths: float = 8.0,
    rule: str = "gauss-legendre",
) -> GridSpec:
    half = lengths * characteristic_length(t, scenario)
    return GridSpec((half, half), (points, points), rule)


def rotated_coordinates(x, coeffs, phi: float):
    """Map (x_1, x_2) to the decoupled coordinates (X_1, X_2)."""
    a1, a2 = coeffs.alpha
    if a1 <= 0 or a2 <= 0:
        raise ValueError("alpha_j must be positive")
    c, s = np.cos(phi), np.sin(phi)
    x1, x2 = x
    big_x1 = c / np.sqrt(a1) * x1 + s / np.sqrt(a2) * x2
    big_x2 = -s / np.sqrt(a1) * x1 + c / np.sqrt(a2) * x2
    return big_x1, big_x2


def sho_eigenfunction(label, x, omega_bar, constants):
    """Product eigenfunction of two independent oscillators of mass M.

    Real-valued; evaluated through the normalized Hermite-function
    recurrence, which cannot overflow at any order.
    """
    label = FockLabel.coerce(label)
    if any(w <= 0 for w in omega_bar):
        raise NotPositiveDefiniteError("omega_bar must be positive")
    hbar, mass = constants.hbar, constants.bigM
    out = 1.0
    for n, wj, xj in ((label.n1, omega_bar[0], x[0]), (label.n2, omega_bar[1], x[1])):
        scale = np.sqrt(mass * wj / hbar)
        xi = np.asarray(scale * np.asarray(xj, dtype=np.float64))
        h = hermite_functions(n, xi.ravel())[n].reshape(xi.shape)
        out = out * np.sqrt(scale) * h
    return float(out) if np.ndim(out) == 0 else out


def _spectral_data(t: float, scenario: Scenario):
    c = coefficients_at(t, scenario)
    data = decouple(c, scenario.constants)
    if not data.positive_definite:
        raise NotPositiveDefiniteError(
            "non-normalizable: invariant not positive definite"
        )
    return c, data


def eigenfunction(label, x, t: float, scenario: Scenario):
    """Evaluate u_{n1,n2}(x_1, x_2, t); complex, unit L2 norm."""
    label = FockLabel.coerce(label)
    scenario.check_time(t)
    c, data = _spectral_data(t, scenario)
    wb = data.omega_bar
    hbar = scenario.constants.hbar
    x1 = np.asarray(x[0], dtype=np.float64)
    x2 = np.asarray(x[1], dtype=np.float64)
    big_x = rotated_coordinates((x1, x2), c, data.phi)
    out = np.ones_like(x1, dtype=np.float64)
    for n, wj, aj, bxj in (
        (label.n1, wb[0], c.alpha[0], big_x[0]),
        (label.n2, wb[1], c.alpha[1], big_x[1]),
    ):
        xi = np.sqrt(wj / hbar) * bxj
        h = hermite_functions(n, np.asarray(xi).ravel())[n].reshape(np.shape(xi))
        out = out * (wj / (hbar * aj)) ** 0.25 * h
    phase = np.exp(
        -0.5j
        / hbar
        * (c.beta[0] / c.alpha[0] * x1 * x1 + c.beta[1] / c.alpha[1] * x2 * x2)
    )
    u = out * phase
    return complex(u) if np.ndim(u) == 0 else u


def eigenfunction_table(labels, x1, x2, t: float, scenario: Scenario) -> np.ndarray:
    """Evaluate many labels on flattened coordinates; returns (len(labels), npts).

    Shares the Hermite recurrences across labels, which matters on large
    quadrature grids.
    """
    labels = [FockLabel.coerce(l) for l in labels]
    scenario.check_time(t)
    c, data = _spectral_data(t, scenario)
    wb = data.omega_bar
    hbar = scenario.constants.hbar
    x1 = np.asarray(x1, dtype=np.float64).ravel()
    x2 = np.asarray(x2, dtype=np.float64).ravel()
    bx1, bx2 = rotated_coordinates((x1, x2), c, data.phi)
    n1max = max(l.n1 for l in labels)
    n2max = max(l.n2 for l in labels)
    h1 = hermite_functions(n1max, np.sqrt(wb[0] / hbar) * bx1)
    h2 = hermite_functions(n2max, np.sqrt(wb[1] / hbar) * bx2)
    pref = (wb[0] / (hbar * c.alpha[0])) ** 0.25 * (wb[1] / (hbar * c.alpha[1])) ** 0.25
    phase = np.exp(
        -0.5j
        / hbar
        * (c.beta[0] / c.alpha[0] * x1 * x1 + c.beta[1] / c.alpha[1] * x2 * x2)
    )
    table = np.empty((len(labels), x1.size), dtype=np.complex128)
    for i, l in enumerate(labels):
        table[i] = pref * h1[l.n1] * h2[l.n2] * phase
    return table


def _check_coverage(t, scenario, grid: GridSpec):
    need = COVERAGE_LENGTHS * characteristic_length(t, scenario)
    if min(grid.half_widths) < need:
        raise GridTooCoarseError(
            f"grid half-width {min(grid.half_widths):g} below "
            f"{COVERAGE_LENGTHS:g} characteristic lengths ({need:g})"
        )


def _quadrature_overlaps(labels, t, scenario, grid: GridSpec) -> np.ndarray:
    x1, w1 = grid.axis(0)
    x2, w2 = grid.axis(1)
    mesh1, mesh2 = np.meshgrid(x1, x2, indexing="ij")
    weights = np.outer(w1, w2).ravel()
    table = eigenfunction_table(labels, mesh1.ravel(), mesh2.ravel(), t, scenario)
    return (table.conj() * weights) @ table.T


def gram_matrix(
    labels,
    t: float,
    scenario: Scenario,
    grid: GridSpec,
    check_convergence: bool = False,
    convergence_tol: float = 1e-6,
) -> np.ndarray:
    """Overlap matrix of eigenfunctions under the grid's quadrature rule.

    With ``check_convergence`` the overlaps are recomputed at half the
    resolution; a spread above ``convergence_tol`` flags the grid as too
    coarse.
    """
    _check_coverage(t, scenario, grid)
    gram = _quadrature_overlaps(labels, t, scenario, grid)
    if check_convergence:
        coarse_pts = tuple(max(n // 2, MIN_POINTS) for n in grid.points)
        coarse = GridSpec(grid.half_widths, coarse_pts, grid.rule)
        spread = float(
            np.max(np.abs(gram - _quadrature_overlaps(labels, t, scenario, coarse)))
        )
        if spread > convergence_tol:
            raise GridTooCoarseError(
                f"quadrature not converged: resolution spread {spread:g}"
            )
    return gram


def eigen_residual(
    label, t: float, scenario: Scenario, grid: GridSpec, lam: float | None = None
) -> float:
    """Finite-difference defect ||(I - lambda) u|| / ||u|| on interior points.

    Applies the invariant as a differential operator with second-order
    central differences (p_j = -i hbar d_j), so the residual decays as the
    square of the grid spacing.  ``lam`` defaults to the label's lattice
    eigenvalue; overriding it measures the defect against a foreign value.
    """
    if grid.rule != "uniform":
        raise ValueError("eigen_residual requires a uniform grid")
    label = FockLabel.coerce(label)
    _check_coverage(t, scenario, grid)
    c, data = _spectral_data(t, scenario)
    wb = data.omega_bar
    hbar = scenario.constants.hbar
    if lam is None:
        lam = hbar * (wb[0] * (label.n1 + 0.5) + wb[1] * (label.n2 + 0.5))

    x1, _ = grid.axis(0)
    x2, _ = grid.axis(1)
    h1 = x1[1] - x1[0]
    h2 = x2[1] - x2[0]
    mesh1, mesh2 = np.meshgrid(x1, x2, indexing="ij")
    u = eigenfunction_table([label], mesh1.ravel(), mesh2.ravel(), t, scenario)[0]
    u = u.reshape(mesh1.shape)

    d1_1 = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * h1)
    d2_1 = (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / h1**2
    d1_2 = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * h2)
    d2_2 = (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / h2**2
    ui = u[1:-1, 1:-1]
    g1 = x1[1:-1][:, None]
    g2 = x2[1:-1][None, :]

    iu = 0.5 * (-(hbar**2) * (c.alpha[0] * d2_1 + c.alpha[1] * d2_2))
    iu += 0.5 * c.beta[0] * (-1j * hbar) * (2.0 * g1 * d1_1 + ui)
    iu += 0.5 * c.beta[1] * (-1j * hbar) * (2.0 * g2 * d1_2 + ui)
    iu += (
        0.5 * (c.gamma[0] * g1 * g1 + c.gamma[1] * g2 * g2) + c.delta * g1 * g2
    ) * ui
    return float(np.linalg.norm(iu - lam * ui) / np.linalg.norm(ui))
