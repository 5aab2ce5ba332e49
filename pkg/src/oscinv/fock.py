"""Truncated two-mode Fock matrices for the Hamiltonian and the invariant.

Matrix identities are asserted on an *inner block* of the truncated basis:
position/momentum couple n to n+-1 and quadratic terms to n+-2, so a single
application of a quadratic operator is exact for n_j <= N-2, while products
of two quadratics (the commutator in the conservation check) are exact only
for n_j <= N-3.  The ``margin`` arguments encode that distinction.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NotPositiveDefiniteError
from .invariant import coefficients_at
from .model import Scenario
from .transforms import decouple

__all__ = [
    "FockBasisSpec",
    "FockOperator",
    "ModeOperators",
    "SpectrumReport",
    "basis_for_scenario",
    "hamiltonian_matrix",
    "inner_indices",
    "invariant_matrix",
    "ladder_matrices",
    "lambda_lattice",
    "lowest_eigenvalues",
    "lvn_matrix_residual",
    "mode_operators",
    "operator_from_quadratic_form",
    "project_inner",
    "spectrum_check",
]

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class FockBasisSpec:
    """Two-mode number basis with per-mode cutoff N (dimension N^2).

    ``mass_ref`` and ``omega_ref`` fix the ladder operators the matrices are
    expressed in; conditioning is best when they roughly match the target
    oscillator, but any positive choice is valid.
    """

    cutoff: int
    hbar: float = 1.0
    mass_ref: float = 1.0
    omega_ref: float = 1.0

    def __post_init__(self):
        if self.cutoff < 4:
            raise ValueError("cutoff must be at least 4")
        if self.hbar <= 0 or self.mass_ref <= 0 or self.omega_ref <= 0:
            raise ValueError("hbar, mass_ref, omega_ref must be positive")

    @property
    def dim(self) -> int:
        return self.cutoff * self.cutoff


def basis_for_scenario(scenario: Scenario, cutoff: int, t: float | None = None) -> FockBasisSpec:
    """Default basis: reference mass M, reference frequency max omega_bar_j."""
    if t is None:
        t = scenario.domain[0]
    data = decouple(coefficients_at(t, scenario), scenario.constants)
    return FockBasisSpec(
        cutoff=cutoff,
        hbar=scenario.constants.hbar,
        mass_ref=scenario.constants.bigM,
        omega_ref=max(data.omega_bar),
    )


@dataclass(frozen=True)
class FockOperator:
    """Dense operator matrix in a two-mode number basis."""

    matrix: np.ndarray
    spec: FockBasisSpec
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.spec.dim, self.spec.dim):
            raise ValueError("matrix does not match basis dimension")
        if self.hermitian:
            scale = np.linalg.norm(m)
            if scale > 0 and np.linalg.norm(m - m.conj().T) > HERMITICITY_TOL * scale:
                raise ValueError("hermitian flag set on a non-hermitian matrix")
        object.__setattr__(self, "matrix", m)


class ModeOperators(NamedTuple):
    x: tuple[np.ndarray, np.ndarray]
    p: tuple[np.ndarray, np.ndarray]
    a: tuple[np.ndarray, np.ndarray]
    adag: tuple[np.ndarray, np.ndarray]


@functools.lru_cache(maxsize=16)
def mode_operators(spec: FockBasisSpec) -> ModeOperators:
    """Truncated ladder and quadrature matrices, one pair per mode.

    x = sqrt(hbar / 2 m w) (a + a+), p = i sqrt(m w hbar / 2) (a+ - a);
    the canonical commutator [x_j, p_j] = i hbar holds on n_j <= N-2.
    """
    n = spec.cutoff
    a = np.diag(np.sqrt(np.arange(1, n)), 1).astype(np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    a1 = np.kron(a, eye)
    a2 = np.kron(eye, a)
    cx = np.sqrt(spec.hbar / (2.0 * spec.mass_ref * spec.omega_ref))
    cp = np.sqrt(spec.mass_ref * spec.omega_ref * spec.hbar / 2.0)
    x = tuple(cx * (ai + ai.conj().T) for ai in (a1, a2))
    p = tuple(1j * cp * (ai.conj().T - ai) for ai in (a1, a2))
    return ModeOperators(x=x, p=p, a=(a1, a2), adag=(a1.conj().T, a2.conj().T))


def inner_indices(spec: FockBasisSpec, margin: int = 1) -> np.ndarray:
    """Basis indices with n_1, n_2 <= N-1-margin."""
    n = spec.cutoff
    keep = np.arange(n - margin)
    return (keep[:, None] * n + keep[None, :]).ravel()


def project_inner(matrix: np.ndarray, spec: FockBasisSpec, margin: int = 1) -> np.ndarray:
    idx = inner_indices(spec, margin)
    return matrix[np.ix_(idx, idx)]


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2.0


@functools.lru_cache(maxsize=16)
def _single_mode_quadratures(spec: FockBasisSpec):
    n = spec.cutoff
    a = np.diag(np.sqrt(np.arange(1, n)), 1).astype(np.complex128)
    cx = np.sqrt(spec.hbar / (2.0 * spec.mass_ref * spec.omega_ref))
    cp = np.sqrt(spec.mass_ref * spec.omega_ref * spec.hbar / 2.0)
    x = cx * (a + a.conj().T)
    p = 1j * cp * (a.conj().T - a)
    return x, p


def _quadratic_operator(spec, p2, xp, x2, cross) -> FockOperator:
    """1/2 sum_j [p2_j p_j^2 + xp_j (x_j p_j + p_j x_j) + x2_j x_j^2] + cross x1 x2.

    Each mode's quadratic is assembled at single-mode size and lifted by a
    Kronecker product, which is exactly the dense two-mode product but
    avoids the N^2 x N^2 matrix multiplies.
    """
    x, p = _single_mode_quadratures(spec)
    n = spec.cutoff
    eye = np.eye(n, dtype=np.complex128)
    blocks = [
        0.5 * (p2[j] * (p @ p) + xp[j] * (x @ p + p @ x) + x2[j] * (x @ x))
        for j in range(2)
    ]
    total = np.kron(blocks[0], eye) + np.kron(eye, blocks[1])
    total += cross * np.kron(x, x)
    return FockOperator(_hermitize(total), spec, hermitian=True)


def hamiltonian_matrix(t: float, scenario: Scenario, spec: FockBasisSpec) -> FockOperator:
    """H(t) = 1/2 sum_j [p_j^2/m_j + b_j (x_j p_j + p_j x_j) + m_j w_j^2 x_j^2]
    + d x_1 x_2."""
    scenario.check_time(t)
    m = [scenario.m[j].value(t) for j in range(2)]
    b = [scenario.b[j].value(t) for j in range(2)]
    wsq = [scenario.omega_sq[j].value(t) for j in range(2)]
    return _quadratic_operator(
        spec,
        p2=[1.0 / m[0], 1.0 / m[1]],
        xp=b,
        x2=[m[0] * wsq[0], m[1] * wsq[1]],
        cross=scenario.d.value(t),
    )


def invariant_matrix(t: float, scenario: Scenario, spec: FockBasisSpec) -> FockOperator:
    """Matrix of the invariant, same quadratic construction with
    (alpha_j, beta_j, gamma_j, delta)."""
    c = coefficients_at(t, scenario)
    return _quadratic_operator(spec, p2=c.alpha, xp=c.beta, x2=c.gamma, cross=c.delta)


def operator_from_quadratic_form(form, spec: FockBasisSpec) -> FockOperator:
    """Fock matrix of an arbitrary phase-space quadratic form."""
    x2, p2, xp, cross = form.coefficient_blocks()
    return _quadratic_operator(spec, p2=p2, xp=xp, x2=x2, cross=cross)


def lvn_matrix_residual(
    t: float,
    scenario: Scenario,
    spec: FockBasisSpec,
    dt: float = 1e-4,
    margin: int = 2,
) -> float:
    """Conservation defect dI/dt + [I, H]/(i hbar) on the inner block.

    The finite-difference time derivative uses t +- dt.  ``margin=2`` keeps
    only entries where the commutator of two truncated quadratics is exact;
    with margin=1 the block's outermost entries carry truncation leakage of
    order the matrix elements themselves.  Frobenius norms, normalized by
    the invariant's restricted norm.
    """
    scenario.check_time(t - dt)
    scenario.check_time(t + dt)
    i_plus = invariant_matrix(t + dt, scenario, spec).matrix
    i_minus = invariant_matrix(t - dt, scenario, spec).matrix
    i_now = invariant_matrix(t, scenario, spec).matrix
    h_now = hamiltonian_matrix(t, scenario, spec).matrix
    resid = (i_plus - i_minus) / (2.0 * dt) + (i_now @ h_now - h_now @ i_now) / (
        1j * spec.hbar
    )
    idx = inner_indices(spec, margin)
    sub = resid[np.ix_(idx, idx)]
    ref = i_now[np.ix_(idx, idx)]
    return float(np.linalg.norm(sub) / np.linalg.norm(ref))


def ladder_matrices(t: float, scenario: Scenario, spec: FockBasisSpec):
    """Annihilation operators of the coupled system.

    Built from the shifted momenta P_j = p_j + (beta_j/alpha_j) x_j, the
    mixing angle and the decoupled frequencies:

      a_1 = [wb_1 (cos(phi)/sqrt(a_1) x_1 + sin(phi)/sqrt(a_2) x_2)
             + i (sqrt(a_1) cos(phi) P_1 + sqrt(a_2) sin(phi) P_2)]
            / sqrt(2 hbar wb_1),

    and the mirrored combination for a_2.  Canonical commutators hold on
    the n_j <= N-2 block; sum_j hbar wb_j (a_j+ a_j + 1/2) reproduces the
    invariant matrix there.
    """
    c = coefficients_at(t, scenario)
    data = decouple(c, scenario.constants)
    wb = data.omega_bar  # raises NotPositiveDefiniteError when not positive
    ops = mode_operators(spec)
    hbar = spec.hbar
    cos, sin = np.cos(data.phi), np.sin(data.phi)
    sqa = [np.sqrt(c.alpha[j]) for j in range(2)]
    pp = [ops.p[j] + (c.beta[j] / c.alpha[j]) * ops.x[j] for j in range(2)]
    a1 = (
        wb[0] * (cos / sqa[0] * ops.x[0] + sin / sqa[1] * ops.x[1])
        + 1j * (sqa[0] * cos * pp[0] + sqa[1] * sin * pp[1])
    ) / np.sqrt(2.0 * hbar * wb[0])
    a2 = (
        wb[1] * (-sin / sqa[0] * ops.x[0] + cos / sqa[1] * ops.x[1])
        + 1j * (-sqa[0] * sin * pp[0] + sqa[1] * cos * pp[1])
    ) / np.sqrt(2.0 * hbar * wb[1])
    return a1, a2


def lowest_eigenvalues(op: FockOperator | np.ndarray, k: int) -> np.ndarray:
    m = op.matrix if isinstance(op, FockOperator) else op
    vals = np.linalg.eigvalsh(m)
    return vals[:k]


def matrix_dump_text(op: FockOperator | np.ndarray) -> str:
    """Plain-text matrix dump: one row per line, 're im' pairs per entry."""
    m = op.matrix if isinstance(op, FockOperator) else np.asarray(op)
    lines = []
    for row in m:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def lambda_lattice(omega_bar, hbar: float, k: int):
    """The k smallest values of hbar sum_j omega_bar_j (n_j + 1/2), labeled."""
    entries = []
    for n1 in range(k + 1):
        for n2 in range(k + 1):
            entries.append(
                (hbar * (omega_bar[0] * (n1 + 0.5) + omega_bar[1] * (n2 + 0.5)), (n1, n2))
            )
    entries.sort(key=lambda e: e[0])
    return entries[:k]


@dataclass
class SpectrumReport:
    entries: list = field(default_factory=list)
    max_deviation: float = 0.0

    def to_dict(self) -> dict:
        return {"entries": self.entries, "max_deviation": self.max_deviation}


def spectrum_check(
    t: float, scenario: Scenario, spec: FockBasisSpec, k: int = 10
) -> SpectrumReport:
    """Compare the lowest k invariant eigenvalues against the label lattice.

    Matching is greedy nearest-value over the candidate lattice (transparent
    under near-degeneracies); deviations shrink with growing cutoff until
    rounding dominates.
    """
    if k > spec.dim // 4:
        raise ValueError("k too large for reliable truncation (k > N^2/4)")
    c = coefficients_at(t, scenario)
    data = decouple(c, scenario.constants)
    wb = data.omega_bar
    theory = lambda_lattice(wb, spec.hbar, 4 * k)
    measured = lowest_eigenvalues(invariant_matrix(t, scenario, spec), k)
    used = set()
    report = SpectrumReport()
    for lam in measured:
        best = None
        for i, (value, label) in enumerate(theory):
            if i in used:
                continue
            dev = abs(value - lam)
            if best is None or dev < best[0]:
                best = (dev, i, value, label)
        dev, i, value, label = best
        used.add(i)
        report.entries.append(
            {
                "n1": label[0],
                "n2": label[1],
                "lambda_theory": value,
                "lambda_matrix": float(lam),
                "deviation": float(dev),
            }
        )
    report.max_deviation = max(e["deviation"] for e in report.entries)
    return report
