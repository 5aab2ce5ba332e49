"""Phase-space form of the invariant and its symplectic decoupling.

The invariant is a quadratic form I = 1/2 z^T S z over z = (x1, x2, p1, p2).
The unitary chain that maps it onto two independent fixed-frequency
oscillators acts on phase space as three symplectic point maps:

* a per-mode dilation  x_j -> x_j / sqrt(M alpha_j), p_j -> sqrt(M alpha_j) p_j,
* a momentum shear     p_j -> p_j + M beta_j x_j,
* a joint rotation of (x1, x2) and (p1, p2) by the mixing angle phi.

:func:`transform` re-expresses a form in the coordinates produced by a map
(the congruence by the map's inverse), so pushing the original form through
dilation + shear yields 1/2 sum_j (p_j^2/M + M omega0_j^2 x_j^2) plus the
cross term M delta sqrt(alpha_1 alpha_2) x1 x2, and the rotation by the
angle of :func:`rotation_angle` removes the cross term entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotPositiveDefiniteError

__all__ = [
    "DecoupledSpectrumData",
    "J4",
    "QuadraticForm",
    "RotationAngle",
    "SymplecticMap",
    "decouple",
    "decoupling_maps",
    "dilation_map",
    "rotation_angle",
    "rotation_map",
    "shear_map",
    "to_quadratic_form",
    "transform",
]

#: canonical symplectic unit for z = (x1, x2, p1, p2)
J4 = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
)

SYMPLECTIC_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric 4x4 matrix S with semantics I = 1/2 z^T S z."""

    matrix: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.matrix, dtype=np.float64)
        if s.shape != (4, 4):
            raise ValueError("quadratic form must be 4x4")
        object.__setattr__(self, "matrix", (s + s.T) / 2.0)

    def value(self, z) -> float:
        z = np.asarray(z, dtype=np.float64)
        return 0.5 * float(z @ self.matrix @ z)

    def coefficient_blocks(self):
        """(x2 coefficients, p2 coefficients, xp pair, cross) as in the scalar form."""
        s = self.matrix
        return (
            (s[0, 0], s[1, 1]),
            (s[2, 2], s[3, 3]),
            (s[0, 2], s[1, 3]),
            s[0, 1],
        )


@dataclass(frozen=True)
class SymplecticMap:
    """Linear phase-space map T with T^T J T = J (checked on construction)."""

    matrix: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.matrix, dtype=np.float64)
        if t.shape != (4, 4):
            raise ValueError("symplectic map must be 4x4")
        defect = np.max(np.abs(t.T @ J4 @ t - J4))
        if defect > SYMPLECTIC_TOL:
            raise ValueError(f"map is not symplectic (defect {defect:.3e})")
        object.__setattr__(self, "matrix", t)

    def __matmul__(self, other: "SymplecticMap") -> "SymplecticMap":
        return SymplecticMap(self.matrix @ other.matrix)

    def inverse(self) -> "SymplecticMap":
        # T^-1 = J^-1 T^T J, exact up to the symplectic defect
        return SymplecticMap(-J4 @ self.matrix.T @ J4)

    def apply(self, z) -> np.ndarray:
        return self.matrix @ np.asarray(z, dtype=np.float64)


def to_quadratic_form(coeffs) -> QuadraticForm:
    """Matrix of the invariant built from an InvariantCoefficients tuple."""
    a1, a2 = coeffs.alpha
    b1, b2 = coeffs.beta
    g1, g2 = coeffs.gamma
    d = coeffs.delta
    s = np.array(
        [
            [g1, d, b1, 0.0],
            [d, g2, 0.0, b2],
            [b1, 0.0, a1, 0.0],
            [0.0, b2, 0.0, a2],
        ]
    )
    return QuadraticForm(s)


def dilation_map(coeffs, constants) -> SymplecticMap:
    """Per-mode rescaling x_j -> x_j / sqrt(M alpha_j), p_j -> sqrt(M alpha_j) p_j."""
    m = constants.bigM
    scales = [m * a for a in coeffs.alpha]
    if any(s <= 0 for s in scales):
        raise ValueError("M alpha_j must be positive")
    roots = [math.sqrt(s) for s in scales]
    return SymplecticMap(np.diag([1.0 / roots[0], 1.0 / roots[1], roots[0], roots[1]]))


def shear_map(coeffs, constants) -> SymplecticMap:
    """Momentum shear p_j -> p_j + M beta_j x_j, positions unchanged."""
    m = constants.bigM
    t = np.eye(4)
    t[2, 0] = m * coeffs.beta[0]
    t[3, 1] = m * coeffs.beta[1]
    return SymplecticMap(t)


def rotation_map(phi: float) -> SymplecticMap:
    """Joint rotation of positions and momenta by phi.

    x1 -> x1 cos(phi) + x2 sin(phi), x2 -> -x1 sin(phi) + x2 cos(phi),
    identically for (p1, p2); matches the rotated-coordinate convention of
    the eigenfunction stage.
    """
    c, s = math.cos(phi), math.sin(phi)
    block = np.array([[c, s], [-s, c]])
    t = np.zeros((4, 4))
    t[:2, :2] = block
    t[2:, 2:] = block
    return SymplecticMap(t)


def transform(form: QuadraticForm, smap: SymplecticMap) -> QuadraticForm:
    """Re-express a form in the coordinates z' = T z.

    Returns S' with (1/2) z'^T S' z' = (1/2) z^T S z, i.e. the congruence by
    T^-1; the operation matching operator conjugation for quadratic forms.
    """
    if not isinstance(smap, SymplecticMap):
        raise TypeError("transform requires a SymplecticMap")
    tinv = smap.inverse().matrix
    return QuadraticForm(tinv.T @ form.matrix @ tinv)


class RotationAngle(NamedTuple):
    phi: float
    degenerate: bool


def rotation_angle(omega0, coupling: float) -> RotationAngle:
    """Mixing angle phi in (-pi/2, pi/2] that removes the cross coefficient.

    phi = atan2(coupling, (omega0_1^2 - omega0_2^2)/2) / 2.  When both
    arguments vanish the modes are degenerate and uncoupled; any angle works
    and 0 is returned with the degeneracy flagged.
    """
    return _rotation_angle_sq(omega0[0] ** 2, omega0[1] ** 2, coupling)


def _rotation_angle_sq(w1sq: float, w2sq: float, coupling: float) -> RotationAngle:
    half_diff = 0.5 * (w1sq - w2sq)
    if half_diff == 0.0 and coupling == 0.0:
        return RotationAngle(0.0, True)
    return RotationAngle(0.5 * math.atan2(coupling, half_diff), False)


@dataclass(frozen=True)
class DecoupledSpectrumData:
    """Constants of the decoupled pair: omega0_j, phi, omega_bar_j, delta_bar.

    ``omega_bar_sq`` entries may be negative (coupling exceeding the mode
    splitting); that is reported through ``positive_definite`` rather than
    raised, since only the Fock and eigenfunction stages require positivity.
    """

    omega0: tuple[float, float]
    phi: float
    omega_bar_sq: tuple[float, float]
    delta_bar: float
    degenerate: bool

    @property
    def positive_definite(self) -> bool:
        return all(w > 0 for w in self.omega_bar_sq)

    @property
    def omega_bar(self) -> tuple[float, float]:
        if not self.positive_definite:
            raise NotPositiveDefiniteError("invariant not positive definite")
        return (math.sqrt(self.omega_bar_sq[0]), math.sqrt(self.omega_bar_sq[1]))

    def to_dict(self) -> dict:
        return {
            "omega0": list(self.omega0),
            "phi": self.phi,
            "omega_bar": list(self.omega_bar) if self.positive_definite else None,
            "omega_bar_sq": list(self.omega_bar_sq),
            "delta_bar": self.delta_bar,
            "flags": {
                "degenerate": self.degenerate,
                "positive_definite": self.positive_definite,
            },
        }


def decouple(coeffs, constants) -> DecoupledSpectrumData:
    """Decoupling constants from the coefficients at one time.

    omega0_j^2 = alpha_j gamma_j - beta_j^2, the rotation angle phi, the
    rotated frequencies

        omega_bar_1^2 = omega0_1^2 cos^2(phi) + omega0_2^2 sin^2(phi)
                        + delta sqrt(alpha_1 alpha_2) sin(2 phi),

    its mirror for mode 2, and the residual cross coefficient delta_bar
    (zero at the returned phi).  All outputs are time-independent for
    constraint-satisfying scenarios.
    """
    a1, a2 = coeffs.alpha
    if a1 <= 0 or a2 <= 0:
        raise ValueError("alpha_j must be positive")
    w1sq = a1 * coeffs.gamma[0] - coeffs.beta[0] ** 2
    w2sq = a2 * coeffs.gamma[1] - coeffs.beta[1] ** 2
    coupling = coeffs.delta * math.sqrt(a1 * a2)
    phi, degenerate = _rotation_angle_sq(w1sq, w2sq, coupling)
    c, s = math.cos(phi), math.sin(phi)
    s2, c2 = math.sin(2 * phi), math.cos(2 * phi)
    wbar1 = w1sq * c * c + w2sq * s * s + coupling * s2
    wbar2 = w1sq * s * s + w2sq * c * c - coupling * s2
    delta_bar = constants.bigM * (coupling * c2 - 0.5 * (w1sq - w2sq) * s2)
    with np.errstate(invalid="ignore"):
        omega0 = (float(np.sqrt(w1sq)), float(np.sqrt(w2sq)))
    return DecoupledSpectrumData(
        omega0=omega0,
        phi=phi,
        omega_bar_sq=(wbar1, wbar2),
        delta_bar=delta_bar,
        degenerate=degenerate,
    )


def decoupling_maps(coeffs, constants, phi: float | None = None):
    """The (dilation, shear, rotation) chain for the given coefficients.

    Applying :func:`transform` with these three maps in order carries the
    invariant's form to diag(M omega_bar_j^2) + diag(1/M).  The composite
    point map is rotation @ shear @ dilation.
    """
    if phi is None:
        phi = decouple(coeffs, constants).phi
    return dilation_map(coeffs, constants), shear_map(coeffs, constants), rotation_map(phi)
