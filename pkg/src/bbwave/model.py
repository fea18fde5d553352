"""Physical parameters, dispersive coefficients and linear analysis of the
two-layer Boussinesq/Boussinesq system

    (1 - b Lap) zeta_t + r1 div v + lam div(zeta v) + a div Lap v = 0
    (1 - d Lap) v_t + r2 grad zeta + lam/2 grad |v|^2 + c' Lap grad zeta = 0

in nondimensional form, with c' = (1 - gamma) c.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """Physical or modelling parameter outside its admissible domain."""


class AnalysisError(ArithmeticError):
    """Linear analysis quantity undefined for the given coefficients/wavevector."""


@dataclass(frozen=True)
class PhysicalParams:
    gamma: float
    delta: float
    lam: float
    r1: float
    r2: float


@dataclass(frozen=True)
class ModellingKnobs:
    alpha1: float
    alpha2: float
    beta: float

    def __post_init__(self):
        if not (self.alpha1 >= 0 and self.alpha2 <= 1 and self.beta >= 0):
            raise ParameterError(
                f"need alpha1 >= 0, alpha2 <= 1, beta >= 0; got {self.alpha1}, "
                f"{self.alpha2}, {self.beta}"
            )


@dataclass(frozen=True)
class ModelCoeffs:
    a: float
    b: float
    c: float
    d: float
    c_prime: float
    well_posed: bool = field(init=False)

    def __post_init__(self):
        ok = self.a <= 0 and self.c <= 0 and self.b >= 0 and self.d >= 0
        object.__setattr__(self, "well_posed", bool(ok))

    @classmethod
    def from_values(cls, a, b, c, d, p: PhysicalParams) -> "ModelCoeffs":
        return cls(float(a), float(b), float(c), float(d), (1.0 - p.gamma) * c)


class SystemClass(enum.Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"
    C6 = "C6"
    C7 = "C7"
    C8 = "C8"
    OTHER_ADMISSIBLE = "OtherAdmissible"
    UNSUPPORTED = "Unsupported"

    @property
    def integrable(self) -> bool:
        return self is not SystemClass.UNSUPPORTED


@dataclass(frozen=True)
class LinearModeData:
    k: tuple
    ktilde: tuple
    sigma: float
    alpha_k: float
    P: np.ndarray


def derive_physical(gamma: float, delta: float) -> PhysicalParams:
    """Density ratio ``gamma`` = rho1/rho2 and depth ratio ``delta`` = d1/d2."""
    if not (0 <= gamma < 1):
        raise ParameterError(f"density ratio must satisfy 0 <= gamma < 1, got {gamma}")
    if not delta > 0:
        raise ParameterError(f"depth ratio must be positive, got {delta}")
    lam = (delta**2 - gamma) / (delta + gamma) ** 2
    return PhysicalParams(gamma, delta, lam, 1.0 / (gamma + delta), 1.0 - gamma)


def derive_coeffs(knobs: ModellingKnobs, p: PhysicalParams) -> ModelCoeffs:
    g, dl = p.gamma, p.delta
    a1, a2, beta = knobs.alpha1, knobs.alpha2, knobs.beta
    t1 = (1 - a1) * (1 + g * dl)
    t2 = 3 * dl * beta * (dl + g)
    num = t1 - t2
    # cancellation at the level of rounding means the knobs were chosen for a = 0
    if abs(num) <= 4 * np.finfo(float).eps * max(abs(t1), abs(t2)):
        num = 0.0
    a = num / (3 * dl * (g + dl) ** 2)
    b = a1 * (1 + g * dl) / (3 * dl * (g + dl))
    c = beta * a2
    d = beta * (1 - a2)
    return ModelCoeffs(a, b, c, d, (1 - g) * c)


def bbm_bbm_knobs(p: PhysicalParams) -> ModellingKnobs:
    """Knobs giving a = c = 0 and b = d (the BBM-BBM system)."""
    beta = (1 + p.gamma * p.delta) / (6 * p.delta * (p.delta + p.gamma))
    return ModellingKnobs(0.5, 0.0, beta)


def bbm_bbm_coeffs(p: PhysicalParams) -> ModelCoeffs:
    return derive_coeffs(bbm_bbm_knobs(p), p)


def classify(coeffs: ModelCoeffs) -> SystemClass:
    a, b, c, d = coeffs.a, coeffs.b, coeffs.c, coeffs.d
    if a > 0 or c > 0 or b < 0 or d < 0:
        return SystemClass.UNSUPPORTED
    if b > 0 and d > 0:
        if a == 0 and c == 0:
            return SystemClass.C1
        if a < 0 and c < 0:
            return SystemClass.C2
        if a == 0:
            return SystemClass.C3
        return SystemClass.C4
    if b == 0 and d > 0:
        if a < 0 and c < 0:
            return SystemClass.C5
        if a < 0 and c == 0:
            return SystemClass.C6
        if a == 0 and c == 0:
            return SystemClass.C8
    if b > 0 and d == 0 and a == 0 and c == 0:
        return SystemClass.C7
    return SystemClass.OTHER_ADMISSIBLE


def _symbols(coeffs: ModelCoeffs, p: PhysicalParams, k2):
    """Off-diagonal factors of the linear modal matrix at |k|^2 = k2."""
    top = (p.r1 - coeffs.a * k2) / (1 + coeffs.b * k2)
    bottom = (p.r2 - coeffs.c_prime * k2) / (1 + coeffs.d * k2)
    return top, bottom


def dispersion_omega(coeffs: ModelCoeffs, p: PhysicalParams, ktilde) -> float:
    """Linear frequency omega(k) = |k| sigma(k) for the physical wavevector ``ktilde``."""
    kx, ky = ktilde
    k2 = kx * kx + ky * ky
    if k2 == 0:
        return 0.0
    top, bottom = _symbols(coeffs, p, k2)
    rad = top * bottom
    if rad < 0:
        raise AnalysisError(f"negative dispersion radicand {rad} at |k|^2={k2}")
    return math.sqrt(k2) * math.sqrt(rad)


def modal_matrix(coeffs: ModelCoeffs, p: PhysicalParams, ktilde) -> np.ndarray:
    """The 3x3 matrix A(k) acting on (zeta, v1, v2) modal amplitudes."""
    kx, ky = ktilde
    kn = math.hypot(kx, ky)
    if kn == 0:
        raise ParameterError("modal matrix undefined at k = 0")
    top, bottom = _symbols(coeffs, p, kn * kn)
    ex, ey = kx / kn, ky / kn
    return np.array(
        [[0.0, ex * top, ey * top], [ex * bottom, 0.0, 0.0], [ey * bottom, 0.0, 0.0]]
    )


def eigen_basis(coeffs: ModelCoeffs, p: PhysicalParams, k, L: float = math.pi) -> LinearModeData:
    """Diagonalizing basis of A(k) for the integer wavevector ``k`` on (-L, L)^2.

    The default ``L`` makes the physical and integer wavevectors coincide.
    Columns of ``P`` are the eigenvectors for 0, +sigma and -sigma.
    """
    kx, ky = int(k[0]), int(k[1])
    if kx == 0 and ky == 0:
        raise ParameterError("eigen basis undefined at k = 0")
    s = math.pi / L
    kt = (s * kx, s * ky)
    kn = math.hypot(*kt)
    top, bottom = _symbols(coeffs, p, kn * kn)
    if top * bottom < 0:
        raise AnalysisError("complex eigenvalues: coefficients are linearly ill-posed")
    if bottom == 0 or top == 0:
        raise AnalysisError(f"degenerate diagonalization ratio at k={k}")
    sigma = math.sqrt(top * bottom)
    alpha_k = math.sqrt(top / bottom)
    ex, ey = kt[0] / kn, kt[1] / kn
    P = np.array([[0.0, alpha_k, -alpha_k], [-ey, ex, ex], [ex, ey, ey]])
    return LinearModeData((kx, ky), kt, sigma, alpha_k, P)
