"""Closed-form solitary waves of the BBM-BBM system and experiment initial data."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import State
from .model import ModelCoeffs, PhysicalParams, SystemClass, classify
from .spectral import Grid2D


class NoSolitaryWaveError(ValueError):
    pass


@dataclass(frozen=True)
class SolitaryWaveParams:
    c_s: float
    x0: float
    A: float
    A1: float
    A2: float
    B1: float


def solitary_constants(
    c_s: float, coeffs: ModelCoeffs, p: PhysicalParams, x0: float = 0.0, branch: int = 1
) -> SolitaryWaveParams:
    """Constants of the sech^2/sech^4 wave travelling in x with speed ``c_s``.

    ``branch=+1`` takes 1 - 4 b A^2 = +sqrt(r1 r2)/|c_s| (requires a
    supercritical speed); ``branch=-1`` takes the negative root.
    """
    if classify(coeffs) is not SystemClass.C1 or coeffs.b != coeffs.d:
        raise NoSolitaryWaveError("closed-form solitary waves need b = d > 0, a = c = 0")
    if p.lam == 0:
        raise NoSolitaryWaveError("lambda = 0: amplitudes are undefined")
    if c_s == 0:
        raise NoSolitaryWaveError("speed must be nonzero")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    b = coeffs.b
    root = math.sqrt(p.r1 * p.r2) / abs(c_s)
    A2sq = (1.0 - branch * root) / (4.0 * b)
    if A2sq <= 0:
        raise NoSolitaryWaveError(
            f"|c_s|={abs(c_s)} is not supercritical (need > {math.sqrt(p.r1 * p.r2)})"
        )
    A = math.sqrt(A2sq)
    B1 = 20.0 * b * c_s * A2sq / p.lam
    amp2 = B1 / (2.0 * p.r2) * (12.0 * b * c_s * A2sq - p.lam * B1)
    amp1 = c_s * amp2 * (1.0 - 16.0 * b * A2sq) / (p.lam * B1 - 6.0 * b * c_s * A2sq)
    return SolitaryWaveParams(c_s, x0, A, amp1, amp2, B1)


def exact_speed(p: PhysicalParams) -> float:
    """The only speed at which the sech^2/sech^4 profile solves the system.

    Matching the sech^2 terms of both travelling-wave equations gives a second
    formula for A1, c_s B1 (1 - 4 b A^2) / r2; it agrees with the one above
    only when 1 - 4 b A^2 = 2/5, i.e. c_s = (5/2) sqrt(r1 r2), for any b.
    """
    return 2.5 * math.sqrt(p.r1 * p.r2)


def closure_residual(w: SolitaryWaveParams, coeffs: ModelCoeffs, p: PhysicalParams) -> float:
    """Relative mismatch between the two expressions for A1 (zero iff exact)."""
    other = w.c_s * w.B1 * (1.0 - 4.0 * coeffs.b * w.A**2) / p.r2
    return abs(w.A1 - other) / abs(w.A1)


def solitary_residuals(w: SolitaryWaveParams, coeffs: ModelCoeffs, p: PhysicalParams):
    """Relative residuals of the four algebraic relations between the constants."""
    b, lam, c, A2 = coeffs.b, p.lam, w.c_s, w.A**2
    r = p.r1 * p.r2
    res_speed = (c**2 * (1 - 4 * b * A2) ** 2 - r) / r
    res_b1 = (w.B1 - 20 * b * c * A2 / lam) / abs(w.B1)
    res_a2 = (w.A2 - w.B1 / (2 * p.r2) * (12 * b * c * A2 - lam * w.B1)) / abs(w.A2)
    res_a1 = (w.A1 * (lam * w.B1 - 6 * b * c * A2) - c * w.A2 * (1 - 16 * b * A2)) / abs(
        w.A1 * (lam * w.B1 - 6 * b * c * A2)
    )
    return res_speed, res_b1, res_a2, res_a1


def solitary_profile(w: SolitaryWaveParams, x, t: float = 0.0):
    """(zeta, v1) of the travelling wave along x."""
    s = 1.0 / np.cosh(w.A * (np.asarray(x) - w.c_s * t - w.x0))
    s2 = s * s
    return w.A1 * s2 + w.A2 * s2 * s2, w.B1 * s2


def solitary_state(w: SolitaryWaveParams, t: float, grid: Grid2D) -> State:
    zeta1d, v1d = solitary_profile(w, grid.nodes, t)
    ones = np.ones(grid.N)
    return State(grid, np.outer(zeta1d, ones), np.outer(v1d, ones), np.zeros(grid.shape), t)


def gaussian_ic(amplitude: float, sx: float, sy: float, grid: Grid2D) -> State:
    """zeta = amplitude * exp(-(x^2/sx + y^2/sy)), zero velocity."""
    if not (sx > 0 and sy > 0):
        raise ValueError("Gaussian widths must be positive")
    X, Y = grid.mesh()
    z = amplitude * np.exp(-(X**2 / sx + Y**2 / sy))
    return State(grid, z, np.zeros(grid.shape), np.zeros(grid.shape))


def perturbed_line_ic(eps: float, B: float, x0: float, grid: Grid2D) -> State:
    """Line pulse exp(-(x-x0)^2/B) with transverse modulation 1 + eps cos(pi y / 2)."""
    if not B > 0:
        raise ValueError("pulse width B must be positive")
    if eps != 0 and abs(2 * grid.L / 4 - round(2 * grid.L / 4)) > 1e-12:
        raise ValueError(f"cos(pi y/2) is not periodic on a box of width {2 * grid.L}")
    X, Y = grid.mesh()
    z = (1.0 + eps * np.cos(0.5 * math.pi * Y)) * np.exp(-((X - x0) ** 2) / B)
    return State(grid, z, np.zeros(grid.shape), np.zeros(grid.shape))
