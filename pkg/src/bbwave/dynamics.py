"""Semidiscrete collocation system, its Hamiltonian and simple diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import ModelCoeffs, PhysicalParams, classify
from .spectral import Grid2D, GridMismatchError


class UnsupportedSystemError(ValueError):
    """Coefficients outside the linearly well-posed range cannot be integrated."""


@dataclass(frozen=True)
class State:
    grid: Grid2D
    zeta: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("zeta", "v1", "v2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.grid.shape:
                raise GridMismatchError(f"{name} has shape {arr.shape}, grid is {self.grid.shape}")
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, grid: Grid2D, t: float = 0.0) -> "State":
        z = np.zeros(grid.shape)
        return cls(grid, z, z.copy(), z.copy(), t)

    @classmethod
    def from_stack(cls, grid: Grid2D, W: np.ndarray, t: float = 0.0) -> "State":
        return cls(grid, W[0], W[1], W[2], t)

    def stack(self) -> np.ndarray:
        return np.stack([self.zeta, self.v1, self.v2])

    def with_time(self, t: float) -> "State":
        return replace(self, t=t)


@dataclass(frozen=True)
class Functionals:
    hamiltonian: float
    mean_zeta: float
    mean_v1: float
    mean_v2: float
    l2_zeta: float
    l2_v: float


class Semidiscretization:
    """Right-hand side of the collocation ODE system, evaluated in modal space.

    Modal arrays have shape ``(3, N, N//2 + 1)`` (half spectrum of each of
    zeta, v1, v2). Nonlinear products are formed pointwise on the grid.
    """

    def __init__(
        self,
        grid: Grid2D,
        coeffs: ModelCoeffs,
        p: PhysicalParams,
        dealias: bool = False,
        lam: float | None = None,
    ):
        if not classify(coeffs).integrable:
            raise UnsupportedSystemError(
                f"coefficients a={coeffs.a}, b={coeffs.b}, c={coeffs.c}, d={coeffs.d} "
                "are not linearly well-posed"
            )
        self.grid = grid
        self.coeffs = coeffs
        self.p = p
        self.dealias = dealias
        # lam overrides the nonlinearity constant (0 gives the linearized system)
        self.lam = p.lam if lam is None else lam
        k2 = grid.rk2
        # odd-derivative multipliers are i*kx, i*ky; keep the real factors and
        # apply i once per component
        kx, ky = (m.imag for m in grid.rik)
        inv_b = 1.0 / (1.0 + coeffs.b * k2)
        inv_d = 1.0 / (1.0 + coeffs.d * k2)
        lin_z = -inv_b * (p.r1 - coeffs.a * k2)
        lin_v = -inv_d * (p.r2 - coeffs.c_prime * k2)
        self.lin_zx, self.lin_zy = lin_z * kx, lin_z * ky
        self.lin_vx, self.lin_vy = lin_v * kx, lin_v * ky
        # nonlinear multipliers, without the factor lambda
        self.nl_zx, self.nl_zy = -inv_b * kx, -inv_b * ky
        self.nl_vx, self.nl_vy = -inv_d * kx, -inv_d * ky
        self.mask = grid.rlow_band if dealias else None

    def to_modal(self, W: np.ndarray) -> np.ndarray:
        return self.grid.rforward(W)

    def to_physical(self, What: np.ndarray) -> np.ndarray:
        return self.grid.rinverse(What)

    def rhs_modal(self, What: np.ndarray) -> np.ndarray:
        lam = self.lam
        zh, v1h, v2h = What
        out = np.empty_like(What)
        out[0] = self.lin_zx * v1h + self.lin_zy * v2h
        out[1] = self.lin_vx * zh
        out[2] = self.lin_vy * zh
        if lam != 0.0:
            if self.mask is not None:
                What = What * self.mask
            z, v1, v2 = self.to_physical(What)
            prod = self.to_modal(np.stack([z * v1, z * v2, 0.5 * (v1 * v1 + v2 * v2)]))
            if self.mask is not None:
                prod *= self.mask
            out[0] += lam * (self.nl_zx * prod[0] + self.nl_zy * prod[1])
            out[1] += lam * self.nl_vx * prod[2]
            out[2] += lam * self.nl_vy * prod[2]
        out *= 1j
        return out

    def rhs(self, s: State) -> State:
        dW = self.to_physical(self.rhs_modal(self.to_modal(s.stack())))
        return State.from_stack(s.grid, dW, s.t)


def rhs(s: State, coeffs: ModelCoeffs, p: PhysicalParams, dealias: bool = False,
        lam: float | None = None) -> State:
    """Time derivative of ``s`` under the semidiscrete system."""
    return Semidiscretization(s.grid, coeffs, p, dealias, lam).rhs(s)


def _gradient_energy(grid: Grid2D, f: np.ndarray) -> float:
    # h^2 sum |grad f|^2 = -h^2 sum f Lap_N f, evaluated by Parseval
    F = grid.forward(f)
    return (2 * grid.L) ** 2 * float(np.sum(grid.k2 * np.abs(F) ** 2))


def hamiltonian(s: State, coeffs: ModelCoeffs, p: PhysicalParams) -> float:
    """Rectangle-rule quadrature of the energy functional on the periodic grid."""
    g = s.grid
    z, v1, v2 = s.zeta, s.v1, s.v2
    vsq = v1 * v1 + v2 * v2
    local = float(np.sum((p.r1 + p.lam * z) * vsq + p.r2 * z * z)) * g.h**2
    grad = 0.0
    if coeffs.c_prime != 0.0:
        grad -= coeffs.c_prime * _gradient_energy(g, z)
    if coeffs.a != 0.0:
        grad -= coeffs.a * (_gradient_energy(g, v1) + _gradient_energy(g, v2))
    return local + grad


def means(s: State) -> tuple[float, float, float]:
    # compensated sums keep the k=0 bookkeeping at rounding level
    n = s.zeta.size
    return tuple(math.fsum(f.ravel()) / n for f in (s.zeta, s.v1, s.v2))


def functionals(s: State, coeffs: ModelCoeffs, p: PhysicalParams) -> Functionals:
    h = s.grid.h
    mz, m1, m2 = means(s)
    return Functionals(
        hamiltonian=hamiltonian(s, coeffs, p),
        mean_zeta=mz,
        mean_v1=m1,
        mean_v2=m2,
        l2_zeta=h * float(np.linalg.norm(s.zeta)),
        l2_v=h * float(np.sqrt(np.sum(s.v1**2 + s.v2**2))),
    )


def reflect(f: np.ndarray) -> np.ndarray:
    """Values at the mirrored nodes, (x, y) -> (-x, -y) on the periodic grid."""
    return np.roll(f[::-1, ::-1], 1, axis=(0, 1))


def symmetry_defect(s: State) -> float:
    """Max pointwise violation of zeta even, v odd under point reflection."""
    d = (
        np.abs(s.zeta - reflect(s.zeta))
        + np.abs(s.v1 + reflect(s.v1))
        + np.abs(s.v2 + reflect(s.v2))
    )
    return float(d.max())
