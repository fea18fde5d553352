"""Doubly periodic Fourier collocation on (-L, L)^2.

Fields are real ``(N, N)`` arrays indexed ``[j, k]`` with ``j`` the x node and
``k`` the y node. Modal coefficients are normalized so that the zero mode is the
grid mean (forward transform divided by N^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Grid2D:
    L: float
    N: int

    def __post_init__(self):
        if self.N < 8 or self.N % 2:
            raise ValueError(f"N must be even and >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    def mesh(self):
        return np.meshgrid(self.nodes, self.nodes, indexing="ij")

    @property
    def scale(self) -> float:
        """Physical wavenumber per integer wavenumber, pi / L."""
        return math.pi / self.L

    # -- full-lattice wavenumbers (match ``forward``) --------------------------

    @cached_property
    def k_int(self) -> tuple[np.ndarray, np.ndarray]:
        k = np.rint(sfft.fftfreq(self.N, 1.0 / self.N)).astype(int)
        return k[:, None], k[None, :]

    @cached_property
    def k2(self) -> np.ndarray:
        kx, ky = self.k_int
        return self.scale**2 * (kx**2 + ky**2).astype(float)

    @cached_property
    def _ik(self) -> tuple[np.ndarray, np.ndarray]:
        # odd-derivative multipliers with the Nyquist mode removed
        kx, ky = self.k_int
        nyq = self.N // 2
        ikx = np.where(np.abs(kx) == nyq, 0.0, 1j * self.scale * kx)
        iky = np.where(np.abs(ky) == nyq, 0.0, 1j * self.scale * ky)
        return ikx, iky

    # -- half-lattice wavenumbers (match ``rforward``) -------------------------

    @cached_property
    def rk2(self) -> np.ndarray:
        kx, _ = self.k_int
        ky = np.arange(self.N // 2 + 1)[None, :]
        return self.scale**2 * (kx**2 + ky**2).astype(float)

    @cached_property
    def rik(self) -> tuple[np.ndarray, np.ndarray]:
        kx, _ = self.k_int
        ky = np.arange(self.N // 2 + 1)[None, :]
        nyq = self.N // 2
        ikx = np.where(np.abs(kx) == nyq, 0.0, 1j * self.scale * kx)
        iky = np.where(ky == nyq, 0.0, 1j * self.scale * ky)
        return ikx, iky

    # -- transforms ------------------------------------------------------------

    def check(self, f) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise GridMismatchError(f"field of shape {f.shape} on a grid of shape {self.shape}")
        return f

    def forward(self, f) -> np.ndarray:
        """Full complex spectrum, coefficient ``[kx, ky]`` in FFT ordering."""
        return sfft.fft2(self.check(f)) / self.N**2

    def inverse(self, F) -> np.ndarray:
        return sfft.ifft2(self.check(F) * self.N**2).real

    def rforward(self, f) -> np.ndarray:
        """Half spectrum of a real field, shape ``(..., N, N//2 + 1)``."""
        return sfft.rfft2(f, norm="forward")

    def rinverse(self, F) -> np.ndarray:
        F = np.asarray(F)
        if F.ndim == 2:
            return sfft.irfft2(F, s=self.shape, norm="forward")
        # scipy's batched c2r path is slower than one transform per field
        return np.stack([self.rinverse(Fi) for Fi in F])

    def mode_index(self, kx: int, ky: int) -> tuple[int, int]:
        """Array index of the integer mode (kx, ky) in the full spectrum."""
        return kx % self.N, ky % self.N

    # -- differential operators ------------------------------------------------

    def partial_x(self, f) -> np.ndarray:
        return self.inverse(self._ik[0] * self.forward(f))

    def partial_y(self, f) -> np.ndarray:
        return self.inverse(self._ik[1] * self.forward(f))

    def gradient(self, f):
        F = self.forward(f)
        return self.inverse(self._ik[0] * F), self.inverse(self._ik[1] * F)

    def divergence(self, v1, v2) -> np.ndarray:
        return self.inverse(self._ik[0] * self.forward(v1) + self._ik[1] * self.forward(v2))

    def laplacian(self, f) -> np.ndarray:
        return self.inverse(-self.k2 * self.forward(f))

    def helmholtz_solve(self, alpha: float, f) -> np.ndarray:
        """Solve (I - alpha Lap) u = f."""
        if alpha < 0:
            raise ValueError(f"Helmholtz coefficient must be >= 0, got {alpha}")
        return self.inverse(self.forward(f) / (1.0 + alpha * self.k2))

    @cached_property
    def low_band(self) -> np.ndarray:
        kx, ky = self.k_int
        return np.maximum(np.abs(kx), np.abs(ky)) <= self.N / 3

    def dealias_23(self, F) -> np.ndarray:
        """Zero every mode with max(|kx|, |ky|) > N/3."""
        return np.where(self.low_band, self.check(F), 0.0)

    @cached_property
    def rlow_band(self) -> np.ndarray:
        kx, _ = self.k_int
        ky = np.arange(self.N // 2 + 1)[None, :]
        return np.maximum(np.abs(kx), ky) <= self.N / 3

    def shift_x(self, f, dx: float) -> np.ndarray:
        """Trigonometric-interpolant translation: returns g(x) = f(x - dx)."""
        F = self.rforward(f)
        kx, _ = self.k_int
        phase = np.exp(-1j * self.scale * kx * dx)
        # real-valued shift needs a symmetric Nyquist treatment
        phase = np.where(np.abs(kx) == self.N // 2, np.cos(self.scale * kx * dx), phase)
        return self.rinverse(F * phase)
