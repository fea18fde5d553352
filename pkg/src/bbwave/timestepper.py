"""Implicit midpoint rule with a Picard solve of the internal stage."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import Functionals, Semidiscretization, State, functionals


class NonConvergenceError(RuntimeError):
    def __init__(self, message, residual=None, step=None):
        super().__init__(message)
        self.residual = residual
        self.step = step


@dataclass(frozen=True)
class ImrConfig:
    dt: float
    tol: float = 1e-12
    max_iter: int = 100

    def __post_init__(self):
        # dt < 0 is allowed: it integrates backwards (used for reversibility checks)
        if self.dt == 0 or not math.isfinite(self.dt):
            raise ValueError(f"time step must be nonzero and finite, got {self.dt}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class StepReport:
    iterations: int
    residual: float
    accepted: bool


def imr_step_modal(system: Semidiscretization, What: np.ndarray, cfg: ImrConfig):
    """One midpoint step on modal data; returns (new modal data, report).

    Solves W* = W + dt/2 f(W*) by fixed-point iteration seeded at W, then
    sets W_new = 2 W* - W. The residual is the modal max-norm of the last
    iterate update.
    """
    half = 0.5 * cfg.dt
    stage = What
    residual = math.inf
    for it in range(1, cfg.max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            new = What + half * system.rhs_modal(stage)
            residual = float(np.max(np.abs(new - stage)))
        stage = new
        if residual <= cfg.tol:
            return 2.0 * stage - What, StepReport(it, residual, True)
        if not math.isfinite(residual):
            raise NonConvergenceError(f"internal stage diverged after {it} iterations",
                                      residual=residual)
    raise NonConvergenceError(
        f"internal stage did not converge in {cfg.max_iter} iterations (residual {residual:.3e})",
        residual=residual,
    )


def imr_step(s: State, cfg: ImrConfig, coeffs, p, dealias: bool = False, lam=None):
    system = Semidiscretization(s.grid, coeffs, p, dealias, lam)
    What, report = imr_step_modal(system, system.to_modal(s.stack()), cfg)
    return State.from_stack(s.grid, system.to_physical(What), s.t + cfg.dt), report


def step_count(T: float, dt: float) -> int:
    """Number of steps M with T = M dt; rejects incommensurate pairs."""
    m = T / dt
    M = round(m)
    if M < 0 or abs(m - M) > 1e-9 * max(1.0, abs(m)):
        raise ValueError(f"final time {T} is not an integer multiple of dt={dt}")
    return int(M)


Observer = Callable[[float, State, Functionals, Optional[StepReport]], None]


def integrate(
    s0: State,
    T: float,
    cfg: ImrConfig,
    coeffs,
    p,
    observer: Observer | None = None,
    stride: int = 1,
    dealias: bool = False,
    reports: list | None = None,
    lam: float | None = None,
) -> State:
    """Advance ``s0`` by ``T`` (``T / dt`` must be a nonnegative integer).

    ``observer(t, state, functionals, report)`` is called at step 0 and every
    ``stride`` steps, and always at the final step.
    """
    M = step_count(T, cfg.dt)
    system = Semidiscretization(s0.grid, coeffs, p, dealias, lam)
    grid = s0.grid

    def notify(n, W_phys, report):
        if observer is None:
            return
        st = State.from_stack(grid, W_phys, s0.t + n * cfg.dt)
        observer(st.t, st, functionals(st, coeffs, p), report)

    notify(0, s0.stack(), None)
    if M == 0:
        return s0
    What = system.to_modal(s0.stack())
    for n in range(1, M + 1):
        try:
            What, report = imr_step_modal(system, What, cfg)
        except NonConvergenceError as exc:
            exc.step = n
            raise NonConvergenceError(f"step {n}: {exc}", exc.residual, n) from exc
        if reports is not None:
            reports.append(report)
        if observer is not None and (n % stride == 0 or n == M):
            notify(n, system.to_physical(What), report)
    return State.from_stack(grid, system.to_physical(What), s0.t + M * cfg.dt)
