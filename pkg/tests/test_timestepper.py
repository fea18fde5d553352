import math

import numpy as np
import pytest

from bbwave.checks import forward_backward_defect, linear_mode_error, random_smooth_state
from bbwave.dynamics import Semidiscretization, State, means
from bbwave.model import ModelCoeffs, bbm_bbm_coeffs, derive_physical
from bbwave.spectral import Grid2D
from bbwave.timestepper import (
    ImrConfig,
    NonConvergenceError,
    imr_step,
    imr_step_modal,
    integrate,
    step_count,
)
from bbwave.waves import exact_speed, solitary_constants, solitary_state


@pytest.mark.parametrize("kw", [{"dt": 0.0}, {"dt": math.inf}, {"dt": 0.1, "tol": 0.0},
                                {"dt": 0.1, "max_iter": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ImrConfig(**kw)


def test_negative_dt_allowed():
    assert ImrConfig(-0.1).dt == -0.1


def test_zero_state_one_iteration(bbm, phys):
    s = State.zeros(Grid2D(4.0, 16))
    out, rep = imr_step(s, ImrConfig(0.1), bbm, phys)
    assert rep.iterations == 1 and rep.accepted and rep.residual == 0.0
    assert all(np.all(f == 0) for f in out.stack())
    assert out.t == 0.1


@pytest.mark.parametrize("abcd", [(0.0, 0.19, 0.0, 0.19), (-0.1, 0.3, 0.0, 0.2),
                                  (0.0, 0.25, -0.05, 0.4)])
@pytest.mark.parametrize("k", [(1, 0), (2, -3), (-4, 1)])
def test_one_step_rational_amplification(abcd, k, phys):
    coeffs = ModelCoeffs.from_values(*abcd, phys)
    err = linear_mode_error(coeffs, phys, Grid2D(2 * math.pi, 16), k,
                            np.array([0.5 + 0.2j, -0.3j, 0.1]), 0.05, 1)
    assert err <= 1e-10


def test_accepted_residual_below_tol(bbm, phys):
    s = random_smooth_state(Grid2D(4.0, 32), np.random.default_rng(0))
    _, rep = imr_step(s, ImrConfig(0.05, tol=1e-11), bbm, phys)
    assert rep.accepted and rep.residual <= 1e-11 and rep.iterations > 1


def test_non_convergence_reported(bbm, phys):
    s = random_smooth_state(Grid2D(4.0, 32), np.random.default_rng(0))
    with pytest.raises(NonConvergenceError) as info:
        imr_step(s, ImrConfig(0.05, max_iter=2), bbm, phys)
    assert info.value.residual > 0
    with pytest.raises(NonConvergenceError) as info:
        integrate(s, 0.2, ImrConfig(0.05, max_iter=2), bbm, phys)
    assert info.value.step == 1


def test_divergent_iteration_reported(bbm, phys):
    s = random_smooth_state(Grid2D(4.0, 32), np.random.default_rng(0), amp=50.0)
    with pytest.raises(NonConvergenceError, match="diverged"):
        imr_step(s, ImrConfig(5.0, max_iter=1000), bbm, phys)


@pytest.mark.parametrize("T,dt,M", [(5.0, 0.025, 200), (1.0, 1e-3, 1000), (0.0, 0.1, 0)])
def test_step_count(T, dt, M):
    assert step_count(T, dt) == M


@pytest.mark.parametrize("T,dt", [(1.0, 0.3), (-1.0, 0.1)])
def test_step_count_rejects(T, dt):
    with pytest.raises(ValueError):
        step_count(T, dt)


def test_zero_steps_returns_input(bbm, phys):
    s = random_smooth_state(Grid2D(4.0, 16), np.random.default_rng(0))
    assert integrate(s, 0.0, ImrConfig(0.1), bbm, phys) is s


def test_observer_schedule(bbm, phys):
    s = random_smooth_state(Grid2D(4.0, 16), np.random.default_rng(0))
    seen = []
    integrate(s, 0.7, ImrConfig(0.1), bbm, phys, observer=lambda t, st, f, r: seen.append(t),
              stride=3)
    assert seen == pytest.approx([0.0, 0.3, 0.6, 0.7])


def test_time_reversibility(bbm, phys):
    tol = 1e-12
    s0 = random_smooth_state(Grid2D(4.0, 32), np.random.default_rng(3))
    M = 10
    fwd = integrate(s0, 0.5, ImrConfig(0.05, tol), bbm, phys)
    back = integrate(fwd, -0.5, ImrConfig(-0.05, tol), bbm, phys)
    sys = Semidiscretization(s0.grid, bbm, phys)
    diff = sys.to_modal(back.stack()) - sys.to_modal(s0.stack())
    assert np.max(np.abs(diff)) <= 10 * tol * M
    assert back.t == pytest.approx(0.0, abs=1e-15)


def test_forward_backward_single_step(bbm, phys):
    s = random_smooth_state(Grid2D(4.0, 32), np.random.default_rng(4))
    assert forward_backward_defect(s, bbm, phys, 0.05) <= 1e-11


def test_means_conserved(phys):
    coeffs = ModelCoeffs.from_values(-0.1, 0.2, -0.1, 0.3, phys)
    s0 = random_smooth_state(Grid2D(4.0, 32), np.random.default_rng(5))
    s0 = State(s0.grid, s0.zeta + 0.3, s0.v1 - 0.2, s0.v2 + 0.1)
    m0 = np.array(means(s0))
    drift = []
    integrate(s0, 1.0, ImrConfig(0.05), coeffs, phys,
              observer=lambda t, st, f, r: drift.append(np.max(np.abs(np.array(means(st)) - m0))))
    assert max(drift) <= 1e-13


def test_local_error_is_third_order():
    p = derive_physical(0.5, 0.9)
    coeffs = bbm_bbm_coeffs(p)
    w = solitary_constants(exact_speed(p), coeffs, p, x0=0.0)
    g = Grid2D(16.0, 128)
    s0 = solitary_state(w, 0.0, g)
    errs = []
    for dt in (2.5e-2, 1.25e-2):
        s1, _ = imr_step(s0, ImrConfig(dt), coeffs, p)
        ref = solitary_state(w, dt, g)
        errs.append(g.h * np.linalg.norm(s1.stack() - ref.stack()))
    assert 6.5 <= errs[0] / errs[1] <= 9.5


def test_modal_step_matches_physical(bbm, phys):
    s = random_smooth_state(Grid2D(4.0, 16), np.random.default_rng(6))
    sys = Semidiscretization(s.grid, bbm, phys)
    W, _ = imr_step_modal(sys, sys.to_modal(s.stack()), ImrConfig(0.1))
    out, _ = imr_step(s, ImrConfig(0.1), bbm, phys)
    assert np.array_equal(sys.to_physical(W), out.stack())
