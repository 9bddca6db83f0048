"""Shared fixtures: the standard CaF2 resonator and cached solver states.

Expensive steady-state solves are session-scoped and reused across module
and acceptance tests; each fixture also reports its wall-clock solve time
so runtime budgets can be asserted without re-solving.
"""

from __future__ import annotations

import math
import time

import pytest

from kerrcomb import steady_state as ss
from kerrcomb import units

TWO_PI = 2.0 * math.pi


def caf2_config(pump_power: float = 2.5e-3, zeta2: float = TWO_PI * 2.9e3,
                detuning: float = 0.0) -> units.ResonatorConfig:
    """mm-size CaF2 add-through resonator pumped near 1550 nm."""
    return units.ResonatorConfig(
        pump_wavelength=1550e-9, main_radius=2.5e-3, group_index=1.43,
        intrinsic_Q=1e9, through_Q=0.25e9, pump_power=pump_power,
        detuning=detuning, gamma=0.001, zeta2=zeta2)


def make_flat(g_over_kappa: float, sigma_over_kappa: float,
              zeta2_over_kappa: float, rho: float = 0.5,
              kappa: float = 1.0, g0: float = 1e-3):
    """Flat state engineered to have g0|A0|^2 = g_over_kappa * kappa.

    Returns (branches, branch_name) where branch_name selects the root
    with the requested photon number.
    """
    N = g_over_kappa * kappa / g0
    sigma = sigma_over_kappa * kappa
    drive = N * (kappa**2 + (sigma + g0 * N) ** 2)
    kappa_t = rho * kappa
    A_in = math.sqrt(drive / (2.0 * kappa_t))
    params = units.ModalParams(
        kappa=kappa, kappa_t=kappa_t, sigma=sigma,
        zeta2=zeta2_over_kappa * kappa, g0=g0, A_in=A_in, rho=rho,
        omega_L=1.2153e15)
    branches = ss.solve_flat_state(params)
    names = ("lower", "middle", "upper") if branches.bistable else ("lower", "upper")
    for name in names:
        if math.isclose(abs(getattr(branches, name)) ** 2, N,
                        rel_tol=1e-6):
            return branches, name
    raise AssertionError(f"no branch matches N = {N}")


def _timed(solve):
    t0 = time.perf_counter()
    state = solve()
    return state, time.perf_counter() - t0


@pytest.fixture(scope="session")
def vi_c_budget():
    return units.derive_loss_budget(caf2_config())


@pytest.fixture(scope="session")
def roll20(vi_c_budget):
    """Roll(20) at P = 2.5 mW, sigma = -kappa (initial-condition selected)."""
    cfg = caf2_config(pump_power=2.5e-3)
    params = units.modal_params(cfg, vi_c_budget, sigma=-vi_c_budget.kappa)
    return _timed(lambda: ss.find_steady_state(
        params, kind="roll", seed=0, target_order=20))


@pytest.fixture(scope="session")
def three_mode(vi_c_budget):
    """Exact three-mode comb: P = 1.01 P_th, sigma = -kappa, K < 2L."""
    cfg = caf2_config()
    p_th = units.threshold_pump_power(
        vi_c_budget, cfg.nonlinear_gain(), cfg.omega_L, -vi_c_budget.kappa)
    params = units.modal_params(cfg, vi_c_budget, pump_power=1.01 * p_th,
                                sigma=-vi_c_budget.kappa)
    state, secs = _timed(lambda: ss.find_steady_state(
        params, kind="roll", seed=0, K=20, horizon=8000.0))
    return ss.rotate_to_symmetric(state), secs


@pytest.fixture(scope="session")
def bright_soliton(vi_c_budget):
    cfg = caf2_config(pump_power=4e-3)
    params = units.modal_params(cfg, vi_c_budget, sigma=-2.0 * vi_c_budget.kappa)
    state, secs = _timed(lambda: ss.find_steady_state(
        params, kind="bright_soliton", horizon=500.0))
    return ss.rotate_to_symmetric(state), secs


@pytest.fixture(scope="session")
def dark_soliton(vi_c_budget):
    cfg = caf2_config(pump_power=5.3e-3, zeta2=-TWO_PI * 2.9e3)
    params = units.modal_params(cfg, vi_c_budget, sigma=-2.5 * vi_c_budget.kappa)
    state, secs = _timed(lambda: ss.find_steady_state(
        params, kind="dark_soliton", horizon=500.0))
    return ss.rotate_to_symmetric(state), secs
