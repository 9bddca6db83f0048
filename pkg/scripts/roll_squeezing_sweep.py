#!/usr/bin/env python3
"""Squeezing of roll (primary comb) states across a pump-power sweep.

For each pump power the script relaxes a roll state at sigma = -kappa,
optimizes the pair quadrature angle of the fundamental pair, and reports
the realized roll order, the optimum angle offset and the deepest point
of the squeezing spectrum.  Spectra are written as CSV per power.
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

import numpy as np

from kerrcomb import linearization as lin
from kerrcomb import squeezing as sq
from kerrcomb import steady_state as ss
from kerrcomb import units


def caf2(pump_power: float, detuning: float) -> units.ResonatorConfig:
    return units.ResonatorConfig(
        pump_wavelength=1550e-9, main_radius=2.5e-3, group_index=1.43,
        intrinsic_Q=1e9, through_Q=0.25e9, pump_power=pump_power,
        detuning=detuning, gamma=0.001, zeta2=2.0 * np.pi * 2.9e3)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--powers", type=float, nargs="+",
                    default=[1.01, 1.1, 1.5, 2.0, 2.5, 3.0],
                    help="pump powers in units of the threshold power")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("roll_squeezing_out"))
    args = ap.parse_args()

    config = caf2(0.0, 0.0)
    budget = units.derive_loss_budget(config)
    g0 = config.nonlinear_gain()
    p_th = units.threshold_pump_power(budget, g0, config.omega_L,
                                      -budget.kappa)
    print(f"P_th(sigma=-kappa) = {p_th * 1e3:.4f} mW")

    args.out.mkdir(parents=True, exist_ok=True)
    grid = sq.default_omega_grid(512)
    print(f"\n{'P/P_th':>7} {'L':>4} {'dPhi (rad)':>11} {'min S':>8} "
          f"{'max Re eig/kappa':>17} {'t (s)':>6}")
    for mult in args.powers:
        t0 = time.perf_counter()
        params = units.modal_params(config, budget, pump_power=mult * p_th,
                                    sigma=-budget.kappa)
        try:
            state = ss.rotate_to_symmetric(ss.find_steady_state(
                params, kind="roll", seed=args.seed))
        except (ss.DivergenceError, ss.RefinementError) as exc:
            print(f"{mult:>7.2f} solver failed ({type(exc).__name__}); "
                  "try another --seed")
            continue
        jac = lin.build_modal_jacobian(state)
        top = float(lin.stability_spectrum(jac.J_a)[0].real) / params.kappa
        opt = sq.optimize_quadrature_angle(
            state, state.roll_order, omega_grid=grid,
            half_width=np.pi / 2, objective="min")
        min_s = float(np.nanmin(opt.spectrum.series.values))
        print(f"{mult:>7.2f} {state.roll_order:>4} {opt.delta_Phi:>11.4f} "
              f"{min_s:>8.4f} {top:>17.2e} {time.perf_counter() - t0:>6.1f}")
        name = f"quadrature_P{mult:.2f}.csv".replace(".", "_", 1)
        (args.out / name).write_text(sq.spectrum_csv(opt.spectrum))
    print(f"\nCSV output in {args.out}/")


if __name__ == "__main__":
    main()
