#!/usr/bin/env python3
"""Spontaneous-emission survey of a weakly pumped CaF2 resonator.

Prints the lineshape classification and integrated flux per sidemode,
compares the closed-form total spontaneous power against the discrete
mode sum, and writes per-mode spectra plus the envelope as CSV.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from kerrcomb import spontaneous as sp
from kerrcomb import steady_state as ss
from kerrcomb import units


def caf2(pump_power: float, detuning: float) -> units.ResonatorConfig:
    return units.ResonatorConfig(
        pump_wavelength=1550e-9, main_radius=2.5e-3, group_index=1.43,
        intrinsic_Q=1e9, through_Q=0.25e9, pump_power=pump_power,
        detuning=detuning, gamma=0.001, zeta2=2.0 * np.pi * 2.9e3)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--power", type=float, default=1e-6,
                    help="pump power in watts (default 1 uW)")
    ap.add_argument("--detuning-over-kappa", type=float, default=0.5)
    ap.add_argument("--l-max", type=int, default=60)
    ap.add_argument("--out", type=Path, default=Path("below_threshold_out"))
    args = ap.parse_args()

    config = caf2(args.power, 0.0)
    budget = units.derive_loss_budget(config)
    sigma = args.detuning_over_kappa * budget.kappa
    config = caf2(args.power, sigma)
    params = units.modal_params(config, budget)
    flat = ss.solve_flat_state(params)

    args.out.mkdir(parents=True, exist_ok=True)
    print(f"kappa/2pi = {budget.kappa / (2 * np.pi):.4g} Hz, "
          f"rho = {budget.rho}, g/kappa = "
          f"{sp.kerr_shift(flat) / budget.kappa:.3e}")

    print(f"\n{'l':>4} {'lineshape':>14} {'w_m/kappa':>10} "
          f"{'flux (1/s)':>12} {'power (W)':>12}")
    for l in range(0, args.l_max + 1, 5):
        shape = sp.classify_lineshape(l, flat)
        w_m = shape.peak_frequencies[-1] / budget.kappa
        flux, watts, _ = sp.sidemode_flux(l, flat)
        print(f"{l:>4} {shape.kind.value:>14} {w_m:>10.4f} "
              f"{flux:>12.4e} {watts:>12.4e}")

    closed, discrete = sp.total_spontaneous_power(args.power, config, budget)
    print(f"\ntotal spontaneous power: closed form {closed:.6e} W, "
          f"discrete sum {discrete:.6e} W "
          f"(ratio {closed / discrete:.4f})")

    ls = np.arange(-args.l_max, args.l_max + 1)
    (args.out / "envelope.csv").write_text(sp.envelope_csv(ls, flat))
    for l in (1, args.l_max // 2, args.l_max):
        series = sp.spontaneous_spectrum(l, flat)
        (args.out / f"spectrum_l{l}.csv").write_text(sp.spectrum_csv(series))
    print(f"\nCSV output in {args.out}/")


if __name__ == "__main__":
    main()
