"""Scenario runner: parse a JSON scenario, compute, write CSVs + report.

Scenario schema (version 1), JSON with the following top-level keys:

    schema      int, must be 1
    name        str
    mode        "below_threshold" | "above_threshold" | "hamiltonian_audit"
    resonator   section mapping to ResonatorConfig; detuning may be given
                as "detuning" (rad/s) or "detuning_over_kappa"; pump power
                as "pump_power" (W) or "pump_power_over_threshold"
    state       (above threshold) {"kind": "roll" | "bright_soliton" |
                "dark_soliton", "K": int?, "horizon": float?, "step": float?}
    outputs     list of products: spectrum, envelope, flux_table,
                quadrature_spectrum, number_difference, stability, audit
    modes       sidemode indices l for per-mode spectra (default [1])
    pairs       pair indices for quadrature spectra (default [1])
    l_max       envelope/flux-table half-range (default 100)
    audit_K     Hamiltonian-audit truncation (default 3)
    seed        integer (default 0)
    sweep       optional {"path": "<resonator key>", "values": [...]}

Every product writes one CSV plus a metadata record in report.json; all
output frequencies are in units of kappa, powers in watts.  Runs are
deterministic for a given scenario + seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import hamiltonian_audit, linearization, spontaneous, squeezing
from . import steady_state as ss
from . import units

SCHEMA_VERSION = 1

MODES = ("below_threshold", "above_threshold", "hamiltonian_audit")
PRODUCTS_BY_MODE = {
    "below_threshold": {"spectrum", "envelope", "flux_table"},
    "above_threshold": {"quadrature_spectrum", "number_difference",
                        "stability"},
    "hamiltonian_audit": {"audit"},
}


class ScenarioError(ValueError):
    """Scenario file is unreadable, malformed, or self-inconsistent."""


def load_scenario(path: str | Path) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc
    validate_scenario(raw)
    return raw


def validate_scenario(raw: dict) -> None:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    if raw.get("schema") != SCHEMA_VERSION:
        raise ScenarioError(f"field 'schema': expected {SCHEMA_VERSION}, "
                            f"got {raw.get('schema')!r}")
    mode = raw.get("mode")
    if mode not in MODES:
        raise ScenarioError(f"field 'mode': expected one of {MODES}, got {mode!r}")
    outputs = raw.get("outputs", [])
    if not isinstance(outputs, list):
        raise ScenarioError("field 'outputs': expected a list")
    allowed = PRODUCTS_BY_MODE[mode]
    for product in outputs:
        if product not in allowed:
            raise ScenarioError(
                f"field 'outputs': product {product!r} is not valid in mode "
                f"{mode!r} (allowed: {sorted(allowed)})")
    if mode != "hamiltonian_audit" and "resonator" not in raw:
        raise ScenarioError("field 'resonator': required for this mode")
    sweep = raw.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or "path" not in sweep or "values" not in sweep:
            raise ScenarioError("field 'sweep': expected {path, values}")


def build_config(res: dict) -> tuple[units.ResonatorConfig, units.LossBudget]:
    """Resolve the resonator section, including kappa-relative fields."""
    res = dict(res)
    topology = units.Topology(res.pop("topology", "add-through"))
    sigma_rel = res.pop("detuning_over_kappa", None)
    p_rel = res.pop("pump_power_over_threshold", None)
    base = dict(
        pump_wavelength=res.pop("pump_wavelength"),
        main_radius=res.pop("main_radius"),
        group_index=res.pop("group_index"),
        intrinsic_Q=res.pop("intrinsic_Q"),
        through_Q=res.pop("through_Q"),
        topology=topology,
        drop_Q=res.pop("drop_Q", None),
        gamma=res.pop("gamma", None),
        g0=res.pop("g0", None),
        zeta2=res.pop("zeta2", None),
        beta2=res.pop("beta2", None),
        pump_power=res.pop("pump_power", 0.0),
        detuning=res.pop("detuning", 0.0),
    )
    if res:
        raise ScenarioError(f"field 'resonator': unknown keys {sorted(res)}")
    try:
        config = units.ResonatorConfig(**base)
    except units.ConfigurationError as exc:
        raise ScenarioError(f"field 'resonator': {exc}") from exc
    budget = units.derive_loss_budget(config)
    if sigma_rel is not None:
        base["detuning"] = sigma_rel * budget.kappa
    if p_rel is not None:
        base["pump_power"] = p_rel * units.threshold_pump_power(
            budget, config.nonlinear_gain(), config.omega_L, base["detuning"])
    config = units.ResonatorConfig(**base)
    return config, units.derive_loss_budget(config)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(outdir: Path, name: str, text: str, products: list,
           t0: float, **extra) -> None:
    path = outdir / name
    path.write_text(text)
    products.append({"file": name, "sha256": _sha256(path),
                     "seconds": round(time.perf_counter() - t0, 6), **extra})


def derived_quantities(config: units.ResonatorConfig,
                       budget: units.LossBudget) -> dict:
    g0 = config.nonlinear_gain()
    zeta2 = config.dispersion_zeta2()
    p_min, n_min = units.min_pump_power(budget, g0, config.omega_L)
    p_th = units.threshold_pump_power(budget, g0, config.omega_L,
                                      config.detuning)
    try:
        L = units.predicted_roll_order(config.detuning, budget.kappa, zeta2)
    except units.NoRollOrderError:
        L = None
    return {
        "kappa_rad_s": budget.kappa,
        "kappa_t_rad_s": budget.kappa_t,
        "rho": budget.rho,
        "g0_rad_s": g0,
        "zeta2_rad_s": zeta2,
        "P_min_watts": p_min,
        "P_th_watts": p_th,
        "predicted_roll_order": L,
        "units": {"frequencies": "kappa (dimensionless in CSVs)",
                  "powers": "watts", "rates": "rad/s"},
    }


def _solve_state(scenario: dict, config: units.ResonatorConfig,
                 budget: units.LossBudget, seed: int) -> ss.CombState:
    spec = scenario.get("state", {})
    params = units.modal_params(config, budget)
    state = ss.find_steady_state(
        params, kind=spec.get("kind", "roll"), K=spec.get("K"),
        seed=seed, horizon=spec.get("horizon", 3000.0),
        step=spec.get("step", 1e-2),
        target_order=spec.get("target_order"))
    return state


def run_products(scenario: dict, outdir: Path, seed: int) -> dict:
    """Compute every requested product; returns the report dict."""
    mode = scenario["mode"]
    outputs = scenario.get("outputs", [])
    report: dict = {
        "scenario": scenario, "seed": seed,
        "schema": SCHEMA_VERSION, "products": [], "errors": [],
    }
    products = report["products"]

    config = budget = None
    if mode != "hamiltonian_audit":
        config, budget = build_config(scenario["resonator"])
        report["derived"] = derived_quantities(config, budget)

    state = None
    if mode == "below_threshold" and outputs:
        flat = ss.solve_flat_state(units.modal_params(config, budget))
    for product in outputs:
        t0 = time.perf_counter()
        if product == "spectrum":
            for l in scenario.get("modes", [1]):
                series = spontaneous.spontaneous_spectrum(l, flat)
                shape = spontaneous.classify_lineshape(l, flat)
                _write(outdir, f"spectrum_l{l}.csv",
                       spontaneous.spectrum_csv(series), products, t0,
                       product=product, l=l, lineshape=shape.kind.value,
                       peak_frequencies_over_kappa=[
                           w / flat.params.kappa for w in shape.peak_frequencies])
        elif product == "envelope":
            l_max = scenario.get("l_max", 100)
            ls = np.arange(-l_max, l_max + 1)
            _, peaks = spontaneous.spectrum_envelope(ls, flat)
            _write(outdir, "envelope.csv",
                   spontaneous.envelope_csv(ls, flat), products, t0,
                   product=product, peak_modes=list(peaks))
        elif product == "flux_table":
            l_max = scenario.get("l_max", 100)
            ls = np.arange(-l_max, l_max + 1)
            _write(outdir, "flux_table.csv",
                   spontaneous.flux_table_csv(ls, flat), products, t0,
                   product=product)
        elif product == "number_difference":
            grid = squeezing.default_omega_grid()
            series = squeezing.photon_number_difference_spectrum(
                budget.rho, budget.kappa, grid)
            _write(outdir, "number_difference.csv",
                   spontaneous.spectrum_csv(series), products, t0,
                   product=product)
        elif product in ("quadrature_spectrum", "stability"):
            if state is None:
                state = _solve_state(scenario, config, budget, seed)
                state = ss.rotate_to_symmetric(state)
                report["state"] = {
                    "pattern": state.pattern.value,
                    "roll_order": state.roll_order,
                    "residual_norm": state.residual_norm,
                    "K": state.K,
                    "photon_number": state.photon_number,
                }
            if product == "stability":
                jac = linearization.build_modal_jacobian(state)
                eig = linearization.stability_spectrum(jac.J_a)
                lines = ["re_over_kappa,im_over_kappa"]
                kappa = state.params.kappa
                lines += [f"{e.real / kappa:.12e},{e.imag / kappa:.12e}"
                          for e in eig]
                _write(outdir, "stability.csv", "\n".join(lines) + "\n",
                       products, t0, product=product,
                       stable=linearization.is_stable(jac.J_a, kappa))
            else:
                angle = scenario.get("angle", {})
                for l in scenario.get("pairs", [1]):
                    opt = squeezing.optimize_quadrature_angle(
                        state, l,
                        half_width=angle.get("half_width", np.pi / 4),
                        objective=angle.get("objective", "band_integral"))
                    _write(outdir, f"quadrature_l{l}.csv",
                           squeezing.spectrum_csv(opt.spectrum), products,
                           t0, product=product,
                           **squeezing.optimum_report(opt))
        elif product == "audit":
            K = scenario.get("audit_K", 3)
            mset = hamiltonian_audit.enumerate_monomials(K)
            counts = {t.value: c for t, c in mset.counts_by_tag().items()}
            _write(outdir, "audit_monomials.txt", mset.dump(), products, t0,
                   product=product, K=K,
                   ordered_count=mset.ordered_count,
                   expected=hamiltonian_audit.expected_total(K),
                   counts_by_tag=counts)
    return report


def run_scenario(scenario: dict, outdir: Path, seed: int | None = None) -> int:
    """Run one scenario (including sweeps); returns process exit status."""
    outdir.mkdir(parents=True, exist_ok=True)
    seed = scenario.get("seed", 0) if seed is None else seed
    sweep = scenario.get("sweep")
    status = 0
    if sweep:
        report = {"scenario": scenario, "seed": seed, "sub_runs": []}
        for i, value in enumerate(sweep["values"]):
            sub = {k: v for k, v in scenario.items() if k != "sweep"}
            sub["resonator"] = dict(sub["resonator"])
            sub["resonator"][sweep["path"]] = value
            subdir = outdir / f"sweep_{i:02d}"
            subdir.mkdir(exist_ok=True)
            code = run_scenario(sub, subdir, seed)
            status = status or code
            sub_report = json.loads((subdir / "report.json").read_text())
            report["sub_runs"].append({
                "dir": subdir.name, "value": value,
                "state": sub_report.get("state"),
                "errors": sub_report.get("errors", []),
            })
        (outdir / "report.json").write_text(json.dumps(report, indent=2))
        return status
    try:
        report = run_products(scenario, outdir, seed)
    except (ScenarioError, ValueError, ArithmeticError, RuntimeError,
            np.linalg.LinAlgError) as exc:
        report = {"scenario": scenario, "seed": seed, "products": [],
                  "errors": [{"type": type(exc).__name__, "message": str(exc)}]}
        status = 1
    (outdir / "report.json").write_text(json.dumps(report, indent=2))
    return status


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kerrcomb",
        description="Kerr comb quantum-dynamics scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=1,
                       help="advisory worker count (recorded, compute is "
                            "deterministic either way)")

    p_val = sub.add_parser("validate", help="parse and check a scenario file")
    p_val.add_argument("scenario")

    p_rep = sub.add_parser("report", help="pretty-print a run report")
    p_rep.add_argument("run_dir")

    args = parser.parse_args(argv)
    if args.command == "validate":
        try:
            load_scenario(args.scenario)
        except ScenarioError as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return 1
        print("ok")
        return 0
    if args.command == "report":
        path = Path(args.run_dir) / "report.json"
        if not path.exists():
            print(f"no report.json under {args.run_dir}", file=sys.stderr)
            return 1
        report = json.loads(path.read_text())
        print(json.dumps(report, indent=2))
        return 0
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 1
    outdir = Path(args.out) if args.out else Path(
        scenario.get("name", "run") + "_out")
    return run_scenario(scenario, outdir, args.seed)


if __name__ == "__main__":
    raise SystemExit(main())
