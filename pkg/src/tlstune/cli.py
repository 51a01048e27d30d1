"""Command-line frontend.

Subcommands: generate-bath, spectroscopy, optimize, benchmark, campaign,
report, loss-budget. Every run writes a schema-validated run-record JSON
(config + result, with the config hash) plus CSV artifacts; series data goes
to CSV for external plotting. A config file (--config, JSON) supplies
defaults that explicit flags override. Output directory defaults to
$TLSTUNE_OUT_DIR, then the current directory.

Exit codes: 0 success, 1 runtime error (machine-readable JSON on stderr),
2 usage.
"""

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, replace

import numpy as np

from . import __version__, io
from .bathgen import BathSpec, generate_bath
from .benchmark import (aggregate_campaign, ensemble_gain, gain_series,
                        run_benchmark, run_campaign)
from .loss_budget import (CircuitParams, GateGeometry, circuit_f01,
                          charging_energy, derive_capacitances,
                          gate_impedance, global_gate_params,
                          local_gate_params, sweep_gate_area, t1_dielectric,
                          t1_radiative, t1_total)
from .measurement import MeasurementConfig, default_delay_grid, swap_spectroscopy
from .optimizer import SweepPlan, optimize


def _parse_range(text, parts, name):
    pieces = text.split(":")
    if len(pieces) != parts:
        raise ValueError(f"{name} must have {parts} colon-separated values")
    return [float(p) for p in pieces]


def _out_dir(args):
    path = args.out_dir or os.environ.get("TLSTUNE_OUT_DIR") or "."
    os.makedirs(path, exist_ok=True)
    return path


def _measurement_config(args):
    return MeasurementConfig(
        delay_grid=default_delay_grid(args.expected_t1),
        shots_per_delay=args.shots,
        readout_fidelity=args.readout_fidelity,
        measurement_wall_time=args.wall_time)


def _sweep_plan(args):
    return SweepPlan(start=args.start, stop=args.stop, step=args.step,
                     fine_step=args.fine_step, fine_window=args.fine_window,
                     closeness_fraction=args.closeness)


def _bath_spec(args):
    lo, hi = _parse_range(args.band, 2, "--band")
    return BathSpec(band_ghz=(lo, hi), defects_per_ghz=args.density,
                    background_gamma=args.background,
                    fluctuators_per_defect=args.fluctuators_per_defect,
                    n_metastable=args.metastable,
                    include_junction_tls=args.junction_tls)


def _optimization_dict(result):
    return {
        "coarse_curve": [[f, t, s] for f, t, s in result.coarse_curve],
        "fine_curve": [[f, t] for f, t in result.fine_curve],
        "chosen_field": result.chosen_field,
        "coarse_max_t1": result.coarse_max_t1,
        "achieved_t1": result.achieved_t1,
        "passes": result.passes,
        "reached_closeness": result.reached_closeness,
    }


def _add_measurement_flags(p):
    p.add_argument("--shots", type=int, default=1000,
                   help="readout shots per delay point")
    p.add_argument("--readout-fidelity", type=float, default=0.97)
    p.add_argument("--wall-time", type=float, default=2.0,
                   help="simulated seconds consumed by one T1 measurement")
    p.add_argument("--expected-t1", type=float, default=40.0,
                   help="us; sets the delay grid span")


def _add_plan_flags(p):
    p.add_argument("--start", type=float, default=-100e3, help="V/m")
    p.add_argument("--stop", type=float, default=100e3, help="V/m")
    p.add_argument("--step", type=float, default=2e3, help="V/m")
    p.add_argument("--fine-step", type=float, default=None)
    p.add_argument("--fine-window", type=float, default=None)
    p.add_argument("--closeness", type=float, default=0.9)


def _add_bath_flags(p):
    p.add_argument("--band", default="4.2:5.8", help="defect band, GHz lo:hi")
    p.add_argument("--density", type=float, default=120.0,
                   help="defects per GHz")
    p.add_argument("--background", type=float, default=0.02,
                   help="residual relaxation rate, 1/us")
    p.add_argument("--fluctuators-per-defect", type=float, default=0.3)
    p.add_argument("--metastable", type=int, default=0,
                   help="number of metastable fluctuators")
    p.add_argument("--junction-tls", action="store_true",
                   help="include one field-immune defect")


def cmd_generate_bath(args):
    out_dir = _out_dir(args)
    spec = _bath_spec(args)
    env = generate_bath(spec, args.seed)
    path = args.out or os.path.join(out_dir, "bath.json")
    io.save_environment(path, env)
    config = {"bath": asdict(spec), "seed": args.seed}
    result = {"path": os.path.abspath(path), "n_defects": len(env.defects),
              "n_fluctuators": len(env.fluctuators)}
    io.write_run_record(os.path.join(out_dir, "generate-bath.record.json"),
                        "generate-bath", config, result)
    print(f"wrote {path}: {len(env.defects)} defects, "
          f"{len(env.fluctuators)} fluctuators")
    return 0


def cmd_spectroscopy(args):
    out_dir = _out_dir(args)
    env = io.load_environment(args.env)
    f_lo, f_hi, f_n = _parse_range(args.freqs, 3, "--freqs")
    e_lo, e_hi, e_n = _parse_range(args.fields, 3, "--fields")
    freqs = np.linspace(f_lo, f_hi, int(f_n))
    fields = np.linspace(e_lo, e_hi, int(e_n))
    t0 = time.perf_counter()
    raster = swap_spectroscopy(env, freqs, fields, args.hold_time,
                               column_time_s=args.column_time)
    config = {"env": os.path.abspath(args.env), "freqs": args.freqs,
              "fields": args.fields, "hold_time": args.hold_time,
              "column_time": args.column_time}
    cfg_hash = io.config_hash(config)
    csv_path = os.path.join(out_dir, "spectroscopy.csv")
    # Rows are probe frequencies, columns are swept fields.
    header = ["freq_ghz"] + [repr(float(e)) for e in fields]
    rows = [[repr(float(freqs[j]))] + [repr(float(raster[i, j]))
                                       for i in range(fields.size)]
            for j in range(freqs.size)]
    io.write_csv(csv_path, header, rows, cfg_hash)
    result = {"raster_csv": os.path.abspath(csv_path),
              "min_population": float(raster.min()),
              "max_population": float(raster.max()),
              "shape": [int(fields.size), int(freqs.size)]}
    io.write_run_record(os.path.join(out_dir, "spectroscopy.record.json"),
                        "spectroscopy", config, result,
                        elapsed_s=time.perf_counter() - t0)
    print(f"wrote {csv_path} ({fields.size} fields x {freqs.size} freqs)")
    return 0


def cmd_optimize(args):
    out_dir = _out_dir(args)
    env = io.load_environment(args.env)
    if args.seed is not None:
        env.rng = np.random.default_rng(args.seed)
        env.rng_seed = args.seed
    plan = _sweep_plan(args)
    cfg = _measurement_config(args)
    t0 = time.perf_counter()
    result = optimize(env, args.qubit_freq, plan, cfg)
    config = {"env": os.path.abspath(args.env), "qubit_freq": args.qubit_freq,
              "seed": args.seed, "plan": asdict(plan),
              "measurement": {"shots": args.shots,
                              "readout_fidelity": args.readout_fidelity,
                              "wall_time": args.wall_time,
                              "expected_t1": args.expected_t1}}
    cfg_hash = io.config_hash(config)
    io.write_csv(os.path.join(out_dir, "coarse_sweep.csv"),
                 ["field_v_per_m", "t1_us", "smoothed_t1_us"],
                 result.coarse_curve, cfg_hash)
    io.write_csv(os.path.join(out_dir, "fine_sweep.csv"),
                 ["field_v_per_m", "t1_us"], result.fine_curve, cfg_hash)
    io.write_run_record(os.path.join(out_dir, "optimize.record.json"),
                        "optimize", config, _optimization_dict(result),
                        elapsed_s=time.perf_counter() - t0)
    print(f"chosen field {result.chosen_field:.0f} V/m, "
          f"T1 {result.achieved_t1:.1f} us "
          f"(coarse smoothed max {result.coarse_max_t1:.1f} us, "
          f"closeness {'reached' if result.reached_closeness else 'missed'})")
    return 0


def cmd_benchmark(args):
    out_dir = _out_dir(args)
    env = io.load_environment(args.env)
    if args.seed is not None:
        env.rng = np.random.default_rng(args.seed)
        env.rng_seed = args.seed
    plan = _sweep_plan(args)
    cfg = _measurement_config(args)
    t0 = time.perf_counter()
    record = run_benchmark(env, args.qubit_freq, args.window, plan, cfg,
                           interval_s=args.interval)
    gains = gain_series(record)
    config = {"env": os.path.abspath(args.env), "qubit_freq": args.qubit_freq,
              "window": args.window, "interval": args.interval,
              "seed": args.seed, "plan": asdict(plan),
              "measurement": {"shots": args.shots,
                              "readout_fidelity": args.readout_fidelity,
                              "wall_time": args.wall_time,
                              "expected_t1": args.expected_t1}}
    cfg_hash = io.config_hash(config)
    rows = [[t, r, o] for (t, r), (_, o) in zip(record.reference_series,
                                                record.optimized_series)]
    io.write_csv(os.path.join(out_dir, "benchmark_series.csv"),
                 ["t_s", "t1_reference_us", "t1_optimized_us"], rows, cfg_hash)
    io.write_csv(os.path.join(out_dir, "gain_series.csv"),
                 ["t_s", "instantaneous_gain", "average_gain"],
                 [[t, g, a] for (t, g), (_, a) in zip(gains.instantaneous,
                                                      gains.average)],
                 cfg_hash)
    result = {"qubit_freq": record.qubit_freq,
              "chosen_field": record.chosen_field,
              "mean_gain": record.mean_gain,
              "std_reference": record.std_reference,
              "std_optimized": record.std_optimized,
              "optimization_ok": record.optimization_ok,
              "reached_closeness": record.reached_closeness,
              "gain_fit_A": gains.fit_A, "gain_fit_B_minutes": gains.fit_B}
    io.write_run_record(os.path.join(out_dir, "benchmark.record.json"),
                        "benchmark", config, result,
                        elapsed_s=time.perf_counter() - t0)
    print(f"mean gain {record.mean_gain:+.1%} at "
          f"{record.chosen_field:.0f} V/m")
    return 0


def cmd_campaign(args):
    out_dir = _out_dir(args)
    spec = _bath_spec(args)
    plan = _sweep_plan(args)
    cfg = _measurement_config(args)
    lo, hi = _parse_range(args.freq_band, 2, "--freq-band")
    freqs = np.linspace(lo, hi, args.n_freqs)
    t0 = time.perf_counter()
    records, stats = run_campaign(spec, freqs, args.window, plan, cfg,
                                  seed=args.seed, interval_s=args.interval,
                                  max_workers=args.threads)
    ens = ensemble_gain(records)
    config = {"bath": asdict(spec), "freq_band": args.freq_band,
              "n_freqs": args.n_freqs, "window": args.window,
              "interval": args.interval, "seed": args.seed,
              "plan": asdict(plan),
              "measurement": {"shots": args.shots,
                              "readout_fidelity": args.readout_fidelity,
                              "wall_time": args.wall_time,
                              "expected_t1": args.expected_t1}}
    cfg_hash = io.config_hash(config)
    rec_dir = os.path.join(out_dir, "records")
    os.makedirs(rec_dir, exist_ok=True)
    rec_files = []
    for i, record in enumerate(records):
        rel = os.path.join("records", f"freq_{i:03d}.csv")
        rows = [[t, r, o] for (t, r), (_, o) in zip(record.reference_series,
                                                    record.optimized_series)]
        io.write_csv(os.path.join(out_dir, rel),
                     ["t_s", "t1_reference_us", "t1_optimized_us"], rows,
                     cfg_hash)
        rec_files.append(rel)
    io.write_csv(os.path.join(out_dir, "ensemble_gain.csv"),
                 ["t_s", "instantaneous_gain", "average_gain"],
                 [[t, g, a] for (t, g), (_, a) in zip(ens.instantaneous,
                                                      ens.average)],
                 cfg_hash)
    result = {
        "stats": {
            "mean_gain": stats.mean_gain,
            "fraction_improved": stats.fraction_improved,
            "fraction_gain_gt_10": stats.fraction_gain_gt_10,
            "fraction_gain_gt_20": stats.fraction_gain_gt_20,
            "best_gain": stats.best_gain,
            "mean_std_change": stats.mean_std_change,
            "n_records": stats.n_records,
        },
        "per_frequency": [list(row) for row in stats.per_frequency],
        "ensemble_fit": {"A": ens.fit_A, "B_minutes": ens.fit_B},
        "records": [{
            "qubit_freq": r.qubit_freq, "chosen_field": r.chosen_field,
            "mean_gain": r.mean_gain, "std_reference": r.std_reference,
            "std_optimized": r.std_optimized,
            "optimization_ok": r.optimization_ok,
            "reached_closeness": r.reached_closeness, "csv": rel}
            for r, rel in zip(records, rec_files)],
    }
    io.write_run_record(os.path.join(out_dir, "campaign_summary.json"),
                        "campaign", config, result,
                        elapsed_s=time.perf_counter() - t0)
    print(f"{stats.n_records} frequencies: mean gain {stats.mean_gain:+.1%}, "
          f"improved {stats.fraction_improved:.0%}, "
          f"best {stats.best_gain:+.1%}")
    return 0


def cmd_report(args):
    out_dir = _out_dir(args)
    summary = io.load_json(args.summary)
    io.validate_document(summary, "run_record")
    if summary.get("command") != "campaign":
        raise ValueError("report expects a campaign summary record")
    stats = summary["result"]["stats"]
    table = summary["result"]["per_frequency"]
    print(f"campaign {summary['config_hash']} "
          f"(tool {summary['tool_version']}, {stats['n_records']} frequencies)")
    print(f"  mean gain        {stats['mean_gain']:+.1%}")
    print(f"  improved         {stats['fraction_improved']:.0%}")
    print(f"  gain > 10%       {stats['fraction_gain_gt_10']:.0%}")
    print(f"  gain > 20%       {stats['fraction_gain_gt_20']:.0%}")
    print(f"  best gain        {stats['best_gain']:+.1%}")
    if stats["mean_std_change"] is not None:
        print(f"  mean std change  {stats['mean_std_change']:+.1%}")
    fit = summary["result"]["ensemble_fit"]
    if fit["A"] is not None:
        print(f"  ensemble gain fit: A={fit['A']:.3f}, "
              f"B={fit['B_minutes']:.0f} min")
    print(f"  {'freq_GHz':>9} {'gain':>8} {'std_ref':>8} {'std_opt':>8} "
          f"{'field_V/m':>10}")
    for freq, gain, std_ref, std_opt, field in table:
        gain_s = f"{gain:+.1%}" if gain is not None else "failed"
        print(f"  {freq:9.4f} {gain_s:>8} {std_ref:8.2f} {std_opt:8.2f} "
              f"{field:10.0f}")
    io.write_csv(os.path.join(out_dir, "per_frequency.csv"),
                 ["qubit_freq_ghz", "mean_gain", "std_reference_us",
                  "std_optimized_us", "chosen_field_v_per_m"],
                 [[f, g if g is not None else math.nan, sr, so, fld]
                  for f, g, sr, so, fld in table],
                 summary["config_hash"])
    return 0


def _loss_budget_inputs(args):
    if args.params:
        doc = io.load_json(args.params)
        params = CircuitParams(**doc["circuit"])
        geometry = GateGeometry(**doc["geometry"]) if "geometry" in doc else None
    elif args.preset == "local":
        params, geometry = local_gate_params()
    else:
        params, geometry = global_gate_params()
    if args.mode:
        params = replace(params, mode=args.mode)
    return params, geometry


def cmd_loss_budget(args):
    out_dir = _out_dir(args)
    params, geometry = _loss_budget_inputs(args)
    f01 = circuit_f01(params)
    config = {"preset": args.preset, "params": args.params, "mode": params.mode,
              "sweep_area": args.sweep_area,
              "circuit": asdict(params),
              "geometry": asdict(geometry) if geometry else None}
    cfg_hash = io.config_hash(config)
    result = {
        "mode": params.mode,
        "f01_ghz": f01,
        "e_c_ghz": charging_energy(params.c_tot),
        "c_tot_ff": params.c_tot,
        "c_c_ff": params.c_c,
        "c_f_ff": params.c_f,
        "impedance_ohm": gate_impedance(params, f01),
        "t1_radiative_ms": t1_radiative(params, f01),
        "t1_dielectric_ms": t1_dielectric(params, f01),
        "t1_total_ms": t1_total(params, f01),
    }
    if args.sweep_area:
        if geometry is None:
            raise ValueError("--sweep-area needs gate geometry")
        a_min, a_max, n = _parse_range(args.sweep_area, 3, "--sweep-area")
        areas = np.geomspace(a_min, a_max, int(n))
        rows = sweep_gate_area(params, geometry, areas)
        csv_path = os.path.join(out_dir, "area_sweep.csv")
        io.write_csv(csv_path, ["area_m2", "t1_radiative_ms",
                                "t1_dielectric_ms", "t1_total_ms"],
                     rows, cfg_hash)
        totals = [r[3] for r in rows]
        result["area_sweep"] = {
            "csv": os.path.abspath(csv_path),
            "min_total_ms": float(min(totals)),
            "argmin_area_m2": float(rows[int(np.argmin(totals))][0]),
        }
    io.write_run_record(os.path.join(out_dir, "loss_budget.record.json"),
                        "loss-budget", config, result)
    rad, diel, tot = (result["t1_radiative_ms"], result["t1_dielectric_ms"],
                      result["t1_total_ms"])
    print(f"mode {params.mode}: f01 {f01:.3f} GHz, "
          f"T1 radiative {rad:.3g} ms, dielectric {diel:.3g} ms, "
          f"total {tot:.3g} ms")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tlstune",
        description="Simulator of DC-field tuning of two-level defects "
                    "around a transmon, with T1 optimization, benchmarking, "
                    "and gate loss budgets.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_default=0):
        p.add_argument("--config", help="JSON file with flag defaults")
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out-dir", default=None,
                       help="default $TLSTUNE_OUT_DIR or .")

    p = sub.add_parser("generate-bath", help="write a random environment JSON")
    common(p)
    _add_bath_flags(p)
    p.add_argument("--out", help="environment file path")
    p.set_defaults(func=cmd_generate_bath)

    p = sub.add_parser("spectroscopy", help="field/frequency raster of "
                                            "residual excited population")
    common(p)
    p.add_argument("--env", required=True)
    p.add_argument("--freqs", default="4.5:5.5:201", help="GHz lo:hi:n")
    p.add_argument("--fields", default="-100e3:100e3:201", help="V/m lo:hi:n")
    p.add_argument("--hold-time", type=float, default=10.0, help="us")
    p.add_argument("--column-time", type=float, default=1.0, help="s")
    p.set_defaults(func=cmd_spectroscopy)

    p = sub.add_parser("optimize", help="two-pass field optimization")
    common(p, seed_default=None)
    p.add_argument("--env", required=True)
    p.add_argument("--qubit-freq", type=float, required=True, help="GHz")
    _add_plan_flags(p)
    _add_measurement_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("benchmark", help="paired reference/optimized T1 "
                                         "monitoring at one frequency")
    common(p, seed_default=None)
    p.add_argument("--env", required=True)
    p.add_argument("--qubit-freq", type=float, required=True, help="GHz")
    p.add_argument("--window", type=float, default=1800.0, help="s")
    p.add_argument("--interval", type=float, default=None,
                   help="s between measurement starts")
    _add_plan_flags(p)
    _add_measurement_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("campaign", help="benchmark across many frequencies")
    common(p)
    _add_bath_flags(p)
    p.add_argument("--freq-band", default="4.5:5.5", help="GHz lo:hi")
    p.add_argument("--n-freqs", type=int, default=59)
    p.add_argument("--window", type=float, default=1800.0, help="s")
    p.add_argument("--interval", type=float, default=20.0,
                   help="s between measurement starts")
    _add_plan_flags(p)
    _add_measurement_flags(p)
    # Campaign-calibrated protocol: a finer sweep with a tight second pass
    # and low shot noise keeps the chosen field on the true optimum plateau.
    p.set_defaults(func=cmd_campaign, closeness=1.0, fine_window=800.0,
                   fine_step=400.0, shots=8000)

    p = sub.add_parser("report", help="text tables + plotting CSVs from a "
                                      "campaign summary")
    common(p)
    p.add_argument("--summary", required=True,
                   help="campaign_summary.json path")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("loss-budget", help="analytic gate T1 limits")
    common(p)
    p.add_argument("--preset", choices=["global", "local"], default="global")
    p.add_argument("--params", help="JSON with circuit/geometry blocks")
    p.add_argument("--mode", choices=["rf_50ohm", "dc_wire", "floating"])
    p.add_argument("--sweep-area", help="m^2 min:max:n, log-spaced")
    p.set_defaults(func=cmd_loss_budget)

    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        try:
            file_cfg = io.load_json(known.config)
        except OSError as exc:
            json.dump({"error": "IOError", "message": str(exc)}, sys.stderr)
            sys.stderr.write("\n")
            return 1
        # Config keys map to flag destinations; explicit flags still win
        # because set_defaults only changes the fallback.
        valid = set()
        for action in parser._subparsers._group_actions[0].choices.values():
            valid.update(a.dest for a in action._actions)
        unknown = set(file_cfg) - valid
        if unknown:
            json.dump({"error": "ConfigError",
                       "message": f"unknown config keys: {sorted(unknown)}"},
                      sys.stderr)
            sys.stderr.write("\n")
            return 1
        for action in parser._subparsers._group_actions[0].choices.values():
            action.set_defaults(**{k: v for k, v in file_cfg.items()
                                   if k in {a.dest for a in action._actions}})
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - boundary: report and exit 1
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
