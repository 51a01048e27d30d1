"""Paired benchmarking of the field optimizer against a zero-field reference.

Protocol per qubit frequency: monitor T1 repeatedly at zero field for a
window, run the two-pass optimization, then monitor for the same window at
the chosen field, all on the same evolving environment. Instantaneous gain
pairs the two series by index; campaign statistics aggregate many
frequencies.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import fit_exp_decay
from .bathgen import generate_bath
from .measurement import MeasurementConfig, measure_t1
from .optimizer import OptimizationError, SweepPlan, optimize

#: Monitoring cadence (s) that keeps a 30-minute window at 90 samples.
DEFAULT_INTERVAL_S = 20.0


def default_campaign_plan():
    """Sweep plan calibrated for campaign benchmarking.

    A 2 kV/m coarse step resolves the typical plateau structure of dense
    baths (wider steps let the smoothing discard narrow true optima), and a
    tight fine pass keeps the second sweep on the candidate plateau.
    """
    return SweepPlan(start=-100e3, stop=100e3, step=2e3,
                     closeness_fraction=1.0, fine_window=800.0,
                     fine_step=400.0)


def default_campaign_config():
    """Measurement settings calibrated for campaign benchmarking."""
    return MeasurementConfig.for_expected_t1(40.0, shots_per_delay=8000)


@dataclass
class BenchmarkRecord:
    """One paired reference/optimized monitoring run."""

    qubit_freq: float  # GHz
    reference_series: list  # (t s since phase start, t1 us; nan = failed fit)
    optimized_series: list
    chosen_field: float  # V/m
    mean_gain: float
    std_reference: float  # us
    std_optimized: float  # us
    optimization_ok: bool = True
    reached_closeness: bool = False


@dataclass
class GainSeries:
    """Instantaneous and running-average gain, with an exponential fit."""

    instantaneous: list  # (t s, gain)
    average: list  # (t s, mean of instantaneous up to t)
    fit_A: float  # dimensionless; nan when the fit failed
    fit_B: float  # minutes
    n_dropped: int = 0  # pairs lost to failed fits or non-positive reference


@dataclass
class CampaignStats:
    mean_gain: float
    fraction_improved: float
    fraction_gain_gt_10: float
    fraction_gain_gt_20: float
    best_gain: float
    mean_std_change: float  # mean of (std_opt/std_ref - 1)
    n_records: int
    per_frequency: list  # (freq GHz, mean_gain, std_ref, std_opt, chosen_field)


def monitor(env, qubit_freq, window_s, cfg, interval_s=None):
    """T1 series over a monitoring window.

    One measurement starts every interval_s (default: back to back at the
    measurement wall time); the clock idles between them so the schedule is
    honored. Failed fits enter as nan so the series stays index-aligned.
    """
    if interval_s is None:
        interval_s = cfg.measurement_wall_time
    if interval_s < cfg.measurement_wall_time:
        raise ValueError("interval shorter than one measurement")
    n = int(window_s / interval_s)
    series = []
    for k in range(n):
        meas = measure_t1(env, qubit_freq, cfg)
        series.append((k * interval_s, meas.t1_fit if meas.fit_ok else math.nan))
        env.advance_fluctuators(interval_s - cfg.measurement_wall_time)
    return series


def run_benchmark(env, qubit_freq, window_s, plan, cfg, interval_s=None):
    """Reference monitoring, optimization, optimized monitoring, in order."""
    if window_s <= 0:
        raise ValueError("window must be > 0")
    env.set_field(0.0)
    reference = monitor(env, qubit_freq, window_s, cfg, interval_s)
    ok = True
    reached = False
    try:
        result = optimize(env, qubit_freq, plan, cfg)
        chosen = result.chosen_field
        reached = result.reached_closeness
    except OptimizationError:
        ok = False
        chosen = env.field  # stay wherever the sweep left us
    optimized = monitor(env, qubit_freq, window_s, cfg, interval_s)

    ref = np.array([t1 for _, t1 in reference])
    opt = np.array([t1 for _, t1 in optimized])
    ref_mean = float(np.nanmean(ref)) if np.any(np.isfinite(ref)) else math.nan
    opt_mean = float(np.nanmean(opt)) if np.any(np.isfinite(opt)) else math.nan
    gain = (opt_mean - ref_mean) / ref_mean if ref_mean and math.isfinite(ref_mean) \
        else math.nan
    return BenchmarkRecord(
        qubit_freq=qubit_freq, reference_series=reference,
        optimized_series=optimized, chosen_field=chosen, mean_gain=gain,
        std_reference=float(np.nanstd(ref)), std_optimized=float(np.nanstd(opt)),
        optimization_ok=ok, reached_closeness=reached)


def _paired_gains(reference_series, optimized_series):
    times, gains = [], []
    dropped = 0
    for (t, ref), (_, opt) in zip(reference_series, optimized_series):
        if not (math.isfinite(ref) and math.isfinite(opt)) or ref <= 0:
            dropped += 1
            continue
        times.append(t)
        gains.append((opt - ref) / ref)
    return times, gains, dropped


def fit_gain_decay(times_s, gains):
    """Fit gain(t) = A*exp(-t/B); returns (A, B in minutes).

    Negative-trending series are fitted with the sign folded out so the
    amplitude keeps its sign. (nan, nan) when the fit fails.
    """
    t_min = np.asarray(times_s, dtype=np.float64) / 60.0
    y = np.asarray(gains, dtype=np.float64)
    if y.size < 3:
        return math.nan, math.nan
    sign = 1.0 if float(np.mean(y)) >= 0.0 else -1.0
    a, tau, _, _, converged = fit_exp_decay(t_min, sign * y, fit_offset=False)
    if not converged or not math.isfinite(tau):
        return math.nan, math.nan
    return sign * a, tau


def gain_series(record):
    """Instantaneous and running-average gain for one record."""
    times, gains, dropped = _paired_gains(record.reference_series,
                                          record.optimized_series)
    avg = np.cumsum(gains) / np.arange(1, len(gains) + 1) if gains else []
    fit_a, fit_b = fit_gain_decay(times, gains)
    return GainSeries(instantaneous=list(zip(times, gains)),
                      average=list(zip(times, [float(v) for v in avg])),
                      fit_A=fit_a, fit_B=fit_b, n_dropped=dropped)


def ensemble_gain(records):
    """Index-wise ensemble average of instantaneous gain across records."""
    by_index = {}
    dropped = 0
    for record in records:
        for (t, ref), (_, opt) in zip(record.reference_series,
                                      record.optimized_series):
            if not (math.isfinite(ref) and math.isfinite(opt)) or ref <= 0:
                dropped += 1
                continue
            by_index.setdefault(t, []).append((opt - ref) / ref)
    times = sorted(by_index)
    gains = [float(np.mean(by_index[t])) for t in times]
    avg = np.cumsum(gains) / np.arange(1, len(gains) + 1) if gains else []
    fit_a, fit_b = fit_gain_decay(times, gains)
    return GainSeries(instantaneous=list(zip(times, gains)),
                      average=list(zip(times, [float(v) for v in avg])),
                      fit_A=fit_a, fit_B=fit_b, n_dropped=dropped)


def aggregate_campaign(records):
    """Campaign-level gain statistics over per-frequency records."""
    if not records:
        raise ValueError("need at least one record")
    gains = np.array([r.mean_gain for r in records])
    finite = gains[np.isfinite(gains)]
    if finite.size == 0:
        raise ValueError("no record produced a finite gain")
    std_changes = [r.std_optimized / r.std_reference - 1.0
                   for r in records
                   if r.std_reference > 0 and math.isfinite(r.std_optimized)]
    table = sorted((r.qubit_freq, r.mean_gain, r.std_reference,
                    r.std_optimized, r.chosen_field) for r in records)
    return CampaignStats(
        mean_gain=float(np.mean(finite)),
        fraction_improved=float(np.mean(finite > 0.0)),
        fraction_gain_gt_10=float(np.mean(finite > 0.10)),
        fraction_gain_gt_20=float(np.mean(finite > 0.20)),
        best_gain=float(np.max(finite)),
        mean_std_change=float(np.mean(std_changes)) if std_changes else math.nan,
        n_records=len(records),
        per_frequency=table)


def _campaign_worker(args):
    (bath_spec, bath_seed, worker_seed, qubit_freq, window_s, plan, cfg,
     interval_s) = args
    env = generate_bath(bath_spec, bath_seed, env_seed=worker_seed)
    return run_benchmark(env, qubit_freq, window_s, plan, cfg, interval_s)


def run_campaign(bath_spec, qubit_freqs, window_s, plan=None, cfg=None,
                 seed=0, interval_s=DEFAULT_INTERVAL_S, max_workers=1):
    """Benchmark every frequency against replicas of one bath realization.

    plan and cfg default to the calibrated campaign protocol. Seeds derive
    hierarchically (campaign seed -> bath seed + one seed per frequency)
    through numpy's splittable SeedSequence, so results do not depend on
    worker scheduling. Returns (records, stats).
    """
    if plan is None:
        plan = default_campaign_plan()
    if cfg is None:
        cfg = default_campaign_config()
    freqs = list(qubit_freqs)
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(freqs) + 1)
    bath_seed = int(children[0].generate_state(1, np.uint64)[0])
    tasks = [(bath_spec, bath_seed,
              int(children[1 + i].generate_state(1, np.uint64)[0]),
              float(f), window_s, plan, cfg, interval_s)
             for i, f in enumerate(freqs)]
    if max_workers and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            records = list(pool.map(_campaign_worker, tasks))
    else:
        records = [_campaign_worker(t) for t in tasks]
    return records, aggregate_campaign(records)


def mann_kendall(values):
    """Mann-Kendall trend statistics for a series.

    Returns (s, z, p_increasing, p_decreasing): s the signed pair count, z
    its normal score with tie correction, and one-sided p-values against the
    increasing/decreasing alternatives.
    """
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 points")
    s = 0
    for i in range(n - 1):
        s += int(np.sum(np.sign(x[i + 1:] - x[i])))
    _, counts = np.unique(x, return_counts=True)
    var = (n * (n - 1) * (2 * n + 5)
           - np.sum(counts * (counts - 1) * (2 * counts + 5))) / 18.0
    if var <= 0:
        return s, 0.0, 0.5, 0.5
    if s > 0:
        z = (s - 1) / math.sqrt(var)
    elif s < 0:
        z = (s + 1) / math.sqrt(var)
    else:
        z = 0.0
    p_inc = 0.5 * math.erfc(z / math.sqrt(2.0))
    p_dec = 0.5 * math.erfc(-z / math.sqrt(2.0))
    return s, z, p_inc, p_dec
