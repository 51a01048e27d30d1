"""Two-pass DC-field optimization of the qubit T1 time.

Pass one sweeps the field monotonically from start to stop, measures T1 at
every step, smooths the curve with a 3-point nearest-neighbour average (so
single noisy spikes or narrow dips do not win), and picks the field of the
smoothed maximum. The field is then re-approached from the sweep start so
hysteretic fluctuators end up in the same state they had during the sweep.
Pass two sweeps a window around the candidate in finer steps and stops at
the first point whose T1 is close enough to the smoothed coarse maximum.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .measurement import measure_t1


class OptimizationError(RuntimeError):
    """A sweep produced no usable T1 fit."""


@dataclass
class SweepPlan:
    """Field grid for the two passes. Fields in V/m.

    step is a magnitude; the sweep direction comes from stop - start.
    fine_step and fine_window default to step/5 and 2*step.
    """

    start: float
    stop: float
    step: float
    fine_step: float = None
    fine_window: float = None
    closeness_fraction: float = 0.9

    def __post_init__(self):
        if self.start == self.stop:
            raise ValueError("start and stop must differ")
        if self.step <= 0:
            raise ValueError("step must be > 0")
        if self.fine_step is None:
            self.fine_step = self.step / 5.0
        if self.fine_window is None:
            self.fine_window = 2.0 * self.step
        if not 0.0 < self.fine_step < self.step:
            raise ValueError("fine_step must be in (0, step)")
        if self.fine_window <= 0:
            raise ValueError("fine_window must be > 0")
        if not 0.0 <= self.closeness_fraction <= 1.0:
            raise ValueError("closeness_fraction must be in [0, 1]")


@dataclass
class OptimizationResult:
    coarse_curve: list  # (field V/m, t1 us, smoothed t1 us)
    fine_curve: list  # (field V/m, t1 us)
    chosen_field: float
    coarse_max_t1: float  # max of the smoothed coarse curve, us
    achieved_t1: float  # us, measured at chosen_field during the fine pass
    passes: int
    reached_closeness: bool


def smooth3(values):
    """3-point nearest-neighbour average; 2-point means at the edges."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("need a non-empty 1-D sequence")
    if v.size == 1:
        return v.copy()
    out = np.empty_like(v)
    out[0] = 0.5 * (v[0] + v[1])
    out[-1] = 0.5 * (v[-2] + v[-1])
    if v.size > 2:
        out[1:-1] = (v[:-2] + v[1:-1] + v[2:]) / 3.0
    return out


def _grid(start, stop, step):
    # Monotone grid from start toward stop; stop appended when the step does
    # not land on it, so the sweep always covers the full span.
    direction = 1.0 if stop > start else -1.0
    n = int(math.floor(abs(stop - start) / step + 1e-9))
    fields = [start + direction * step * i for i in range(n + 1)]
    if abs(fields[-1] - stop) > 1e-9 * max(1.0, abs(stop)):
        fields.append(stop)
    return fields


def coarse_sweep(env, qubit_freq, plan, cfg):
    """First pass: measure T1 over the full grid, pick the smoothed maximum.

    Failed fits are skipped (a dropped point distorts the smoothing less
    than a sentinel value would). Ties go to the field visited first, which
    is the one closest to the sweep start.

    Returns (curve, candidate_field) with curve rows (field, t1, smoothed).
    """
    fields = _grid(plan.start, plan.stop, plan.step)
    if len(fields) < 8:
        warnings.warn("coarse sweep has fewer than 8 points; smoothing will be "
                      "crude", stacklevel=2)
    kept_fields, kept_t1 = [], []
    for field in fields:
        env.set_field(field)
        meas = measure_t1(env, qubit_freq, cfg)
        if meas.fit_ok:
            kept_fields.append(field)
            kept_t1.append(meas.t1_fit)
    if not kept_t1:
        raise OptimizationError("every T1 fit in the coarse sweep failed")
    smoothed = smooth3(kept_t1)
    best = int(np.argmax(smoothed))  # first occurrence on ties
    curve = [(f, t, s) for f, t, s in zip(kept_fields, kept_t1, smoothed.tolist())]
    return curve, kept_fields[best]


def approach_field(env, candidate, plan):
    """Bring the field to candidate via the same path the sweep took.

    Resets to plan.start and ramps straight to candidate, which reproduces
    the metastable-fluctuator states realized during the monotone sweep at
    that field (a direct ramp from elsewhere generally does not).
    """
    lo = min(plan.start, plan.stop) - plan.fine_window
    hi = max(plan.start, plan.stop) + plan.fine_window
    if not lo <= candidate <= hi:
        raise ValueError("candidate outside the swept field range")
    env.set_field(plan.start)
    env.set_field(candidate)


def optimize(env, qubit_freq, plan, cfg):
    """Full two-pass optimization. Leaves the environment at chosen_field."""
    coarse_curve, candidate = coarse_sweep(env, qubit_freq, plan, cfg)
    coarse_max = max(row[2] for row in coarse_curve)
    threshold = plan.closeness_fraction * coarse_max
    approach_field(env, candidate, plan)

    direction = 1.0 if plan.stop > plan.start else -1.0
    fine_fields = _grid(candidate - direction * plan.fine_window,
                        candidate + direction * plan.fine_window,
                        plan.fine_step)
    fine_curve = []
    chosen = achieved = None
    reached = False
    for field in fine_fields:
        env.set_field(field)
        meas = measure_t1(env, qubit_freq, cfg)
        if not meas.fit_ok:
            continue
        fine_curve.append((field, meas.t1_fit))
        if meas.t1_fit >= threshold:
            chosen, achieved, reached = field, meas.t1_fit, True
            break
    if chosen is None:
        if not fine_curve:
            raise OptimizationError("every T1 fit in the fine sweep failed")
        best = int(np.argmax([t for _, t in fine_curve]))
        chosen, achieved = fine_curve[best]
        approach_field(env, chosen, plan)
    return OptimizationResult(coarse_curve=coarse_curve, fine_curve=fine_curve,
                              chosen_field=chosen, coarse_max_t1=coarse_max,
                              achieved_t1=achieved, passes=2,
                              reached_closeness=reached)
