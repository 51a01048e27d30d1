"""Qubit measurement layer: decay traces, shot noise, exponential fits.

A T1 measurement excites the qubit, waits a grid of delays, and reads out;
the true excited-state survival is exp(-Gamma*t) with Gamma taken from the
environment at the probe frequency. Readout flips each shot with probability
1 - readout_fidelity symmetrically, so the fitted trace has amplitude
2F - 1 and offset 1 - F on top of the decay. Thermal fluctuators are frozen
within one trace and advanced by the measurement's wall time afterwards.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import TAU_MIN, fit_exp_decay


def default_delay_grid(expected_t1_us, n_points=40, first_delay_us=0.5):
    """Log-spaced delays (us) from first_delay_us to 3x the expected T1."""
    last = 3.0 * expected_t1_us
    if not last > first_delay_us:
        raise ValueError("expected T1 too short for the requested first delay")
    return np.geomspace(first_delay_us, last, n_points)


@dataclass(eq=False)
class MeasurementConfig:
    """How one T1 measurement is taken.

    shots_per_delay = None means the infinite-shot limit: the trace holds
    exact click probabilities instead of binomial estimates.
    """

    delay_grid: np.ndarray  # us, strictly increasing, >= 2 points
    shots_per_delay: int | None = 1000
    readout_fidelity: float = 0.97  # in (0.5, 1]
    measurement_wall_time: float = 2.0  # s of simulated clock per measurement

    def __post_init__(self):
        self.delay_grid = np.asarray(self.delay_grid, dtype=np.float64)
        if self.delay_grid.ndim != 1 or self.delay_grid.size < 2:
            raise ValueError("delay_grid needs >= 2 delays")
        if not np.all(np.diff(self.delay_grid) > 0):
            raise ValueError("delay_grid must be strictly increasing")
        if self.shots_per_delay is not None and self.shots_per_delay < 1:
            raise ValueError("shots_per_delay must be >= 1 (or None for exact)")
        if not 0.5 < self.readout_fidelity <= 1.0:
            raise ValueError("readout_fidelity must be in (0.5, 1]")
        if self.measurement_wall_time < 0:
            raise ValueError("measurement_wall_time must be >= 0")

    @classmethod
    def for_expected_t1(cls, expected_t1_us, **kwargs):
        """Config with the default 40-point log grid out to 3x expected T1."""
        return cls(delay_grid=default_delay_grid(expected_t1_us), **kwargs)


@dataclass
class T1Measurement:
    """One fitted decay trace."""

    trace: list  # (delay us, excited-state probability estimate)
    t1_fit: float  # us
    t1_stderr: float  # us
    fit_ok: bool
    amplitude: float = 0.0
    offset: float = 0.0


def measure_t1(env, qubit_freq, cfg):
    """Measure T1 at qubit_freq (GHz), advancing the environment clock.

    Binomial shot sampling uses the environment's generator; fit failures are
    reported through fit_ok, never raised, so sweeps keep going.
    """
    gamma = env.relaxation_rate(qubit_freq)
    delays = cfg.delay_grid
    if delays[-1] * gamma < 1.0:
        warnings.warn("delay grid ends before one decay time; fit will be poorly "
                      "constrained", stacklevel=2)
    p_excited = np.exp(-gamma * delays)
    fid = cfg.readout_fidelity
    p_click = fid * p_excited + (1.0 - fid) * (1.0 - p_excited)
    if cfg.shots_per_delay is None:
        estimates = p_click
        amp_floor = 1e-6
    else:
        counts = env.rng.binomial(cfg.shots_per_delay, p_click)
        estimates = counts / cfg.shots_per_delay
        # 5 sigma of binomial noise: a flat (fully decayed) trace must not
        # pass as a valid decay with an arbitrarily long railed tau.
        amp_floor = 2.5 / math.sqrt(cfg.shots_per_delay)
    tau_cap = 10.0 * float(delays[-1])
    a, tau, b, tau_stderr, converged = fit_exp_decay(delays, estimates,
                                                     fit_offset=True,
                                                     tau_max=tau_cap)
    fit_ok = bool(converged and a >= amp_floor and math.isfinite(tau)
                  and TAU_MIN * (1.0 + 1e-9) < tau < 0.999 * tau_cap)
    env.advance_fluctuators(cfg.measurement_wall_time)
    return T1Measurement(trace=list(zip(delays.tolist(), np.asarray(estimates).tolist())),
                         t1_fit=tau, t1_stderr=tau_stderr, fit_ok=fit_ok,
                         amplitude=a, offset=b)


def swap_spectroscopy(env, freq_grid, field_grid, hold_time, column_time_s=1.0):
    """Residual excited population after hold_time (us), per field and frequency.

    Returns a (len(field_grid), len(freq_grid)) array of exp(-Gamma*hold);
    fields are swept in the given order (hysteresis matters) and thermal
    fluctuators advance by column_time_s between columns.
    """
    freqs = np.asarray(freq_grid, dtype=np.float64)
    fields = np.asarray(field_grid, dtype=np.float64)
    if freqs.size == 0 or fields.size == 0:
        raise ValueError("frequency and field grids must be non-empty")
    if hold_time < 0:
        raise ValueError("hold_time must be >= 0")
    raster = np.empty((fields.size, freqs.size))
    for i, e_field in enumerate(fields):
        if i > 0:
            env.advance_fluctuators(column_time_s)
        env.set_field(float(e_field))
        raster[i] = np.exp(-env.relaxation_rates(freqs) * hold_time)
    return raster
