"""Random defect-bath generation and the hysteresis demonstration fixture.

Distributions (all overridable): defect resonances uniform over the band,
dipole projections log-uniform, couplings log-uniform, linewidths uniform,
thermal switching rates log-uniform. The asymmetry/tunneling split at fixed
resonance is drawn so most defects respond to the field at first order
(asymmetry fraction uniform in [0.2, 0.95], random sign).
"""

import math
from dataclasses import dataclass

import numpy as np

from .environment import Fluctuator, QubitEnvironment, TlsDefect
from .optimizer import SweepPlan


@dataclass
class BathSpec:
    """Parameters of the random bath generator."""

    band_ghz: tuple = (4.2, 5.8)  # defect resonances drawn uniformly here
    defects_per_ghz: float = 120.0
    background_gamma: float = 0.02  # 1/us, field-independent floor
    dipole_range: tuple = (0.01, 1.0)  # e*Angstrom, log-uniform
    coupling_range_mhz: tuple = (0.1, 2.0)  # log-uniform
    linewidth_range_mhz: tuple = (0.1, 5.0)  # uniform
    asymmetry_fraction_range: tuple = (0.2, 0.95)  # |eps0|/f, uniform
    fluctuators_per_defect: float = 0.3  # Bernoulli link probability
    fluctuator_rate_range_hz: tuple = (1e-4, 1.0)  # log-uniform
    fluctuator_shift_range_ghz: tuple = (0.005, 0.05)  # log-uniform
    n_metastable: int = 0
    metastable_threshold_range: tuple = (-50e3, 50e3)  # V/m
    include_junction_tls: bool = False

    def __post_init__(self):
        if self.band_ghz[1] <= self.band_ghz[0] or self.band_ghz[0] <= 0:
            raise ValueError("band must be (lo, hi) with 0 < lo < hi")
        if self.defects_per_ghz < 0 or self.background_gamma < 0:
            raise ValueError("density and background must be >= 0")
        if not 0.0 <= self.fluctuators_per_defect <= 1.0:
            raise ValueError("fluctuators_per_defect is a probability")
        if self.n_metastable < 0:
            raise ValueError("n_metastable must be >= 0")


def _log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def generate_bath(spec, seed, env_seed=None):
    """Build a reproducible QubitEnvironment from a BathSpec and a seed.

    The defect realization is a pure function of (spec, seed). env_seed, when
    given, seeds the environment's own generator instead of the derived
    default, so several stochastic replicas can share one bath realization.
    """
    root = np.random.SeedSequence(seed)
    draw_ss, env_ss = root.spawn(2)
    rng = np.random.default_rng(draw_ss)
    lo, hi = spec.band_ghz
    n_defects = int(rng.poisson(spec.defects_per_ghz * (hi - lo)))

    defects, fluctuators = [], []
    next_id = 0
    for _ in range(n_defects):
        f_res = rng.uniform(lo, hi)
        frac = rng.uniform(*spec.asymmetry_fraction_range)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        asym0 = sign * frac * f_res
        tunneling = f_res * math.sqrt(1.0 - frac * frac)
        links = []
        if rng.random() < spec.fluctuators_per_defect:
            rate_up = float(_log_uniform(rng, *spec.fluctuator_rate_range_hz))
            rate_down = float(_log_uniform(rng, *spec.fluctuator_rate_range_hz))
            p_stat = rate_up / (rate_up + rate_down)
            fluctuators.append(Fluctuator(
                id=next_id, kind="thermal",
                state=1 if rng.random() < p_stat else 0,
                rate_up=rate_up, rate_down=rate_down))
            shift = float(_log_uniform(rng, *spec.fluctuator_shift_range_ghz))
            if rng.random() < 0.5:
                shift = -shift
            links.append((next_id, shift))
            next_id += 1
        defects.append(TlsDefect(
            asymmetry0=asym0, tunneling=tunneling,
            dipole_projection=float(_log_uniform(rng, *spec.dipole_range)),
            coupling=float(_log_uniform(rng, *spec.coupling_range_mhz)),
            linewidth=float(rng.uniform(*spec.linewidth_range_mhz)),
            fluctuator_links=links))

    for _ in range(spec.n_metastable):
        t_lo, t_hi = spec.metastable_threshold_range
        up = rng.uniform(t_lo, t_hi)
        down = rng.uniform(t_lo, up)
        if down == up:
            down = up - 1.0
        fluct = Fluctuator(id=next_id, kind="metastable", state=0,
                           field_threshold_up=up, field_threshold_down=down)
        fluctuators.append(fluct)
        if defects:
            victim = defects[int(rng.integers(len(defects)))]
            shift = float(_log_uniform(rng, *spec.fluctuator_shift_range_ghz))
            victim.fluctuator_links.append((next_id, shift))
        next_id += 1

    if spec.include_junction_tls:
        f_res = rng.uniform(lo, hi)
        defects.append(TlsDefect(
            asymmetry0=0.6 * f_res, tunneling=0.8 * f_res,
            dipole_projection=0.0,
            coupling=float(_log_uniform(rng, *spec.coupling_range_mhz)),
            linewidth=float(rng.uniform(*spec.linewidth_range_mhz))))

    if env_seed is None:
        env_seed = int(env_ss.generate_state(1, np.uint64)[0])
    return QubitEnvironment(defects, fluctuators,
                            background_gamma=spec.background_gamma,
                            rng_seed=env_seed)


def hysteresis_demo_environment():
    """Designated fixture showing field-history dependence.

    One metastable fluctuator (switch up at 7 kV/m, back down at 2 kV/m)
    shifts a defect's asymmetry by +0.5 GHz. Sweeping 0 -> 10 kV/m arms it;
    coming back down to a mid-range field directly leaves it armed, while
    re-approaching the same field from the sweep start (which passes below
    2 kV/m) disarms it, so the defect frequency depends on the path taken.

    Returns (environment, sweep_plan).
    """
    fluct = Fluctuator(id=0, kind="metastable", state=0,
                       field_threshold_up=7e3, field_threshold_down=2e3)
    defect = TlsDefect(asymmetry0=3.0, tunneling=4.0, dipole_projection=0.1,
                       coupling=1.0, linewidth=1.0,
                       fluctuator_links=[(0, 0.5)])
    env = QubitEnvironment([defect], [fluct], background_gamma=0.025,
                           rng_seed=20260823)
    plan = SweepPlan(start=0.0, stop=10e3, step=1e3)
    return env, plan
