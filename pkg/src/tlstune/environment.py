"""Physical model: a qubit's loss environment made of field-tunable defects.

A defect is a two-level tunneling system with asymmetry energy eps and
tunneling energy Delta0 (both carried as frequencies, GHz); its resonance is
sqrt(eps^2 + Delta0^2). A DC field E shifts the asymmetry linearly through
the defect's dipole projection p, eps(E) = eps0 + p*E/h, so defects with
p = 0 are field-immune. Nearby fluctuators shift the asymmetry when in
state 1: thermal ones switch as a two-state Markov (telegraph) process in
simulated time, metastable ones follow the applied field with hysteretic
thresholds (Schmitt trigger).

The qubit relaxation rate is a frequency-independent background plus a
weak-coupling Lorentzian term per defect, peaking where a defect crosses the
qubit frequency.
"""

import copy
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from ._kernels import lorentzian_rate
from .constants import DIPOLE_GHZ_PER_V_PER_M


class ConfigurationError(ValueError):
    """Inconsistent environment description (bad link, duplicate id, ...)."""


@dataclass
class TlsDefect:
    """One tunneling two-level defect coupled to the qubit.

    fluctuator_links holds (fluctuator id, asymmetry shift in GHz applied
    while that fluctuator is in state 1) pairs.
    """

    asymmetry0: float  # GHz, bare asymmetry at zero field
    tunneling: float  # GHz, > 0
    dipole_projection: float  # e*Angstrom along the field; 0 = field-immune
    coupling: float  # MHz
    linewidth: float  # MHz
    fluctuator_links: list = dataclass_field(default_factory=list)

    def __post_init__(self):
        if not self.tunneling > 0:
            raise ConfigurationError("tunneling must be > 0")
        if not self.linewidth > 0:
            raise ConfigurationError("linewidth must be > 0")
        if self.coupling < 0:
            raise ConfigurationError("coupling must be >= 0")
        self.fluctuator_links = [(int(i), float(s)) for i, s in self.fluctuator_links]


@dataclass
class Fluctuator:
    """Two-state switcher perturbing linked defects.

    kind "thermal": telegraph process with rate_up/rate_down (1/s); at least
    one rate must be positive (one-way switchers are allowed).
    kind "metastable": state follows the applied field deterministically,
    switching up when the field rises through field_threshold_up and down
    when it falls through field_threshold_down (< field_threshold_up).
    """

    id: int
    kind: str
    state: int = 0
    rate_up: float = 0.0  # 1/s, thermal only
    rate_down: float = 0.0
    field_threshold_up: float = 0.0  # V/m, metastable only
    field_threshold_down: float = 0.0

    def __post_init__(self):
        if self.kind not in ("thermal", "metastable"):
            raise ConfigurationError(f"unknown fluctuator kind {self.kind!r}")
        if self.state not in (0, 1):
            raise ConfigurationError("fluctuator state must be 0 or 1")
        if self.kind == "thermal":
            if self.rate_up < 0 or self.rate_down < 0 or self.rate_up + self.rate_down <= 0:
                raise ConfigurationError("thermal rates must be >= 0 with a positive sum")
        else:
            if not self.field_threshold_down < self.field_threshold_up:
                raise ConfigurationError("metastable thresholds need down < up")


def tls_frequency(defect, fluctuator_states, field):
    """Defect resonance frequency (GHz) at the given field and fluctuator states.

    fluctuator_states maps fluctuator id -> state for every linked fluctuator.
    """
    if not math.isfinite(field):
        raise ValueError("field must be finite")
    eps = defect.asymmetry0 + defect.dipole_projection * field * DIPOLE_GHZ_PER_V_PER_M
    for fid, shift in defect.fluctuator_links:
        try:
            state = fluctuator_states[fid]
        except KeyError:
            raise ConfigurationError(f"defect links unknown fluctuator id {fid}") from None
        if state == 1:
            eps += shift
    return math.hypot(eps, defect.tunneling)


class QubitEnvironment:
    """Defect bath + fluctuators + current DC field + simulated clock.

    Owns all randomness through a single seeded generator, so a fixed seed
    makes the whole trajectory (fluctuator switches, shot noise drawn by
    callers from ``rng``) bit-reproducible. Instances are independent values;
    use one per worker.
    """

    def __init__(self, defects, fluctuators=(), background_gamma=0.01,
                 field=0.0, clock=0.0, rng_seed=0):
        self.defects = list(defects)
        self.fluctuators = list(fluctuators)
        if background_gamma < 0:
            raise ConfigurationError("background_gamma must be >= 0")
        self.background_gamma = float(background_gamma)  # 1/us
        self.field = float(field)  # V/m
        self.clock = float(clock)  # s
        self.rng_seed = rng_seed
        self.rng = np.random.default_rng(rng_seed)

        ids = [f.id for f in self.fluctuators]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate fluctuator ids")
        index = {fid: pos for pos, fid in enumerate(ids)}
        self._thermal = [f for f in self.fluctuators if f.kind == "thermal"]
        self._metastable = [f for f in self.fluctuators if f.kind == "metastable"]

        # Static per-defect arrays; defects are treated as immutable after
        # construction.
        self._asym0 = np.array([d.asymmetry0 for d in self.defects], dtype=np.float64)
        self._tunneling = np.array([d.tunneling for d in self.defects], dtype=np.float64)
        self._dipole = np.array([d.dipole_projection for d in self.defects], dtype=np.float64)
        self._coupling = np.array([d.coupling for d in self.defects], dtype=np.float64)
        self._linewidth = np.array([d.linewidth for d in self.defects], dtype=np.float64)
        link_d, link_f, link_s = [], [], []
        for di, d in enumerate(self.defects):
            for fid, shift in d.fluctuator_links:
                if fid not in index:
                    raise ConfigurationError(f"defect links unknown fluctuator id {fid}")
                link_d.append(di)
                link_f.append(index[fid])
                link_s.append(shift)
        self._link_defect = np.array(link_d, dtype=np.intp)
        self._link_fluct = np.array(link_f, dtype=np.intp)
        self._link_shift = np.array(link_s, dtype=np.float64)

    def clone(self):
        """Independent deep copy, including the generator state."""
        return copy.deepcopy(self)

    @property
    def fluctuator_states(self):
        return {f.id: f.state for f in self.fluctuators}

    def defect_frequencies(self):
        """Resonance frequency (GHz) of every defect at the current field/states."""
        eps = self._asym0 + (self.field * DIPOLE_GHZ_PER_V_PER_M) * self._dipole
        if self._link_defect.size:
            states = np.array([f.state for f in self.fluctuators], dtype=np.float64)
            np.add.at(eps, self._link_defect, self._link_shift * states[self._link_fluct])
        return np.hypot(eps, self._tunneling)

    def advance_fluctuators(self, dt):
        """Advance the clock by dt seconds, resampling thermal fluctuators.

        Uses the exact two-state propagator: with total rate L = up + down and
        stationary occupation p = up/L, the state-1 probability after dt is
        p + (s0 - p) * exp(-L*dt). Valid for any dt, not a small-step scheme;
        advancing by dt then dt' is statistically the same as dt + dt'.
        Metastable fluctuators only respond to the field, never to the clock.
        """
        if dt < 0:
            raise ValueError("dt must be >= 0")
        if dt > 0:
            for f in self._thermal:
                total = f.rate_up + f.rate_down
                p_stat = f.rate_up / total
                p1 = p_stat + (f.state - p_stat) * math.exp(-total * dt)
                f.state = 1 if self.rng.random() < p1 else 0
        self.clock += dt

    def set_field(self, field):
        """Ramp the DC field to a new value.

        The ramp is treated as continuous, so every metastable fluctuator
        whose directional threshold lies between the old and new value flips:
        rising through field_threshold_up sets state 1, falling through
        field_threshold_down sets state 0.
        """
        if not math.isfinite(field):
            raise ValueError("field must be finite")
        old = self.field
        if field > old:
            for f in self._metastable:
                if old < f.field_threshold_up <= field:
                    f.state = 1
        elif field < old:
            for f in self._metastable:
                if field <= f.field_threshold_down < old:
                    f.state = 0
        self.field = float(field)

    def relaxation_rate(self, qubit_freq):
        """Total qubit relaxation rate (1/us) at qubit_freq (GHz)."""
        return float(self.relaxation_rates([qubit_freq])[0])

    def relaxation_rates(self, qubit_freqs):
        """Vectorized relaxation_rate over an array of frequencies (GHz)."""
        freqs = np.asarray(qubit_freqs, dtype=np.float64)
        if np.any(freqs <= 0):
            raise ValueError("qubit frequency must be > 0")
        return lorentzian_rate(freqs, self.defect_frequencies(),
                               self._coupling, self._linewidth,
                               self.background_gamma)
