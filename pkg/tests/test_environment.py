"""Defect bath model: resonances, telegraph switching, field hysteresis."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlstune.constants import DIPOLE_GHZ_PER_V_PER_M
from tlstune.environment import (ConfigurationError, Fluctuator,
                                 QubitEnvironment, TlsDefect, tls_frequency)


def make_defect(**kwargs):
    base = dict(asymmetry0=3.0, tunneling=4.0, dipole_projection=0.1,
                coupling=1.0, linewidth=1.0)
    base.update(kwargs)
    return TlsDefect(**base)


# ------------------------------------------------------------------ validation

@pytest.mark.parametrize("bad", [dict(tunneling=0.0), dict(tunneling=-1.0),
                                 dict(linewidth=0.0), dict(coupling=-0.5)])
def test_defect_rejects_nonphysical_parameters(bad):
    with pytest.raises(ConfigurationError):
        make_defect(**bad)


def test_fluctuator_rejects_unknown_kind():
    with pytest.raises(ConfigurationError):
        Fluctuator(id=0, kind="quantum")


def test_fluctuator_rejects_bad_state():
    with pytest.raises(ConfigurationError):
        Fluctuator(id=0, kind="thermal", state=2, rate_up=1.0)


def test_thermal_fluctuator_needs_positive_total_rate():
    with pytest.raises(ConfigurationError):
        Fluctuator(id=0, kind="thermal", rate_up=0.0, rate_down=0.0)
    # One-way switchers are allowed.
    Fluctuator(id=0, kind="thermal", rate_up=1.0, rate_down=0.0)


def test_metastable_thresholds_must_be_ordered():
    with pytest.raises(ConfigurationError):
        Fluctuator(id=0, kind="metastable", field_threshold_up=1.0,
                   field_threshold_down=1.0)


def test_environment_rejects_duplicate_fluctuator_ids():
    flucts = [Fluctuator(id=5, kind="thermal", rate_up=1.0),
              Fluctuator(id=5, kind="thermal", rate_up=2.0)]
    with pytest.raises(ConfigurationError):
        QubitEnvironment([], flucts)


def test_environment_rejects_dangling_link():
    defect = make_defect(fluctuator_links=[(9, 0.5)])
    with pytest.raises(ConfigurationError):
        QubitEnvironment([defect], [])


def test_environment_rejects_negative_background():
    with pytest.raises(ConfigurationError):
        QubitEnvironment([], background_gamma=-0.01)


# ------------------------------------------------------------------ frequency

def test_resonance_is_hypotenuse_of_asymmetry_and_tunneling():
    defect = make_defect(asymmetry0=3.0, tunneling=4.0)
    assert tls_frequency(defect, {}, 0.0) == 5.0


def test_field_shifts_asymmetry_through_dipole():
    defect = make_defect(asymmetry0=3.0, tunneling=4.0, dipole_projection=0.1)
    E = 5e3
    eps = 3.0 + 0.1 * E * DIPOLE_GHZ_PER_V_PER_M
    assert tls_frequency(defect, {}, E) == pytest.approx(
        math.hypot(eps, 4.0), rel=1e-15)


def test_zero_dipole_defect_is_field_immune():
    defect = make_defect(dipole_projection=0.0)
    f0 = tls_frequency(defect, {}, 0.0)
    for E in (-1e5, -7.0, 3e4, 1e5):
        assert tls_frequency(defect, {}, E) == f0


def test_linked_fluctuator_shifts_asymmetry_only_in_state_one():
    defect = make_defect(fluctuator_links=[(3, 0.5)])
    assert tls_frequency(defect, {3: 0}, 0.0) == 5.0
    assert tls_frequency(defect, {3: 1}, 0.0) == math.hypot(3.5, 4.0)


def test_tls_frequency_requires_linked_states():
    defect = make_defect(fluctuator_links=[(3, 0.5)])
    with pytest.raises(ConfigurationError):
        tls_frequency(defect, {}, 0.0)


def test_tls_frequency_rejects_nonfinite_field():
    with pytest.raises(ValueError):
        tls_frequency(make_defect(), {}, math.nan)


@given(st.floats(-10.0, 10.0), st.floats(0.1, 10.0), st.floats(-1.0, 1.0),
       st.floats(-1e5, 1e5))
@settings(max_examples=60, deadline=None)
def test_resonance_never_below_tunneling(eps0, delta0, p, E):
    defect = make_defect(asymmetry0=eps0, tunneling=delta0,
                         dipole_projection=p)
    assert tls_frequency(defect, {}, E) >= delta0


def test_defect_frequencies_matches_scalar_path():
    defects = [make_defect(asymmetry0=a, dipole_projection=p,
                           fluctuator_links=[(0, 0.3)])
               for a, p in [(-2.0, 0.4), (0.5, -0.9), (3.0, 0.0)]]
    fluct = Fluctuator(id=0, kind="thermal", state=1, rate_up=1.0)
    env = QubitEnvironment(defects, [fluct], field=2e4)
    expected = [tls_frequency(d, {0: 1}, 2e4) for d in defects]
    np.testing.assert_allclose(env.defect_frequencies(), expected, rtol=1e-15)


# ------------------------------------------------------------------ telegraph

def test_advance_rejects_negative_dt():
    env = QubitEnvironment([], [])
    with pytest.raises(ValueError):
        env.advance_fluctuators(-1.0)


def test_advance_moves_the_clock():
    env = QubitEnvironment([], [], clock=5.0)
    env.advance_fluctuators(2.5)
    env.advance_fluctuators(0.0)
    assert env.clock == 7.5


def test_one_way_switchers_are_absorbing():
    up_only = Fluctuator(id=0, kind="thermal", state=1, rate_up=1.0)
    down_only = Fluctuator(id=1, kind="thermal", state=0, rate_down=1.0)
    env = QubitEnvironment([], [up_only, down_only], rng_seed=1)
    for _ in range(50):
        env.advance_fluctuators(10.0)
    assert env.fluctuator_states == {0: 1, 1: 0}


def test_telegraph_reaches_stationary_occupation():
    # rate_up/total = 0.75; with dt >> 1/total each step is an independent
    # stationary draw, so the mean occupancy concentrates at 0.75.
    fluct = Fluctuator(id=0, kind="thermal", rate_up=3.0, rate_down=1.0)
    env = QubitEnvironment([], [fluct], rng_seed=11)
    samples = []
    for _ in range(4000):
        env.advance_fluctuators(10.0)
        samples.append(env.fluctuators[0].state)
    sigma = math.sqrt(0.75 * 0.25 / len(samples))
    assert abs(np.mean(samples) - 0.75) < 4 * sigma


def test_telegraph_short_step_rarely_flips():
    # exp(-total*dt) ~ 1 keeps the state glued to its current value.
    fluct = Fluctuator(id=0, kind="thermal", state=1, rate_up=1.0,
                       rate_down=1.0)
    env = QubitEnvironment([], [fluct], rng_seed=2)
    flips = 0
    for _ in range(500):
        before = env.fluctuators[0].state
        env.advance_fluctuators(1e-6)
        flips += env.fluctuators[0].state != before
    assert flips == 0


def test_metastable_ignores_the_clock():
    fluct = Fluctuator(id=0, kind="metastable", state=1,
                       field_threshold_up=5.0, field_threshold_down=-5.0)
    env = QubitEnvironment([], [fluct], rng_seed=0)
    env.advance_fluctuators(1e6)
    assert env.fluctuators[0].state == 1


# ------------------------------------------------------------------ hysteresis

def hysteresis_env(state=0):
    fluct = Fluctuator(id=0, kind="metastable", state=state,
                       field_threshold_up=7e3, field_threshold_down=2e3)
    return QubitEnvironment([], [fluct])


def test_rising_through_upper_threshold_sets_state():
    env = hysteresis_env(0)
    env.set_field(6.9e3)
    assert env.fluctuators[0].state == 0
    env.set_field(7e3)  # arrival exactly at the threshold counts
    assert env.fluctuators[0].state == 1


def test_falling_through_lower_threshold_clears_state():
    env = hysteresis_env(1)
    env.field = 10e3
    env.set_field(2.1e3)
    assert env.fluctuators[0].state == 1
    env.set_field(2e3)
    assert env.fluctuators[0].state == 0


def test_moves_inside_the_hysteresis_band_do_not_switch():
    env = hysteresis_env(0)
    env.field = 3e3
    for f in (5e3, 2.5e3, 6.9e3, 2.01e3):
        env.set_field(f)
        assert env.fluctuators[0].state == 0


def test_starting_on_upper_threshold_does_not_rearm():
    # A rise must start strictly below the threshold to trigger.
    env = hysteresis_env(0)
    env.field = 7e3
    env.set_field(9e3)
    assert env.fluctuators[0].state == 0


def test_full_loop_returns_to_initial_state():
    env = hysteresis_env(0)
    env.set_field(10e3)
    assert env.fluctuators[0].state == 1
    env.set_field(0.0)
    assert env.fluctuators[0].state == 0


def test_set_field_rejects_nonfinite():
    env = QubitEnvironment([], [])
    with pytest.raises(ValueError):
        env.set_field(math.inf)


# ------------------------------------------------------------------ rates

def test_relaxation_rate_matches_hand_lorentzian():
    defect = make_defect(asymmetry0=0.0, tunneling=5.0, coupling=1.2,
                         linewidth=0.8)
    env = QubitEnvironment([defect], background_gamma=0.015)
    delta_ghz = 0.002
    angular = 2 * math.pi * 1e3 * delta_ghz
    expected = 0.015 + 2 * 1.2**2 * 0.8 / (0.8**2 + angular**2)
    assert env.relaxation_rate(5.0 + delta_ghz) == pytest.approx(
        expected, rel=1e-12)


def test_relaxation_rate_rejects_nonpositive_frequency():
    env = QubitEnvironment([])
    with pytest.raises(ValueError):
        env.relaxation_rate(0.0)


def test_field_steers_rate_through_resonance():
    # Tune the field so the defect crosses 5 GHz; the rate peaks there and
    # collapses to nearly nothing a few tens of kV/m away.
    defect = make_defect(asymmetry0=-1.0, tunneling=4.9, dipole_projection=1.0)
    env = QubitEnvironment([defect], background_gamma=0.0)
    eps_target = -math.sqrt(5.0**2 - 4.9**2)
    on_resonance = (eps_target + 1.0) / DIPOLE_GHZ_PER_V_PER_M
    env.field = on_resonance
    peak = env.relaxation_rate(5.0)
    assert peak == pytest.approx(2.0 * 1.0**2 / 1.0, rel=1e-9)
    env.field = on_resonance + 5e4
    assert env.relaxation_rate(5.0) < 1e-3 * peak


# ------------------------------------------------------------------ cloning

def test_clone_is_independent():
    fluct = Fluctuator(id=0, kind="thermal", rate_up=5.0, rate_down=5.0)
    env = QubitEnvironment([make_defect()], [fluct], rng_seed=3)
    env.advance_fluctuators(0.7)
    twin = env.clone()
    assert twin.clock == env.clock
    assert twin.fluctuator_states == env.fluctuator_states
    # Advancing the original leaves the clone untouched.
    env.advance_fluctuators(100.0)
    env.set_field(5e4)
    assert twin.clock == 0.7
    assert twin.field == 0.0


def test_clone_replays_the_same_trajectory():
    fluct = Fluctuator(id=0, kind="thermal", rate_up=2.0, rate_down=3.0)
    env = QubitEnvironment([], [fluct], rng_seed=9)
    env.advance_fluctuators(1.0)
    twin = env.clone()
    trace_a, trace_b = [], []
    for _ in range(200):
        env.advance_fluctuators(0.5)
        trace_a.append(env.fluctuators[0].state)
    for _ in range(200):
        twin.advance_fluctuators(0.5)
        trace_b.append(twin.fluctuators[0].state)
    assert trace_a == trace_b
