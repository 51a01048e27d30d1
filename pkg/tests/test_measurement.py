"""T1 measurement: delay grids, readout model, fit acceptance, clock."""

import math
import warnings

import numpy as np
import pytest

from tlstune.environment import Fluctuator, QubitEnvironment, TlsDefect
from tlstune.measurement import (MeasurementConfig, T1Measurement,
                                 default_delay_grid, measure_t1,
                                 swap_spectroscopy)


def background_env(gamma, seed=0):
    return QubitEnvironment([], background_gamma=gamma, rng_seed=seed)


# ------------------------------------------------------------------ config

def test_default_delay_grid_spans_three_decay_times():
    grid = default_delay_grid(20.0)
    assert grid.size == 40
    assert grid[0] == 0.5
    assert grid[-1] == pytest.approx(60.0)
    assert np.all(np.diff(grid) > 0)


def test_default_delay_grid_rejects_short_t1():
    with pytest.raises(ValueError):
        default_delay_grid(0.1)


@pytest.mark.parametrize("kwargs", [
    dict(delay_grid=[1.0]),
    dict(delay_grid=[1.0, 1.0, 2.0]),
    dict(delay_grid=[1.0, 2.0], shots_per_delay=0),
    dict(delay_grid=[1.0, 2.0], readout_fidelity=0.5),
    dict(delay_grid=[1.0, 2.0], readout_fidelity=1.2),
    dict(delay_grid=[1.0, 2.0], measurement_wall_time=-1.0),
])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        MeasurementConfig(**kwargs)


def test_for_expected_t1_builds_default_grid():
    cfg = MeasurementConfig.for_expected_t1(40.0, shots_per_delay=None)
    assert cfg.delay_grid.size == 40
    assert cfg.delay_grid[-1] == pytest.approx(120.0)
    assert cfg.shots_per_delay is None


# ------------------------------------------------------------------ measuring

def test_exact_mode_recovers_rate_and_readout_levels():
    # Infinite-shot limit: p_click = F*p + (1-F)*(1-p), so the fitted decay
    # has amplitude 2F-1 and offset 1-F with the true decay time.
    env = background_env(0.05)
    cfg = MeasurementConfig.for_expected_t1(20.0, shots_per_delay=None,
                                            readout_fidelity=0.97)
    result = measure_t1(env, 5.0, cfg)
    assert result.fit_ok
    assert result.t1_fit == pytest.approx(20.0, rel=1e-7)
    assert result.amplitude == pytest.approx(2 * 0.97 - 1, rel=1e-6)
    assert result.offset == pytest.approx(1 - 0.97, abs=1e-6)


def test_perfect_readout_has_unit_amplitude():
    env = background_env(0.1)
    cfg = MeasurementConfig.for_expected_t1(10.0, shots_per_delay=None,
                                            readout_fidelity=1.0)
    result = measure_t1(env, 5.0, cfg)
    assert result.amplitude == pytest.approx(1.0, rel=1e-6)
    assert result.offset == pytest.approx(0.0, abs=1e-6)


def test_sampled_mode_recovers_rate_within_shot_noise():
    env = background_env(0.05, seed=123)
    cfg = MeasurementConfig.for_expected_t1(20.0, shots_per_delay=2000)
    result = measure_t1(env, 5.0, cfg)
    assert result.fit_ok
    assert result.t1_fit == pytest.approx(20.0, rel=0.05)
    assert result.t1_stderr < 2.0
    assert len(result.trace) == cfg.delay_grid.size


def test_measurement_is_reproducible_per_seed():
    cfg = MeasurementConfig.for_expected_t1(15.0)
    a = measure_t1(background_env(1 / 15.0, seed=7), 5.0, cfg)
    b = measure_t1(background_env(1 / 15.0, seed=7), 5.0, cfg)
    assert a.trace == b.trace
    assert a.t1_fit == b.t1_fit


def test_measurement_advances_the_clock():
    env = background_env(0.05)
    cfg = MeasurementConfig.for_expected_t1(20.0, measurement_wall_time=2.5)
    measure_t1(env, 5.0, cfg)
    measure_t1(env, 5.0, cfg)
    assert env.clock == 5.0


def test_measurement_consumes_entropy_only_when_sampling():
    env = background_env(0.05, seed=5)
    cfg = MeasurementConfig.for_expected_t1(20.0, shots_per_delay=None)
    measure_t1(env, 5.0, cfg)
    # Exact mode draws nothing, so the next draw matches a fresh generator.
    assert env.rng.random() == np.random.default_rng(5).random()


def test_short_grid_warns():
    env = background_env(0.001)  # T1 = 1000 us, grid ends at 60 us
    cfg = MeasurementConfig.for_expected_t1(20.0, shots_per_delay=None)
    with pytest.warns(UserWarning):
        measure_t1(env, 5.0, cfg)


# ---------------------------------------------------------- fit acceptance

def test_fully_decayed_trace_is_rejected():
    # T1 far below the first delay: the trace is readout noise around 1-F
    # and must not be reported as a valid decay.
    cfg = MeasurementConfig.for_expected_t1(20.0)
    for seed in range(20):
        env = background_env(50.0, seed=seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = measure_t1(env, 5.0, cfg)
        assert not result.fit_ok


def test_undecayed_trace_is_rejected():
    # T1 far above ten grid spans rails the decay-time parameter at its cap.
    env = background_env(1e-6)
    cfg = MeasurementConfig.for_expected_t1(20.0, shots_per_delay=None)
    with pytest.warns(UserWarning):
        result = measure_t1(env, 5.0, cfg)
    assert not result.fit_ok


def test_t1_near_grid_scale_is_accepted():
    for seed in range(20):
        env = background_env(0.05, seed=seed)
        result = measure_t1(env, 5.0, MeasurementConfig.for_expected_t1(20.0))
        assert result.fit_ok
        assert result.t1_fit == pytest.approx(20.0, rel=0.2)


# ------------------------------------------------------------- spectroscopy

def test_spectroscopy_shape_and_uniform_background():
    env = background_env(0.02)
    raster = swap_spectroscopy(env, [4.9, 5.0, 5.1], [0.0, 1e3, 2e3, 3e3],
                               hold_time=10.0)
    assert raster.shape == (4, 3)
    np.testing.assert_allclose(raster, math.exp(-0.02 * 10.0), rtol=1e-12)


def test_spectroscopy_reveals_a_defect_line():
    defect = TlsDefect(asymmetry0=0.0, tunneling=5.0, dipole_projection=0.0,
                       coupling=1.0, linewidth=1.0)
    env = QubitEnvironment([defect], background_gamma=0.0)
    raster = swap_spectroscopy(env, [4.8, 5.0, 5.2], [0.0], hold_time=1.0)
    assert raster[0, 1] < raster[0, 0]
    assert raster[0, 1] < raster[0, 2]
    assert raster[0, 1] == pytest.approx(math.exp(-2.0), rel=1e-9)


def test_spectroscopy_advances_clock_between_columns():
    env = background_env(0.02)
    swap_spectroscopy(env, [5.0], [0.0, 1e3, 2e3], hold_time=1.0,
                      column_time_s=3.0)
    assert env.clock == 6.0


def test_spectroscopy_sweep_direction_matters_for_hysteresis():
    def fresh(start_field):
        fluct = Fluctuator(id=0, kind="metastable", field_threshold_up=5e3,
                           field_threshold_down=1e3)
        defect = TlsDefect(asymmetry0=3.0, tunneling=4.0,
                           dipole_projection=0.0, coupling=1.0, linewidth=1.0,
                           fluctuator_links=[(0, 0.5)])
        return QubitEnvironment([defect], [fluct], background_gamma=0.0,
                                field=start_field)

    fields = [0.0, 2e3, 4e3, 6e3]
    up = swap_spectroscopy(fresh(0.0), [5.0], fields, hold_time=1.0)
    down = swap_spectroscopy(fresh(7e3), [5.0], fields[::-1], hold_time=1.0)
    # The upward sweep arms the fluctuator before reaching 6e3, detuning the
    # defect; sweeping down from above never rises through the threshold.
    assert up[-1, 0] == pytest.approx(1.0, abs=1e-3)
    assert down[0, 0] == pytest.approx(math.exp(-2.0), rel=1e-9)


@pytest.mark.parametrize("freqs,fields,hold", [
    ([], [0.0], 1.0),
    ([5.0], [], 1.0),
    ([5.0], [0.0], -1.0),
])
def test_spectroscopy_rejects_bad_grids(freqs, fields, hold):
    with pytest.raises(ValueError):
        swap_spectroscopy(background_env(0.02), freqs, fields, hold)
