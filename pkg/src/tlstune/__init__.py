"""tlstune: stochastic simulator of DC-field tuning of two-level defects
coupled to a transmon, with a T1 sweep optimizer, a paired benchmarking
harness, and an analytic gate loss-budget calculator."""

__version__ = "0.1.0"

from .environment import (ConfigurationError, Fluctuator, QubitEnvironment,
                          TlsDefect, tls_frequency)
from .measurement import (MeasurementConfig, T1Measurement, default_delay_grid,
                          measure_t1, swap_spectroscopy)
from .optimizer import (OptimizationError, OptimizationResult, SweepPlan,
                        approach_field, coarse_sweep, optimize, smooth3)

__all__ = [
    "ConfigurationError", "Fluctuator", "QubitEnvironment", "TlsDefect",
    "tls_frequency", "MeasurementConfig", "T1Measurement",
    "default_delay_grid", "measure_t1", "swap_spectroscopy",
    "OptimizationError", "OptimizationResult", "SweepPlan", "approach_field",
    "coarse_sweep", "optimize", "smooth3", "__version__",
]
