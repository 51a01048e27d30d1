"""Physical constants and unit-conversion factors.

CODATA values, fixed to 6 significant figures. All loss-budget arithmetic
is done in SI; results are exposed in convenience units (GHz, fF, ms).
"""

import math

ELEMENTARY_CHARGE = 1.602177e-19  # C
PLANCK = 6.626070e-34  # J s
HBAR = 1.054572e-34  # J s
MU_0 = 1.256637e-6  # N/A^2
EPSILON_0 = 8.854188e-12  # F/m

# Asymmetry shift per unit field and dipole: (e * 1 Angstrom / h), expressed
# in GHz per (V/m) per (e*Angstrom). delta_eps[GHz] = p[e*A] * E[V/m] * this.
DIPOLE_GHZ_PER_V_PER_M = ELEMENTARY_CHARGE * 1e-10 / PLANCK / 1e9

# Detuning conversion used in the TLS relaxation Lorentzian: rates (g, Gamma2)
# are carried in MHz, which is numerically identical to 1/us; a detuning in
# GHz enters as an angular frequency, 2*pi * 1000 * delta_GHz in rad/us.
ANGULAR_PER_GHZ_DETUNING = 2.0 * math.pi * 1e3
