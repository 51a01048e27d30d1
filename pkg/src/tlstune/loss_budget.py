"""Analytic T1 limits imposed by a DC bias gate on a transmon.

Two loss channels: radiative decay into the bias wiring through the coupling
capacitance (loaded quality factor Q_l), and dielectric loss in the gate
insulator weighted by the participation ratio P_f. Both are closed-form in
the circuit capacitances; all arithmetic is SI internally, results exposed
in convenience units (GHz, fF, ms).

An unbounded T1 (decoupled gate, zero participation) is reported as the
NO_LIMIT sentinel, float('inf'); serialization maps it to null.
"""

import math
import warnings
from dataclasses import dataclass, replace

from .constants import ELEMENTARY_CHARGE, EPSILON_0, HBAR, MU_0, PLANCK

NO_LIMIT = float("inf")

MODES = ("rf_50ohm", "dc_wire", "floating")
FLOATING_IMPEDANCE = 1e9  # ohm, "huge number" stand-in for an unwired gate

# Qubit island footprint used by the capacitance-from-geometry model: two
# arms of width ARM_WIDTH and length ARM_LENGTH, separated from ground by
# ARM_GAP. The effective arm width grows with gate distance because fringing
# fields widen the island's shadow, saturating at width + gap.
ARM_WIDTH = 30e-6  # m
ARM_GAP = 20e-6  # m
ARM_LENGTH = 320e-6  # m

_FF = 1e-15


@dataclass
class CircuitParams:
    """Lumped circuit description of qubit + gate + wiring.

    Capacitances in fF, e_j in GHz, wire geometry in SI. c_c = 0 encodes a
    fully decoupled gate and yields NO_LIMIT budgets rather than an error.
    """

    c_q: float  # fF, island + junction self-capacitance
    c_c: float  # fF, qubit-gate coupling
    c_f: float  # fF, gate-to-ground filter
    e_j: float  # GHz
    wire_length: float = 1.0  # m
    wire_radius: float = 50e-6  # m
    wire_conductivity: float = 1.5e6  # 1/(ohm m)
    loss_tangent: float = 2e-2
    mode: str = "dc_wire"

    def __post_init__(self):
        if self.c_q <= 0 or self.c_f <= 0:
            raise ValueError("c_q and c_f must be > 0")
        if self.c_c < 0:
            raise ValueError("c_c must be >= 0")
        if self.e_j <= 0:
            raise ValueError("e_j must be > 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.c_c < self.c_f / 10.0:
            warnings.warn("c_c is not small against c_f; the lumped formulas "
                          "assume c_c << c_f", stacklevel=2)

    @property
    def c_tot(self):
        """Total shunt capacitance c_q + (c_c in series with c_f), fF."""
        if self.c_c == 0.0:
            return self.c_q
        return self.c_q + self.c_c * self.c_f / (self.c_c + self.c_f)


@dataclass
class GateGeometry:
    """Parallel-plate description of one bias gate."""

    gate_area: float  # m^2
    gate_distance: float  # m, qubit plane to gate electrode
    insulator_thickness: float  # m
    insulator_permittivity: float  # relative

    def __post_init__(self):
        for name in ("gate_area", "gate_distance", "insulator_thickness",
                     "insulator_permittivity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


def charging_energy(c_tot_ff):
    """E_C = e^2/(2*h*C_tot) in GHz for C_tot in fF."""
    if c_tot_ff <= 0:
        raise ValueError("c_tot must be > 0")
    return ELEMENTARY_CHARGE ** 2 / (2.0 * PLANCK * c_tot_ff * _FF) / 1e9


def qubit_frequency(e_j, e_c):
    """Transmon 0-1 frequency sqrt(8*E_J*E_C) - E_C, all in GHz."""
    if e_j <= 0 or e_c <= 0:
        raise ValueError("e_j and e_c must be > 0")
    if e_j / e_c < 20.0:
        warnings.warn("e_j/e_c < 20: outside the transmon regime the "
                      "frequency formula degrades", stacklevel=2)
    return math.sqrt(8.0 * e_j * e_c) - e_c


def circuit_f01(params):
    """f01 (GHz) implied by the circuit's own E_J and C_tot."""
    return qubit_frequency(params.e_j, charging_energy(params.c_tot))


def wire_impedance(length, radius, f01_ghz, conductivity):
    """Series impedance (ohm) of a normal-metal bias wire at f01.

    Skin-effect surface resistance sqrt(mu0*f/(pi*sigma)) spread over the
    wire circumference, times its length: sqrt(mu0 f/(pi sigma)) * l/(2r).
    """
    if min(length, radius, f01_ghz, conductivity) <= 0:
        raise ValueError("wire parameters must be > 0")
    return math.sqrt(MU_0 * f01_ghz * 1e9 / (math.pi * conductivity)) \
        * length / (2.0 * radius)


def gate_impedance(params, f01_ghz):
    """Impedance terminating the gate, per wiring mode."""
    if params.mode == "rf_50ohm":
        return 50.0
    if params.mode == "floating":
        return FLOATING_IMPEDANCE
    return wire_impedance(params.wire_length, params.wire_radius, f01_ghz,
                          params.wire_conductivity)


def t1_radiative(params, f01_ghz=None):
    """Radiative T1 limit (ms) from decay into the gate wiring.

    L_J = (hbar/2e)^2/E_J, Z_q = sqrt(L_J/C_tot); the wiring impedance Z is
    shunted by C_f, so Re(Z_eff) = Z/(1 + (w C_f Z)^2); the gate couples
    through c_c, giving Q_l = (C_tot/C_c)^2 * Z_q/Re(Z_eff) and
    T1 = Q_l/w01.
    """
    if f01_ghz is None:
        f01_ghz = circuit_f01(params)
    if params.c_c == 0.0:
        return NO_LIMIT
    omega = 2.0 * math.pi * f01_ghz * 1e9
    c_tot = params.c_tot * _FF
    c_f = params.c_f * _FF
    c_c = params.c_c * _FF
    l_j = (HBAR / (2.0 * ELEMENTARY_CHARGE)) ** 2 / (params.e_j * 1e9 * PLANCK)
    z_q = math.sqrt(l_j / c_tot)
    z = gate_impedance(params, f01_ghz)
    re_z_eff = z / (1.0 + (omega * c_f * z) ** 2)
    q_l = (c_tot / c_c) ** 2 * z_q / re_z_eff
    return q_l / omega * 1e3


def t1_dielectric(params, f01_ghz=None):
    """Dielectric T1 limit (ms) from loss in the gate insulator.

    Participation P_f = C_c^2/(C_f (C_q + C_c)); 1/T1 = P_f tan(delta) w01.
    """
    if f01_ghz is None:
        f01_ghz = circuit_f01(params)
    if params.c_c == 0.0 or params.loss_tangent == 0.0:
        return NO_LIMIT
    omega = 2.0 * math.pi * f01_ghz * 1e9
    p_f = (params.c_c * _FF) ** 2 / ((params.c_f * _FF)
                                     * (params.c_q + params.c_c) * _FF)
    return 1.0 / (p_f * params.loss_tangent * omega) * 1e3


def t1_total(params, f01_ghz=None):
    """Combined gate-induced T1 limit (ms), rates added harmonically."""
    if f01_ghz is None:
        f01_ghz = circuit_f01(params)
    rad = t1_radiative(params, f01_ghz)
    diel = t1_dielectric(params, f01_ghz)
    if math.isinf(rad):
        return diel
    if math.isinf(diel):
        return rad
    return rad * diel / (rad + diel)


def effective_island_area(gate_distance, arm_length=ARM_LENGTH):
    """Island footprint (m^2) seen by a gate at the given distance.

    Fringe fields widen each arm from ARM_WIDTH toward ARM_WIDTH + ARM_GAP
    as the gate moves away; the interpolation gap*d/(d + 2*gap) is exact in
    neither limit but matches both asymptotes.
    """
    w_eff = ARM_WIDTH + ARM_GAP * gate_distance / (gate_distance + 2.0 * ARM_GAP)
    return 2.0 * w_eff * arm_length


def derive_capacitances(geometry, gate_area=None, arm_length=ARM_LENGTH):
    """(c_c, c_f) in fF from parallel-plate geometry.

    c_f is the full gate electrode against its ground plane through the
    insulator film; c_c is the gate-island overlap across the vacuum gap,
    capped by the island's effective footprint.
    """
    area = geometry.gate_area if gate_area is None else gate_area
    if area <= 0:
        raise ValueError("gate area must be > 0")
    c_f = EPSILON_0 * geometry.insulator_permittivity * area \
        / geometry.insulator_thickness
    overlap = min(area, effective_island_area(geometry.gate_distance, arm_length))
    c_c = EPSILON_0 * overlap / geometry.gate_distance
    return c_c / _FF, c_f / _FF


def sweep_gate_area(params, geometry, areas, mode=None, arm_length=ARM_LENGTH):
    """Loss budget vs gate area.

    Re-derives (c_c, c_f) and the circuit's own f01 at every area; returns
    rows of (area m^2, t1_rad ms, t1_diel ms, t1_total ms).
    """
    rows = []
    for area in areas:
        c_c, c_f = derive_capacitances(geometry, gate_area=area,
                                       arm_length=arm_length)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = replace(params, c_c=c_c, c_f=c_f,
                        mode=params.mode if mode is None else mode)
        f01 = circuit_f01(p)
        rows.append((float(area), t1_radiative(p, f01), t1_dielectric(p, f01),
                     t1_total(p, f01)))
    return rows


def global_gate_params():
    """Preset: large gate below the chip carrier, biased through a long
    normal-metal wire, polyimide-film insulated."""
    geometry = GateGeometry(gate_area=1.2e-5, gate_distance=0.9e-3,
                            insulator_thickness=60e-6,
                            insulator_permittivity=3.5)
    c_c, c_f = derive_capacitances(geometry)
    params = CircuitParams(c_q=96.8, c_c=c_c, c_f=c_f, e_j=12.8,
                           wire_length=1.0, wire_radius=50e-6,
                           wire_conductivity=1.5e6, loss_tangent=2e-2,
                           mode="dc_wire")
    return params, geometry


def local_gate_params():
    """Preset: per-qubit flip-chip gate 15 um above a shortened island,
    thin-oxide insulated, biased through an on-chip filtered (effectively
    floating) line."""
    geometry = GateGeometry(gate_area=3e-8, gate_distance=15e-6,
                            insulator_thickness=25e-9,
                            insulator_permittivity=9.8)
    c_c, c_f = derive_capacitances(geometry, arm_length=300e-6)
    params = CircuitParams(c_q=84.4, c_c=c_c, c_f=c_f, e_j=12.8,
                           wire_length=1.0, wire_radius=50e-6,
                           wire_conductivity=1.5e6, loss_tangent=1e-3,
                           mode="floating")
    return params, geometry
