"""Coupled series-resonant two-port link: efficiency, tuning, power budget.

Both ports are series RLC tanks terminated by a real source or load
resistance.  The mesh equations at angular frequency w are

    (Zs + Z1) I1 + j w M I2 = V
    j w M I1 + (Z2 + ZL) I2 = 0,   Z_i = R_i + j(w L_i - 1/(w C_i))

Powers use the peak-amplitude convention P = Re(V conj(I)) / 2.  The input
power is taken at the two-port input (after the source resistance), so
input = delivered + coil losses holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .magnetics import MU0, FieldMap
from .geometry import REGION_EXTERIOR


class DegenerateLinkError(ValueError):
    """The mesh system is singular (lossless link at k -> 1)."""


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResonantPort:
    """Series RLC tank with a real termination (source or load) resistance."""

    inductance: float
    capacitance: float
    resistance: float
    termination: float = 0.0

    def __post_init__(self):
        if self.inductance <= 0 or self.capacitance <= 0:
            raise ValueError("L and C must be > 0")
        if self.resistance < 0 or self.termination < 0:
            raise ValueError("resistances must be >= 0")

    def reactance(self, f):
        w = 2.0 * math.pi * np.asarray(f, dtype=float)
        return w * self.inductance - 1.0 / (w * self.capacitance)

    def impedance(self, f):
        """Series impedance R + jX (termination excluded)."""
        return self.resistance + 1j * self.reactance(f)


@dataclass(frozen=True)
class LinkModel:
    transmitter: ResonantPort
    receiver: ResonantPort
    mutual: float
    drive_amplitude: float = 1.0

    def __post_init__(self):
        if self.drive_amplitude <= 0:
            raise ValueError("drive_amplitude must be > 0")
        k = abs(self.mutual) / math.sqrt(
            self.transmitter.inductance * self.receiver.inductance)
        if k >= 1.0:
            raise ValueError(f"|k| = {k:.4g} must be < 1")

    @property
    def coupling(self) -> float:
        return self.mutual / math.sqrt(
            self.transmitter.inductance * self.receiver.inductance)


@dataclass(frozen=True)
class ConverterModel:
    """Inverter and rectifier lumped as two multiplicative efficiencies."""

    inverter_efficiency: float
    rectifier_efficiency: float

    def __post_init__(self):
        for v in (self.inverter_efficiency, self.rectifier_efficiency):
            if not 0.0 < v <= 1.0:
                raise ValueError("converter efficiencies must be in (0, 1]")

    @property
    def product(self) -> float:
        return self.inverter_efficiency * self.rectifier_efficiency


# Back-solved so the AC-to-AC and DC-to-DC chain maps 0.41 to 0.25.
DEFAULT_CONVERTER = ConverterModel(inverter_efficiency=0.80,
                                   rectifier_efficiency=0.25 / 0.41 / 0.80)


@dataclass
class LinkSolution:
    frequency: float
    efficiency_ac: float
    input_power: float
    delivered_power: float
    coil_loss_tx: float
    coil_loss_rx: float
    input_impedance: complex
    current_tx: complex
    current_rx: complex

    def as_dict(self) -> dict:
        return {
            "frequency_hz": self.frequency,
            "efficiency_ac": self.efficiency_ac,
            "input_power_w": self.input_power,
            "delivered_power_w": self.delivered_power,
            "coil_loss_tx_w": self.coil_loss_tx,
            "coil_loss_rx_w": self.coil_loss_rx,
            "re_zin_ohm": self.input_impedance.real,
            "im_zin_ohm": self.input_impedance.imag,
            "current_tx_a": [self.current_tx.real, self.current_tx.imag],
            "current_rx_a": [self.current_rx.real, self.current_rx.imag],
        }


# ---------------------------------------------------------------------------
# Resonance
# ---------------------------------------------------------------------------

def resonant_frequency(inductance: float, capacitance: float) -> float:
    """f = 1 / (2 pi sqrt(L C))."""
    if inductance <= 0 or capacitance <= 0:
        raise ValueError("L and C must be > 0")
    return 1.0 / (2.0 * math.pi * math.sqrt(inductance * capacitance))


def tuning_capacitance(inductance: float, frequency: float) -> float:
    """C that tunes L to the target frequency: C = 1 / ((2 pi f)^2 L)."""
    if inductance <= 0 or frequency <= 0:
        raise ValueError("L and f must be > 0")
    return 1.0 / ((2.0 * math.pi * frequency) ** 2 * inductance)


# ---------------------------------------------------------------------------
# Two-port solution
# ---------------------------------------------------------------------------

def solve_two_port(link: LinkModel, frequency: float) -> LinkSolution:
    """Solve the coupled mesh equations at one frequency."""
    if frequency <= 0:
        raise ValueError("frequency must be > 0")
    w = 2.0 * math.pi * frequency
    tx, rx = link.transmitter, link.receiver
    z1 = tx.impedance(frequency) + tx.termination
    z2 = rx.impedance(frequency) + rx.termination
    zm = 1j * w * link.mutual

    det = z1 * z2 - zm * zm
    scale = abs(z1) * abs(z2) + abs(zm) ** 2
    if abs(det) <= 1e-14 * scale:
        raise DegenerateLinkError("coupled mesh equations are singular")

    v = link.drive_amplitude
    i1 = v * z2 / det
    i2 = -v * zm / det

    zin = tx.impedance(frequency) + (w * link.mutual) ** 2 / z2
    v_port = v - i1 * tx.termination
    p_in = 0.5 * (v_port * np.conj(i1)).real
    p_out = 0.5 * abs(i2) ** 2 * rx.termination
    loss1 = 0.5 * abs(i1) ** 2 * tx.resistance
    loss2 = 0.5 * abs(i2) ** 2 * rx.resistance
    eff = p_out / p_in if p_in > 0 else 0.0
    return LinkSolution(frequency=frequency, efficiency_ac=eff,
                        input_power=p_in, delivered_power=p_out,
                        coil_loss_tx=loss1, coil_loss_rx=loss2,
                        input_impedance=complex(zin),
                        current_tx=complex(i1), current_rx=complex(i2))


def max_link_efficiency(k: float, q1: float, q2: float) -> float:
    """Optimal-load efficiency bound x/(1 + sqrt(1+x))^2 with x = k^2 Q1 Q2."""
    if not 0.0 <= k < 1.0:
        raise ValueError("k must be in [0, 1)")
    if q1 <= 0 or q2 <= 0:
        raise ValueError("quality factors must be > 0")
    x = k * k * q1 * q2
    return x / (1.0 + math.sqrt(1.0 + x)) ** 2


def optimal_load_resistance(link: LinkModel, frequency: float) -> float:
    """R_load = R2 sqrt(1 + k^2 Q1 Q2), the efficiency-optimal termination."""
    w = 2.0 * math.pi * frequency
    tx, rx = link.transmitter, link.receiver
    q1 = w * tx.inductance / tx.resistance
    q2 = w * rx.inductance / rx.resistance
    x = link.coupling ** 2 * q1 * q2
    return rx.resistance * math.sqrt(1.0 + x)


def with_load(link: LinkModel, load_resistance: float) -> LinkModel:
    return replace(link, receiver=replace(link.receiver,
                                          termination=load_resistance))


def dc_to_dc_efficiency(eta_ac: float,
                        converter: ConverterModel = DEFAULT_CONVERTER) -> float:
    """Chain the AC link efficiency through the inverter and rectifier."""
    if not 0.0 < eta_ac <= 1.0:
        raise ValueError("eta_ac must be in (0, 1]")
    return eta_ac * converter.product


# ---------------------------------------------------------------------------
# Exposure-limited power
# ---------------------------------------------------------------------------

@dataclass
class SafePowerResult:
    max_input_power_w: float
    constrained: bool
    peak_h_per_ampere: float       # A/m per ampere of transmitter current
    tx_current_per_sqrt_watt: float

    def as_dict(self) -> dict:
        return {
            "max_input_power_w": self.max_input_power_w,
            "constrained": self.constrained,
            "peak_h_per_ampere": self.peak_h_per_ampere,
            "tx_current_per_sqrt_watt": self.tx_current_per_sqrt_watt,
        }


def max_safe_power(field_per_amp: FieldMap, h_limit: float,
                   link: LinkModel, frequency: float) -> SafePowerResult:
    """Largest input power keeping peak body |H| at or below h_limit.

    Peak |H| per ampere is taken over interior and shell grid points; the
    transmitter current scales with the square root of input power at a fixed
    operating point, so the ceiling is quadratic in h_limit.
    """
    if h_limit <= 0:
        raise ValueError("h_limit must be > 0")
    labels = field_per_amp.grid.labels
    body = (labels != REGION_EXTERIOR) & ~field_per_amp.masked
    if not body.any():
        raise ValueError("field map contains no body-region points")
    h_per_amp = float(np.linalg.norm(
        field_per_amp.per_ampere()[body], axis=1).max()) / MU0

    sol = solve_two_port(link, frequency)
    if sol.input_power <= 0:
        raise DegenerateLinkError("link absorbs no power at this frequency")
    i_per_sqrt_w = abs(sol.current_tx) / math.sqrt(sol.input_power)

    if h_per_amp * i_per_sqrt_w == 0.0:
        return SafePowerResult(math.inf, False, h_per_amp, i_per_sqrt_w)
    p_max = (h_limit / (h_per_amp * i_per_sqrt_w)) ** 2
    return SafePowerResult(p_max, True, h_per_amp, i_per_sqrt_w)


# ---------------------------------------------------------------------------
# Frequency sweeps
# ---------------------------------------------------------------------------

@dataclass
class ResponseCurve:
    frequencies: np.ndarray
    efficiency: np.ndarray
    input_impedance: np.ndarray     # complex
    delivered_power: np.ndarray

    def __len__(self) -> int:
        return len(self.frequencies)


def efficiency_sweep(link: LinkModel, f_lo: float, f_hi: float,
                     points: int, log_spaced: bool = True) -> ResponseCurve:
    """solve_two_port across a (log-spaced by default) frequency grid."""
    if not 0 < f_lo < f_hi:
        raise ValueError("need 0 < f_lo < f_hi")
    if points < 2:
        raise ValueError("points must be >= 2")
    if log_spaced:
        freqs = np.geomspace(f_lo, f_hi, points)
    else:
        freqs = np.linspace(f_lo, f_hi, points)
    eff = np.empty(points)
    zin = np.empty(points, dtype=complex)
    pout = np.empty(points)
    for i, f in enumerate(freqs):
        sol = solve_two_port(link, float(f))
        eff[i] = sol.efficiency_ac
        zin[i] = sol.input_impedance
        pout[i] = sol.delivered_power
    return ResponseCurve(frequencies=freqs, efficiency=eff,
                         input_impedance=zin, delivered_power=pout)
