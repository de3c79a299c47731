"""Passive inductive telemetry: battery-free LC tags read through a coil.

A tag is a series RLC resonator whose capacitance encodes a physical value;
it loads the reader through the reflected impedance (w M)^2 / Z_tag, which
peaks sharply at the tag resonance f = 1/(2 pi sqrt(L C)).  Readout modes:

  single  -- the reader coil's input impedance is swept; tag reflections ride
             on the coil's own (large) impedance baseline
  bridge  -- two nominally identical coils form a voltage divider pair and
             serve as impedance references for each other; the differential
             output nulls the common baseline and exposes weak reflections

The divider difference drive*(Za/(Za+Zb) - Zb/(Zb+Za)) reduces to
drive*(Za - Zb)/(Za + Zb), which is what bridge_response evaluates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.signal import find_peaks

from .circuit import ResonantPort, resonant_frequency

TAG_KINDS = ("identifier", "touch", "rotation", "pressure")


class RegistryError(ValueError):
    """Invalid sensor tag or tag registry."""


# ---------------------------------------------------------------------------
# Capacitance encodings
# ---------------------------------------------------------------------------

class LinearCapacitanceMap:
    """Continuous strictly increasing map from value in [0,1] to farads."""

    def __init__(self, c_lo: float, c_hi: float):
        if not 0 < c_lo < c_hi:
            raise RegistryError("need 0 < c_lo < c_hi")
        self.c_lo, self.c_hi = float(c_lo), float(c_hi)

    def __call__(self, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("value must be in [0, 1]")
        return self.c_lo + (self.c_hi - self.c_lo) * value

    def invert(self, capacitance: float) -> float:
        v = (capacitance - self.c_lo) / (self.c_hi - self.c_lo)
        return float(min(1.0, max(0.0, v)))


class SteppedCapacitanceMap:
    """Discrete increasing capacitance levels (1 level = presence only)."""

    def __init__(self, levels: Sequence[float]):
        lv = np.asarray(levels, dtype=float)
        if len(lv) < 1 or np.any(lv <= 0):
            raise RegistryError("levels must be positive")
        if len(lv) > 1 and np.any(np.diff(lv) <= 0):
            raise RegistryError("levels must be strictly increasing")
        self.levels = lv

    def __call__(self, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("value must be in [0, 1]")
        if len(self.levels) == 1:
            return float(self.levels[0])
        idx = int(round(value * (len(self.levels) - 1)))
        return float(self.levels[idx])

    def invert(self, capacitance: float) -> float:
        if len(self.levels) == 1:
            return 0.0
        idx = int(np.argmin(np.abs(self.levels - capacitance)))
        return idx / (len(self.levels) - 1)


CapacitanceMap = Union[LinearCapacitanceMap, SteppedCapacitanceMap]


# ---------------------------------------------------------------------------
# Tags and the registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensorTag:
    tag_id: str
    kind: str
    inductance: float
    capacitance_map: CapacitanceMap
    esr: float
    band: tuple                      # (f_min, f_max) Hz
    coupling_to_reader: float = 0.01

    def __post_init__(self):
        if self.kind not in TAG_KINDS:
            raise RegistryError(f"unknown tag kind {self.kind!r}")
        if self.inductance <= 0 or self.esr <= 0:
            raise RegistryError("inductance and esr must be > 0")
        f_lo, f_hi = self.band
        if not 0 < f_lo < f_hi:
            raise RegistryError("band must satisfy 0 < f_min < f_max")
        if not 0 < abs(self.coupling_to_reader) < 1:
            raise RegistryError("coupling_to_reader must be in (0, 1)")

    @property
    def base_capacitance(self) -> float:
        return self.capacitance_map(0.0)

    def impedance(self, value: float, f) -> np.ndarray:
        w = 2.0 * math.pi * np.asarray(f, dtype=float)
        c = self.capacitance_map(value)
        return self.esr + 1j * (w * self.inductance - 1.0 / (w * c))


def tag_resonance(tag: SensorTag, value: float) -> float:
    """Resonant frequency of the tag at a given normalized sensor value."""
    return resonant_frequency(tag.inductance, tag.capacitance_map(value))


class TagRegistry:
    """Tags with pairwise disjoint frequency bands."""

    def __init__(self, tags: Sequence[SensorTag]):
        tags = list(tags)
        by_lo = sorted(tags, key=lambda t: t.band[0])
        for a, b in zip(by_lo, by_lo[1:]):
            if b.band[0] < a.band[1]:
                raise RegistryError(
                    f"bands of {a.tag_id!r} and {b.tag_id!r} overlap")
        for t in tags:
            for v in (0.0, 1.0):
                f = tag_resonance(t, v)
                if not t.band[0] <= f <= t.band[1]:
                    raise RegistryError(
                        f"tag {t.tag_id!r} resonates at {f:.4g} Hz outside "
                        f"its band at value {v}")
        self.tags = tags

    def __iter__(self):
        return iter(self.tags)

    def __len__(self):
        return len(self.tags)

    def find_band(self, frequency: float) -> Optional[SensorTag]:
        for t in self.tags:
            if t.band[0] <= frequency <= t.band[1]:
                return t
        return None


def _cap_for(frequency: float, inductance: float) -> float:
    return 1.0 / ((2.0 * math.pi * frequency) ** 2 * inductance)


def make_tag(kind: str, tag_id: str, base_frequency: float,
             inductance: float = 1e-6, esr: float = 0.5,
             shift_fraction: float = 0.21, band_pad: float = 0.02,
             coupling_to_reader: float = 0.01) -> SensorTag:
    """Tag whose resonance slides down from base_frequency as value rises.

    The capacitance grows by shift_fraction across full scale, so the
    resonance spans [f0/sqrt(1+shift), f0].
    """
    c0 = _cap_for(base_frequency, inductance)
    f_min = base_frequency / math.sqrt(1.0 + shift_fraction)
    if kind == "identifier":
        cmap = SteppedCapacitanceMap([c0])
        f_min = base_frequency
    elif kind == "touch":
        cmap = SteppedCapacitanceMap([c0, c0 * (1.0 + shift_fraction)])
    elif kind == "rotation":
        cmap = SteppedCapacitanceMap(
            [c0 * (1.0 + shift_fraction * j / 7.0) for j in range(8)])
    elif kind == "pressure":
        cmap = LinearCapacitanceMap(c0, c0 * (1.0 + shift_fraction))
    else:
        raise RegistryError(f"unknown tag kind {kind!r}")
    band = (f_min * (1.0 - band_pad), base_frequency * (1.0 + band_pad))
    return SensorTag(tag_id=tag_id, kind=kind, inductance=inductance,
                     capacitance_map=cmap, esr=esr, band=band,
                     coupling_to_reader=coupling_to_reader)


def default_tag_registry(coupling_to_reader: float = 0.01) -> TagRegistry:
    """Four tag kinds parked on separate bands (10/15/20/25 MHz)."""
    return TagRegistry([
        make_tag("identifier", "id-0", 10e6,
                 coupling_to_reader=coupling_to_reader),
        make_tag("touch", "touch-0", 15e6,
                 coupling_to_reader=coupling_to_reader),
        make_tag("rotation", "rot-0", 20e6,
                 coupling_to_reader=coupling_to_reader),
        make_tag("pressure", "press-0", 25e6,
                 coupling_to_reader=coupling_to_reader),
    ])


# ---------------------------------------------------------------------------
# Reader, bridge, responses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReaderConfig:
    coil: ResonantPort
    drive_power: float                      # W
    noise_floor_density: float              # V/sqrt(Hz) at the detector
    sweep: tuple = (8e6, 28e6, 2001)        # (f_lo, f_hi, points)
    detection_prominence_db: float = 6.0
    baseline_jitter_rel: float = 1e-3       # drive ripple coupling the baseline
    reference_impedance: float = 50.0       # ohm, power <-> amplitude scale

    def __post_init__(self):
        if self.drive_power <= 0:
            raise ValueError("drive_power must be > 0")
        f_lo, f_hi, points = self.sweep
        if not 0 < f_lo < f_hi or int(points) < 3:
            raise ValueError("sweep needs 0 < f_lo < f_hi and >= 3 points")
        if self.noise_floor_density < 0 or self.baseline_jitter_rel < 0:
            raise ValueError("noise parameters must be >= 0")

    def frequencies(self) -> np.ndarray:
        f_lo, f_hi, points = self.sweep
        return np.geomspace(f_lo, f_hi, int(points))

    def resolution_bandwidth(self) -> float:
        f_lo, f_hi, points = self.sweep
        return (f_hi - f_lo) / int(points)

    def drive_voltage(self, power: Optional[float] = None) -> float:
        p = self.drive_power if power is None else power
        return math.sqrt(2.0 * p * self.reference_impedance)

    def drive_current(self, power: Optional[float] = None) -> float:
        p = self.drive_power if power is None else power
        return math.sqrt(2.0 * p / self.reference_impedance)


@dataclass(frozen=True)
class TwinBridge:
    coil_a: ResonantPort
    coil_b: ResonantPort
    imbalance: float = 0.0       # relative mismatch applied to branch b

    def __post_init__(self):
        if self.imbalance < 0:
            raise ValueError("imbalance must be >= 0")


def _tag_mutuals(reader_inductance: float, tags, mutuals):
    if mutuals is not None:
        if len(mutuals) != len(tags):
            raise ValueError("one mutual inductance per tag required")
        return list(mutuals)
    return [t.coupling_to_reader * math.sqrt(reader_inductance * t.inductance)
            for t in tags]


def reflected_impedance(tag: SensorTag, value: float, f, mutual: float):
    """Impedance (w M)^2 / Z_tag the coupled tag adds in series at the reader."""
    w = 2.0 * math.pi * np.asarray(f, dtype=float)
    return (w * mutual) ** 2 / tag.impedance(value, f)


def _reflected_total(reader_l: float, tags, values, f, mutuals):
    if len(tags) != len(values):
        raise ValueError("tags and values must align")
    total = np.zeros_like(np.asarray(f, dtype=float), dtype=complex)
    for tag, val, m in zip(tags, values, _tag_mutuals(reader_l, tags, mutuals)):
        total = total + reflected_impedance(tag, val, f, m)
    return total


def bridge_response(bridge: TwinBridge, tags, values, f, drive: float,
                    mutuals=None):
    """Differential divider voltage; tags couple to branch a only."""
    za = bridge.coil_a.impedance(f) + bridge.coil_a.termination \
        + _reflected_total(bridge.coil_a.inductance, tags, values, f, mutuals)
    zb = (bridge.coil_b.impedance(f) + bridge.coil_b.termination) \
        * (1.0 + bridge.imbalance)
    return drive * (za - zb) / (za + zb)


def single_reader_response(coil: ResonantPort, tags, values, f, mutuals=None):
    """Input impedance of a single reader coil loaded by coupled tags [ohm]."""
    return coil.impedance(f) + coil.termination \
        + _reflected_total(coil.inductance, tags, values, f, mutuals)


# ---------------------------------------------------------------------------
# Sweeps and detection
# ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    frequencies: np.ndarray
    response: np.ndarray          # complex; V (bridge) or ohm (single)
    noise_seed: int
    mode: str                     # "bridge" | "single"
    noise_sigma: float = 0.0      # detector noise std in response units


def _noise_draws(seed: int, n: int) -> np.ndarray:
    """Counter-based complex unit-variance noise, one draw per sweep index."""
    out = np.empty(n, dtype=complex)
    for i in range(n):
        rng = np.random.Generator(np.random.Philox(key=[seed, i]))
        re, im = rng.standard_normal(2)
        out[i] = complex(re, im) / math.sqrt(2.0)
    return out


def sweep(config: ReaderConfig, system: Union[TwinBridge, ResonantPort],
          tags, values, seed: int = 0, mutuals=None) -> SweepResult:
    """Frequency sweep with additive detector noise, reproducible per seed."""
    freqs = config.frequencies()
    sigma_v = config.noise_floor_density * math.sqrt(
        config.resolution_bandwidth())
    if isinstance(system, TwinBridge):
        resp = bridge_response(system, tags, values, freqs,
                               config.drive_voltage(), mutuals)
        sigma = sigma_v
        mode = "bridge"
    else:
        resp = single_reader_response(system, tags, values, freqs, mutuals)
        sigma = sigma_v / config.drive_current()
        mode = "single"
    if sigma > 0:
        resp = resp + sigma * _noise_draws(seed, len(freqs))
    return SweepResult(frequencies=freqs, response=np.asarray(resp),
                       noise_seed=seed, mode=mode, noise_sigma=sigma)


@dataclass
class Detection:
    peak_frequency: float
    prominence_db: float
    matched_tag: Optional[str] = None
    decoded_value: Optional[float] = None


def _trace_db(result: SweepResult) -> np.ndarray:
    """Log-magnitude trace clamped at the detector sensitivity floor.

    The floor (3x the noise std) flattens noise-only regions so prominence
    thresholding does not fire on noise spikes.
    """
    floor = max(3.0 * result.noise_sigma, 1e-30)
    if result.mode == "single":
        level = np.maximum(result.response.real, floor)
    else:
        level = np.maximum(np.abs(result.response), floor)
    return 20.0 * np.log10(level)


def detect_peaks(result: SweepResult,
                 prominence_db: float = 6.0) -> list[Detection]:
    """Local maxima of the response exceeding a prominence threshold [dB].

    Peak frequencies are refined by 3-point quadratic interpolation of the
    log-magnitude on the log-frequency grid.
    """
    if len(result.frequencies) < 3:
        raise ValueError("need at least 3 sweep points")
    trace = _trace_db(result)
    idx, props = find_peaks(trace, prominence=prominence_db)
    logf = np.log(result.frequencies)
    out = []
    for i, prom in zip(idx, props["prominences"]):
        ym1, y0, yp1 = trace[i - 1], trace[i], trace[i + 1]
        denom = 2.0 * (2.0 * y0 - yp1 - ym1)
        p = (yp1 - ym1) / denom if denom != 0.0 else 0.0
        p = min(0.5, max(-0.5, p))
        step = 0.5 * (logf[i + 1] - logf[i - 1])
        out.append(Detection(peak_frequency=float(np.exp(logf[i] + p * step)),
                             prominence_db=float(prom)))
    return out


@dataclass
class Reading:
    tag_id: Optional[str]
    kind: Optional[str]
    value: Optional[float]
    peak_hz: float
    prominence_db: float

    def as_dict(self) -> dict:
        return {"tag_id": self.tag_id, "kind": self.kind, "value": self.value,
                "peak_hz": self.peak_hz, "prominence_db": self.prominence_db}


def decode(detections: Sequence[Detection],
           registry: TagRegistry) -> list[Reading]:
    """Assign detections to tag bands and invert the capacitance encoding.

    Detections outside every band are reported with tag_id None.
    """
    readings = []
    for det in detections:
        tag = registry.find_band(det.peak_frequency)
        if tag is None:
            readings.append(Reading(None, None, None, det.peak_frequency,
                                    det.prominence_db))
            continue
        c_pk = _cap_for(det.peak_frequency, tag.inductance)
        value = tag.capacitance_map.invert(c_pk)
        det.matched_tag = tag.tag_id
        det.decoded_value = value
        readings.append(Reading(tag.tag_id, tag.kind, value,
                                det.peak_frequency, det.prominence_db))
    return readings


# ---------------------------------------------------------------------------
# Drive power budget
# ---------------------------------------------------------------------------

@dataclass
class MinPowerResult:
    power_w: float
    achievable: bool
    peak_frequency: float
    snr_at_1w: float

    def as_dict(self) -> dict:
        return {"power_w": self.power_w, "achievable": self.achievable,
                "peak_frequency_hz": self.peak_frequency,
                "snr_at_1w": self.snr_at_1w}


def min_output_power(config: ReaderConfig,
                     system: Union[TwinBridge, ResonantPort],
                     tag: SensorTag, mutual: float, value: float,
                     required_snr_db: float) -> MinPowerResult:
    """Smallest drive power reaching the required peak amplitude SNR.

    One noiseless reference sweep at 1 W fixes the tag signal s and the
    common-mode baseline b in response units.  Signal scales with sqrt(P),
    additive noise is fixed, and drive ripple couples the baseline as
    jitter*b*sqrt(P), giving the closed form

        P = snr^2 sigma^2 / (s^2 - snr^2 jitter^2 b^2),

    unreachable when the ripple-limited SNR ceiling s/(jitter b) is below
    the requirement (always reachable for a nulled bridge baseline).
    """
    freqs = config.frequencies()
    volt_1w = config.drive_voltage(1.0)
    if isinstance(system, TwinBridge):
        base = bridge_response(system, [], [], freqs, volt_1w)
        loaded = bridge_response(system, [tag], [value], freqs, volt_1w,
                                 [mutual])
        sigma1 = config.noise_floor_density * math.sqrt(
            config.resolution_bandwidth())
    else:
        base = single_reader_response(system, [], [], freqs)
        loaded = single_reader_response(system, [tag], [value], freqs,
                                        [mutual])
        sigma1 = config.noise_floor_density * math.sqrt(
            config.resolution_bandwidth()) / config.drive_current(1.0)

    deviation = np.abs(loaded - base)
    i_pk = int(np.argmax(deviation))
    s1 = float(deviation[i_pk])
    b1 = float(np.abs(base[i_pk]))
    f_pk = float(freqs[i_pk])
    if s1 == 0.0:
        return MinPowerResult(math.inf, False, f_pk, 0.0)

    snr = 10.0 ** (required_snr_db / 20.0)
    jb = config.baseline_jitter_rel * b1
    snr_1w = s1 / math.hypot(sigma1, jb) if (sigma1 or jb) else math.inf
    denom = s1 * s1 - snr * snr * jb * jb
    if denom <= 0.0:
        return MinPowerResult(math.inf, False, f_pk, snr_1w)
    if sigma1 == 0.0:
        return MinPowerResult(0.0, True, f_pk, snr_1w)
    return MinPowerResult(snr * snr * sigma1 * sigma1 / denom, True, f_pk,
                          snr_1w)
