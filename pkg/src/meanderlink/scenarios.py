"""Reproducible end-to-end scenario harnesses.

Three named scenarios mirror the headline behaviors of the body-scale
meander coil:

  confinement  -- meander ring versus a same-footprint solenoid-style coil
                  on the body cylinder: field maps, per-region reduction
                  statistics, and far-field decay slopes
  charging     -- 6.78 MHz power link from the body coil to a small receiver
                  swept over surface placements: efficiency, coverage, and
                  the exposure-limited transmit ceiling
  pit          -- twin-bridge passive telemetry: four-tag sweep, decoding,
                  Monte-Carlo value error, and the minimum drive power

Calibration constants that back-solve published operating points live in the
scenario configs (flagged "calibrated_from_paper"), never in library code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .geometry import (BodyModel, ConductorMaterial, HelicalSpec,
                       LIQUID_METAL_THREAD, STANDARD_THREAD, COPPER_WIRE,
                       LoopSpec, MeanderSpec, WirePath, build_cylindrical_helix,
                       build_helical_path, build_loop_path, build_meander_path,
                       build_meander_ring, coverage_fraction, make_eval_grid,
                       resample_path, REGION_SHELL)
from .magnetics import (ac_resistance, coupling_coefficient, decay_slope,
                        distance_to_path, field_map, field_reduction_stats,
                        mutual_inductance, quality_factor, self_inductance)
from .circuit import (ConverterModel, DEFAULT_CONVERTER, LinkModel,
                      ResonantPort, dc_to_dc_efficiency, max_link_efficiency,
                      max_safe_power, optimal_load_resistance,
                      resonant_frequency, solve_two_port, tuning_capacitance,
                      with_load)
from .telemetry import (ReaderConfig, TwinBridge, decode, default_tag_registry,
                        detect_peaks, min_output_power, sweep, tag_resonance)
from . import io as mio


class ScenarioError(ValueError):
    """Scenario configuration problem."""


# ---------------------------------------------------------------------------
# Config-driven builders (shared with the CLI)
# ---------------------------------------------------------------------------

_MATERIALS = {
    "liquid_metal": LIQUID_METAL_THREAD,
    "standard_thread": STANDARD_THREAD,
    "copper": COPPER_WIRE,
}


def material_from_config(cfg) -> ConductorMaterial:
    if isinstance(cfg, str):
        try:
            return _MATERIALS[cfg]
        except KeyError:
            raise ScenarioError(f"unknown material {cfg!r}; options: "
                                f"{sorted(_MATERIALS)}") from None
    return ConductorMaterial(cfg.get("name", "custom"),
                             cfg["resistivity"], cfg["wire_radius"])


def coil_from_config(cfg: dict) -> WirePath:
    """Build a wire path from a scenario/CLI coil description."""
    kind = cfg.get("type")
    mat = material_from_config(cfg.get("material", "liquid_metal"))
    if kind == "meander":
        spec = MeanderSpec(cfg["footprint_width"], cfg["footprint_height"],
                           cfg["lobe_count"], cfg.get("turns_per_lobe", 1),
                           cfg.get("lobe_spacing", 0.01),
                           cfg.get("standoff", 5e-3), mat)
        return build_meander_path(spec)
    if kind == "helical":
        spec = HelicalSpec(cfg["footprint_width"], cfg["footprint_height"],
                           cfg["turns"], cfg.get("turn_spacing", 2e-3),
                           cfg.get("standoff", 5e-3), mat)
        return build_helical_path(spec)
    if kind == "loop":
        spec = LoopSpec(cfg["shape"], cfg["size"], cfg.get("turns", 1),
                        cfg.get("turn_spacing", 1e-3), mat)
        return build_loop_path(spec)
    if kind == "meander_ring":
        radius = cfg["body_radius"] + cfg.get("standoff", 5e-3)
        spacing = cfg.get("lobe_spacing", 8e-3)
        spec = MeanderSpec(2.0 * math.pi * radius - spacing,
                           cfg["band_height"], cfg["lobe_count"],
                           cfg.get("turns_per_lobe", 1), spacing,
                           cfg.get("standoff", 5e-3), mat)
        return build_meander_ring(spec, radius, cfg.get("z_center", 0.0),
                                  cfg.get("wrap_max_segment", 0.012),
                                  cfg.get("band_gap", 6e-3))
    if kind == "cylindrical_helix":
        radius = cfg["body_radius"] + cfg.get("standoff", 5e-3)
        return build_cylindrical_helix(radius, cfg["turns"],
                                       cfg["turn_spacing"],
                                       cfg.get("z_center", 0.0), mat,
                                       cfg.get("wrap_max_segment", 0.012))
    raise ScenarioError(f"unknown coil type {kind!r}")


def body_from_config(cfg: dict) -> BodyModel:
    return BodyModel(radius=cfg.get("radius", 0.15),
                     height=cfg.get("height", 0.6),
                     grid_resolution=cfg.get("grid_resolution", 0.01),
                     shell_thickness=cfg.get("shell_thickness", 0.01))


def place_on_cylinder(path: WirePath, phi: float, z: float,
                      radial: float) -> WirePath:
    """Move a flat coil (normal +z) onto the tangent plane of a cylinder."""
    nr = np.array([math.cos(phi), math.sin(phi), 0.0])
    t_az = np.array([-math.sin(phi), math.cos(phi), 0.0])
    t_ax = np.array([0.0, 0.0, 1.0])
    rot = np.column_stack([t_az, t_ax, nr])
    return path.transformed(rot, nr * radial + np.array([0.0, 0.0, z]))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ScenarioReport:
    kind: str
    metrics: dict
    config: dict
    seed: int
    version: str = __version__
    artifacts: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "metrics": self.metrics,
                "config": self.config, "seed": self.seed,
                "version": self.version, "artifacts": sorted(self.artifacts)}


@dataclass
class ScenarioResult:
    report: ScenarioReport
    data: dict


# ---------------------------------------------------------------------------
# Default configs (the calibrated stand-ins for the published prototypes)
# ---------------------------------------------------------------------------

def default_config(kind: str) -> dict:
    if kind == "confinement":
        return {
            "kind": "confinement",
            "seed": 0,
            "calibrated_from_paper": True,
            "notes": ("Desk-scale stand-in: prototype lobe dimensions and "
                      "the reference helical turn count are unpublished, so "
                      "these are chosen to reproduce the confinement "
                      "statistic qualitatively."),
            "body": {"radius": 0.15, "height": 0.6, "grid_resolution": 0.01,
                     "shell_thickness": 0.01},
            "grid_margin": 0.04,
            "meander": {"type": "meander_ring", "body_radius": 0.15,
                        "standoff": 0.005, "band_height": 0.26,
                        "lobe_count": 20, "lobe_spacing": 0.008,
                        "z_center": 0.3, "material": "liquid_metal",
                        "wrap_max_segment": 0.012},
            "helical": {"type": "cylindrical_helix", "body_radius": 0.15,
                        "standoff": 0.005, "turns": 12,
                        "turn_spacing": 0.046, "z_center": 0.3,
                        "material": "liquid_metal",
                        "wrap_max_segment": 0.012},
            "drive_current": 1.0,
            "normalization": "equal_current",
            "normalization_frequency_hz": 6.78e6,
            "threshold_db": 10.0,
            "decay": {"direction": [1.0, 0.0, 0.0], "r_lo": 1.2, "r_hi": 12.0,
                      "points": 25},
        }
    if kind == "charging":
        return {
            "kind": "charging",
            "seed": 0,
            "calibrated_from_paper": True,
            "notes": ("Receiver turns and gap calibrated so the best "
                      "placement lands near the published 41%/25% "
                      "efficiency chain at 6.78 MHz.  The exposure limit is "
                      "a localized-field stand-in chosen so the ceiling "
                      "falls in the published tens-of-watts range; the "
                      "whole-body-average reference level would be far "
                      "more conservative against a pointwise peak."),
            "frequency_hz": 6.78e6,
            "transmitter": {"type": "meander_ring", "body_radius": 0.15,
                            "standoff": 0.005, "band_height": 0.26,
                            "lobe_count": 20, "lobe_spacing": 0.008,
                            "z_center": 0.3, "material": "liquid_metal",
                            "wrap_max_segment": 0.012},
            "receiver": {"type": "loop", "shape": "square", "size": 0.04,
                         "turns": 3, "turn_spacing": 0.0012,
                         "material": "copper"},
            "receiver_gap": 0.006,
            "placement": {"surface_spacing": 0.05, "z_lo": 0.08,
                          "z_hi": 0.52, "refine_levels": 2},
            "mutual_max_segment": 0.004,
            "inductance_max_segment": 0.004,
            "drive_amplitude": 10.0,
            "source_resistance": 0.0,
            "converter": {"inverter_efficiency": 0.80,
                          "rectifier_efficiency": 0.25 / 0.41 / 0.80},
            "coverage_eta_dc_floor": 0.05,
            "exposure": {"grid_resolution": 0.015, "grid_margin": 0.02,
                         "h_limit_a_per_m": 50.0,
                         "limit_note": ("Localized H stand-in calibrated to "
                                        "the published exposure-limited "
                                        "ceiling; ICNIRP-2020 whole-body "
                                        "reference levels are averages, not "
                                        "pointwise bounds.")},
        }
    if kind == "pit":
        return {
            "kind": "pit",
            "seed": 0,
            "calibrated_from_paper": True,
            "notes": ("Tag coupling and the reader noise floor are "
                      "calibrated so the required drive power lands in the "
                      "published microwatt range, three orders below the "
                      "configured NFC activation floor."),
            "coil": {"type": "meander_ring", "body_radius": 0.15,
                     "standoff": 0.005, "band_height": 0.26,
                     "lobe_count": 20, "lobe_spacing": 0.008,
                     "z_center": 0.3, "material": "standard_thread",
                     "wrap_max_segment": 0.012},
            "inductance_max_segment": 0.004,
            "tune_frequency_hz": 17.0e6,
            "bridge_imbalance": 1e-3,
            "tag_coupling": 0.01,
            "reader": {"drive_power_w": 1e-3,
                       "noise_floor_density_v_per_rthz": 1.6e-6,
                       "sweep": [8e6, 28e6, 2001],
                       "detection_prominence_db": 6.0,
                       "baseline_jitter_rel": 1e-3,
                       "reference_impedance": 50.0},
            "truth_values": {"id-0": 0.0, "touch-0": 1.0,
                             "rot-0": 0.7142857142857143,
                             "press-0": 0.37},
            "required_snr_db": 20.0,
            "mc_sweeps": 100,
            "mc_value_grid": 11,
            "nfc_activation_floor_mw": 150.0,
        }
    raise ScenarioError(f"unknown scenario kind {kind!r}")


# ---------------------------------------------------------------------------
# Confinement
# ---------------------------------------------------------------------------

def run_confinement(config: dict) -> ScenarioResult:
    body = body_from_config(config["body"])
    grid = make_eval_grid(body, config.get("grid_margin", 0.04))
    meander = coil_from_config(config["meander"])
    helical = coil_from_config(config["helical"])

    current = float(config.get("drive_current", 1.0))
    i_meander = i_helical = current
    if config.get("normalization", "equal_current") == "equal_power":
        f_norm = config.get("normalization_frequency_hz", 6.78e6)
        r_m = ac_resistance(meander, f_norm)
        r_h = ac_resistance(helical, f_norm)
        i_helical = current * math.sqrt(r_m / r_h)

    fm_meander = field_map(meander, i_meander, grid)
    fm_helical = field_map(helical, i_helical, grid)
    threshold = float(config.get("threshold_db", 10.0))
    stats = field_reduction_stats(fm_meander, fm_helical, threshold)

    # where does the strong meander field live: fraction of the top-decile
    # shell samples lying within 1 cm of the conductor
    shell = (grid.labels == REGION_SHELL) & ~fm_meander.masked
    mags = fm_meander.magnitudes()[shell]
    top = mags >= np.quantile(mags, 0.9)
    dist = distance_to_path(grid.points[shell][top], meander)
    shell_confinement = float((dist <= 0.01).mean())

    dec = config["decay"]
    origin = np.array([0.0, 0.0, config["meander"].get("z_center", 0.0)])
    slope_m = decay_slope(meander, i_meander, origin, dec["direction"],
                          dec["r_lo"], dec["r_hi"], dec.get("points", 25))
    slope_h = decay_slope(helical, i_helical, origin, dec["direction"],
                          dec["r_lo"], dec["r_hi"], dec.get("points", 25))

    tag = f"{threshold:g}db"
    metrics = {
        f"frac_ge_{tag}_interior":
            stats.regions["interior"].fraction_ge_threshold,
        f"frac_ge_{tag}_shell": stats.regions["shell"].fraction_ge_threshold,
        f"frac_ge_{tag}_exterior":
            stats.regions["exterior"].fraction_ge_threshold,
        "median_reduction_interior_db": stats.regions["interior"].median_db,
        "median_reduction_shell_db": stats.regions["shell"].median_db,
        "shell_confinement_frac": shell_confinement,
        "decay_slope_meander": slope_m,
        "decay_slope_helical": slope_h,
        "decay_slope_difference": slope_h - slope_m,
    }
    report = ScenarioReport(kind="confinement", metrics=metrics,
                            config=config, seed=int(config.get("seed", 0)))
    data = {"meander_field": fm_meander, "helical_field": fm_helical,
            "stats": stats, "meander_path": meander, "helical_path": helical}
    return ScenarioResult(report=report, data=data)


# ---------------------------------------------------------------------------
# Charging
# ---------------------------------------------------------------------------

def run_charging(config: dict) -> ScenarioResult:
    f0 = float(config["frequency_hz"])
    tx_cfg = config["transmitter"]
    tx_path = coil_from_config(tx_cfg)
    quad = config.get("inductance_max_segment", 0.004)
    l1 = self_inductance(tx_path, max_segment=quad, estimate_error=False).value
    r1 = ac_resistance(tx_path, f0)
    c1 = tuning_capacitance(l1, f0)
    q1 = quality_factor(l1, r1, f0)

    rx_path = coil_from_config(config["receiver"])
    l2 = self_inductance(rx_path, max_segment=0.002,
                         estimate_error=False).value
    r2 = ac_resistance(rx_path, f0)
    c2 = tuning_capacitance(l2, f0)
    q2 = quality_factor(l2, r2, f0)

    converter = ConverterModel(**config["converter"]) \
        if "converter" in config else DEFAULT_CONVERTER

    radius = tx_cfg["body_radius"] + tx_cfg.get("standoff", 5e-3)
    r_place = radius + config.get("receiver_gap", 0.004)
    placement = config["placement"]
    spacing = placement.get("surface_spacing", 0.05)
    # one extra azimuthal step so the lattice does not phase-lock to the
    # lobe pitch and sample every lobe at the same unfavorable offset
    n_phi = max(4, int(round(2.0 * math.pi * r_place / spacing)) + 1)
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    zs = np.arange(placement["z_lo"], placement["z_hi"] + 1e-12, spacing)

    m_seg = config.get("mutual_max_segment", 0.004)
    tx_fine = resample_path(tx_path, m_seg)

    def placement_link(phi, z):
        placed = place_on_cylinder(rx_path, float(phi), float(z), r_place)
        m = mutual_inductance(tx_fine, placed, max_segment=m_seg,
                              estimate_error=False).value
        k = coupling_coefficient(m, l1, l2)
        eta_ac = max_link_efficiency(abs(k), q1, q2)
        return (float(phi), float(z), m, k, eta_ac,
                eta_ac * converter.product)

    rows = [placement_link(phi, z) for z in zs for phi in phis]
    table = np.array(rows)

    floor = float(config.get("coverage_eta_dc_floor", 0.10))
    coverage = float((table[:, 5] >= floor).mean())

    # refine the best placement locally (the lattice is deliberately coarse)
    best_row = tuple(table[int(np.argmax(table[:, 4]))])
    step = spacing / 2.0
    for _ in range(int(placement.get("refine_levels", 2))):
        phi0, z0 = best_row[0], best_row[1]
        for dphi in (-step / r_place, 0.0, step / r_place):
            for dz in (-step, 0.0, step):
                if dphi == 0.0 and dz == 0.0:
                    continue
                cand = placement_link(phi0 + dphi, z0 + dz)
                if cand[4] > best_row[4]:
                    best_row = cand
        step /= 2.0

    eta_ac_best = float(best_row[4])
    eta_dc_best = float(best_row[5])
    m_best = float(best_row[2])

    # mesh-solution crosscheck at the best placement with the optimal load
    tx_port = ResonantPort(l1, c1, r1,
                           termination=config.get("source_resistance", 0.0))
    rx_port = ResonantPort(l2, c2, r2)
    link = LinkModel(tx_port, rx_port, m_best,
                     drive_amplitude=config.get("drive_amplitude", 10.0))
    link = with_load(link, optimal_load_resistance(link, f0))
    sol = solve_two_port(link, f0)

    # knitted-thread variant of the same geometry: the resistivity contrast
    # alone collapses the link efficiency
    knit_path = WirePath(tx_path.vertices, tx_path.closed, STANDARD_THREAD)
    r1_knit = ac_resistance(knit_path, f0)
    q1_knit = quality_factor(l1, r1_knit, f0)
    eta_knit = max_link_efficiency(abs(best_row[3]), q1_knit, q2)

    # exposure ceiling
    exposure = config["exposure"]
    body = body_from_config({**config.get("body", {}),
                             "grid_resolution": exposure["grid_resolution"]})
    exp_grid = make_eval_grid(body, exposure.get("grid_margin", 0.02))
    fm = field_map(tx_path, 1.0, exp_grid)
    safe = max_safe_power(fm, exposure["h_limit_a_per_m"], link, f0)

    rx_area = config["receiver"]["size"] ** 2
    coil_area = tx_cfg["band_height"] * 2.0 * (2.0 * math.pi * radius)

    metrics = {
        "tx_inductance_h": l1,
        "tx_resistance_ohm": r1,
        "tx_q": q1,
        "rx_inductance_h": l2,
        "rx_q": q2,
        "tuning_capacitance_f": c1,
        "eta_ac_best": eta_ac_best,
        "eta_dc_best": eta_dc_best,
        "eta_ac_best_mesh": sol.efficiency_ac,
        "eta_ac_knitted": eta_knit,
        "k_best": float(abs(best_row[3])),
        "coverage_frac_eta_ge_threshold": coverage,
        "coverage_eta_dc_floor": floor,
        "p_max_exposure_w": safe.max_input_power_w,
        "peak_h_per_ampere": safe.peak_h_per_ampere,
        "receiver_coverage_fraction": coverage_fraction(rx_area, coil_area),
        "placement_count": float(len(table)),
    }
    report = ScenarioReport(kind="charging", metrics=metrics, config=config,
                            seed=int(config.get("seed", 0)))
    data = {"placements": table, "link_solution": sol, "safe_power": safe,
            "tx_path": tx_path, "rx_path": rx_path, "exposure_map": fm}
    return ScenarioResult(report=report, data=data)


# ---------------------------------------------------------------------------
# Passive inductive telemetry
# ---------------------------------------------------------------------------

def _value_tolerance(kind: str) -> float:
    if kind == "touch":
        return 0.49
    if kind == "rotation":
        return 0.5 / 7.0
    if kind == "identifier":
        return 1.0          # presence only
    return 0.05


def run_pit(config: dict) -> ScenarioResult:
    seed = int(config.get("seed", 0))
    coil_path = coil_from_config(config["coil"])
    quad = config.get("inductance_max_segment", 0.004)
    l1 = self_inductance(coil_path, max_segment=quad,
                         estimate_error=False).value
    f_tune = float(config.get("tune_frequency_hz", 17e6))
    c1 = tuning_capacitance(l1, f_tune)
    r1 = ac_resistance(coil_path, f_tune)
    coil = ResonantPort(l1, c1, r1)
    bridge = TwinBridge(coil, coil,
                        imbalance=config.get("bridge_imbalance", 0.0))

    registry = default_tag_registry(config.get("tag_coupling", 0.01))
    rc = config["reader"]
    reader = ReaderConfig(
        coil=coil,
        drive_power=rc["drive_power_w"],
        noise_floor_density=rc["noise_floor_density_v_per_rthz"],
        sweep=tuple(rc["sweep"]),
        detection_prominence_db=rc.get("detection_prominence_db", 6.0),
        baseline_jitter_rel=rc.get("baseline_jitter_rel", 1e-3),
        reference_impedance=rc.get("reference_impedance", 50.0))

    truth = config["truth_values"]
    tags = list(registry)
    values = [truth[t.tag_id] for t in tags]

    # headline sweep and decode at the configured drive power
    result = sweep(reader, bridge, tags, values, seed=seed)
    detections = detect_peaks(result, reader.detection_prominence_db)
    readings = decode(detections, registry)

    ok = 0
    for t, v in zip(tags, values):
        got = [r for r in readings if r.tag_id == t.tag_id]
        if len(got) == 1 and abs(got[0].value - v) <= _value_tolerance(t.kind):
            ok += 1
    success = ok / len(tags)

    # minimum drive power for the required SNR, probed with the pressure tag
    press = next(t for t in tags if t.kind == "pressure")
    m_tag = press.coupling_to_reader * math.sqrt(l1 * press.inductance)
    snr_db = float(config.get("required_snr_db", 20.0))
    minp = min_output_power(reader, bridge, press, m_tag, 0.5, snr_db)

    # Monte-Carlo pressure decoding at exactly the required peak SNR
    mc_n = int(config.get("mc_sweeps", 100))
    grid_n = int(config.get("mc_value_grid", 11))
    value_grid = np.linspace(0.0, 1.0, grid_n)
    mc_reader = ReaderConfig(
        coil=coil, drive_power=max(minp.power_w, 1e-12),
        noise_floor_density=reader.noise_floor_density,
        sweep=reader.sweep,
        detection_prominence_db=reader.detection_prominence_db,
        baseline_jitter_rel=reader.baseline_jitter_rel,
        reference_impedance=reader.reference_impedance)
    errors = []
    misses = 0
    for i in range(mc_n):
        v = float(value_grid[i % grid_n])
        vals = [v if t.kind == "pressure" else truth[t.tag_id] for t in tags]
        res = sweep(mc_reader, bridge, tags, vals, seed=seed + 1 + i)
        got = [r for r in decode(detect_peaks(
            res, mc_reader.detection_prominence_db), registry)
            if r.tag_id == press.tag_id]
        if len(got) != 1:
            misses += 1
            continue
        errors.append(got[0].value - v)
    rmse = float(np.sqrt(np.mean(np.square(errors)))) if errors else math.inf

    floor_mw = float(config.get("nfc_activation_floor_mw", 150.0))
    min_uw = minp.power_w * 1e6
    metrics = {
        "bridge_inductance_h": l1,
        "bridge_resistance_ohm": r1,
        "decode_success_rate": success,
        "detection_count": float(len(detections)),
        "value_rmse": rmse,
        "mc_miss_count": float(misses),
        "min_power_uw": min_uw,
        "min_power_achievable": float(minp.achievable),
        "nfc_activation_floor_mw": floor_mw,
        "nfc_to_pit_power_ratio": (floor_mw * 1e-3) / minp.power_w,
    }
    report = ScenarioReport(kind="pit", metrics=metrics, config=config,
                            seed=seed)
    data = {"sweep": result, "detections": detections, "readings": readings,
            "registry": registry, "bridge": bridge, "reader": reader,
            "min_power": minp}
    return ScenarioResult(report=report, data=data)


# ---------------------------------------------------------------------------
# Dispatch and emission
# ---------------------------------------------------------------------------

_RUNNERS = {"confinement": run_confinement, "charging": run_charging,
            "pit": run_pit}


def run_scenario(config: dict, out_dir=None) -> ScenarioResult:
    """Run a named scenario; if out_dir is given, emit artifacts + report."""
    kind = config.get("kind")
    if kind not in _RUNNERS:
        raise ScenarioError(f"unknown scenario kind {kind!r}")
    result = _RUNNERS[kind](config)
    if out_dir is not None:
        emit_scenario(result, out_dir)
    return result


def _placements_csv(table: np.ndarray) -> str:
    lines = ["phi_rad,z_m,mutual_h,k,eta_ac,eta_dc"]
    for row in table:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def emit_scenario(result: ScenarioResult, out_dir) -> None:
    rep = result.report
    files = {}
    if rep.kind == "confinement":
        files["meander_field.csv"] = mio.field_map_csv(
            result.data["meander_field"])
        files["helical_field.csv"] = mio.field_map_csv(
            result.data["helical_field"])
        files["confinement_stats.json"] = mio.to_json(
            mio.confinement_stats_dict(result.data["stats"]))
    elif rep.kind == "charging":
        files["placements.csv"] = _placements_csv(result.data["placements"])
        files["link_best.json"] = mio.to_json(
            result.data["link_solution"].as_dict())
        files["safe_power.json"] = mio.to_json(
            result.data["safe_power"].as_dict())
    elif rep.kind == "pit":
        sw = result.data["sweep"]
        files["sweep.csv"] = mio.sweep_csv(sw.frequencies, sw.response)
        files["readings.json"] = mio.to_json(
            [r.as_dict() for r in result.data["readings"]])
        files["min_power.json"] = mio.to_json(
            result.data["min_power"].as_dict())
    rep.artifacts = sorted(files) + ["report.json"]
    files["report.json"] = mio.to_json(rep.as_dict())
    mio.emit_outputs(files, out_dir)
