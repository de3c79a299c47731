"""Command-line front end.

Subcommands:
  geom      build coil paths and export vertex CSVs
  field     evaluate field maps on the body grid (+ optional reduction stats)
  link      solve/sweep a two-port power link given circuit parameters
  pit       run a telemetry sweep, detect peaks, decode tag readings
  scenario  run a named scenario (confinement | charging | pit)
  validate  check a config file without running anything

Configs are JSON; --set key=value overrides existing dotted keys.  stdout
carries only the output manifest path, diagnostics go to stderr.  Exit codes:
0 success, 1 runtime failure, 2 usage error, 3 invalid config.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as mio
from .circuit import (LinkModel, ResonantPort, efficiency_sweep,
                      optimal_load_resistance, solve_two_port,
                      tuning_capacitance, with_load)
from .geometry import GeometryError, make_eval_grid, resample_path
from .magnetics import field_map, field_reduction_stats
from .scenarios import (ScenarioError, body_from_config, coil_from_config,
                        default_config, run_scenario)
from .telemetry import (ReaderConfig, RegistryError, TagRegistry, TwinBridge,
                        decode, default_tag_registry, detect_peaks, make_tag,
                        sweep)

log = logging.getLogger("meanderlink")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3


class ConfigError(ValueError):
    """Invalid configuration; carries the offending JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"config key '{path}': {message}")
        self.path = path


def _need(cfg: dict, path: str):
    cur = cfg
    seen = []
    for part in path.split("."):
        seen.append(part)
        if not isinstance(cur, dict) or part not in cur:
            raise ConfigError(".".join(seen), "missing required key")
        cur = cur[part]
    return cur


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply one dotted-key override; the key path must already exist."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key=value")
    key, raw = assignment.split("=", 1)
    parts = key.split(".")
    cur = cfg
    for i, part in enumerate(parts[:-1]):
        if not isinstance(cur, dict) or part not in cur:
            raise ConfigError(".".join(parts[:i + 1]),
                              "override references a missing key")
        cur = cur[part]
    leaf = parts[-1]
    if not isinstance(cur, dict) or leaf not in cur:
        raise ConfigError(key, "override references a missing key")
    try:
        cur[leaf] = json.loads(raw)
    except json.JSONDecodeError:
        cur[leaf] = raw


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(str(p), "config file not found")
    try:
        with open(p) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(p), f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(str(p), "top-level config must be an object")
    return cfg


# ---------------------------------------------------------------------------
# Subcommand helpers
# ---------------------------------------------------------------------------

def _port_from_config(cfg: dict, path: str) -> ResonantPort:
    sub = _need(cfg, path)
    l = _need(cfg, f"{path}.inductance")
    if "capacitance" in sub:
        c = sub["capacitance"]
    elif "tune_to_hz" in sub:
        c = tuning_capacitance(l, sub["tune_to_hz"])
    else:
        raise ConfigError(f"{path}.capacitance",
                          "need capacitance or tune_to_hz")
    return ResonantPort(inductance=l, capacitance=c,
                        resistance=sub.get("resistance", 0.0),
                        termination=sub.get("termination", 0.0))


def cmd_geom(cfg: dict, out_dir: Path, seed: int) -> Path:
    paths = _need(cfg, "paths")
    if not isinstance(paths, list) or not paths:
        raise ConfigError("paths", "need a non-empty list of coil entries")
    files = {}
    summary = {}
    for i, entry in enumerate(paths):
        if "name" not in entry:
            raise ConfigError(f"paths[{i}].name", "missing required key")
        name = entry["name"]
        try:
            wp = coil_from_config(entry)
        except (GeometryError, ScenarioError, KeyError) as exc:
            raise ConfigError(f"paths[{i}]", str(exc)) from exc
        if cfg.get("resample_max_segment"):
            wp = resample_path(wp, cfg["resample_max_segment"])
        files[f"{name}.csv"] = mio.path_csv(wp)
        area = wp.vector_area()
        summary[name] = {"length_m": wp.length(),
                         "vertices": int(len(wp.vertices)),
                         "closed": wp.closed,
                         "vector_area_m2": [float(a) for a in area]}
    files["report.json"] = mio.to_json({"command": "geom", "seed": seed,
                                        "version": __version__,
                                        "config": cfg, "paths": summary})
    return mio.emit_outputs(files, out_dir)


def cmd_field(cfg: dict, out_dir: Path, seed: int) -> Path:
    body = body_from_config(_need(cfg, "body"))
    grid = make_eval_grid(body, cfg.get("grid_margin", 0.04))
    current = cfg.get("current", 1.0)
    coils = _need(cfg, "coils")
    files = {}
    maps = {}
    for i, entry in enumerate(coils):
        if "name" not in entry:
            raise ConfigError(f"coils[{i}].name", "missing required key")
        try:
            wp = coil_from_config(entry)
        except (GeometryError, ScenarioError, KeyError) as exc:
            raise ConfigError(f"coils[{i}]", str(exc)) from exc
        fm = field_map(wp, current, grid)
        maps[entry["name"]] = fm
        files[f"{entry['name']}_field.csv"] = mio.field_map_csv(fm)
    report = {"command": "field", "seed": seed, "version": __version__,
              "config": cfg, "grid_points": int(len(grid))}
    if "reduction" in cfg:
        red = cfg["reduction"]
        for key in ("test", "reference"):
            if _need(red, key) not in maps:
                raise ConfigError(f"reduction.{key}", "names an unknown coil")
        stats = field_reduction_stats(maps[red["test"]],
                                      maps[red["reference"]],
                                      red.get("threshold_db", 10.0))
        files["confinement_stats.json"] = mio.to_json(
            mio.confinement_stats_dict(stats))
        report["reduction"] = mio.confinement_stats_dict(stats)
    files["report.json"] = mio.to_json(report)
    return mio.emit_outputs(files, out_dir)


def cmd_link(cfg: dict, out_dir: Path, seed: int) -> Path:
    tx = _port_from_config(cfg, "transmitter")
    rx = _port_from_config(cfg, "receiver")
    link = LinkModel(tx, rx, _need(cfg, "mutual"),
                     drive_amplitude=cfg.get("drive_amplitude", 1.0))
    files = {}
    report = {"command": "link", "seed": seed, "version": __version__,
              "config": cfg}
    if cfg.get("optimal_load_at"):
        link = with_load(link, optimal_load_resistance(
            link, cfg["optimal_load_at"]))
        report["load_resistance"] = link.receiver.termination
    if "solve_at" in cfg:
        sol = solve_two_port(link, cfg["solve_at"])
        files["link_solution.json"] = mio.to_json(sol.as_dict())
        report["solution"] = sol.as_dict()
    if "sweep" in cfg:
        sw = cfg["sweep"]
        curve = efficiency_sweep(link, _need(cfg, "sweep.f_lo"),
                                 _need(cfg, "sweep.f_hi"),
                                 int(_need(cfg, "sweep.points")),
                                 log_spaced=sw.get("log", True))
        files["response.csv"] = mio.response_curve_csv(curve)
    files["report.json"] = mio.to_json(report)
    return mio.emit_outputs(files, out_dir)


def _registry_from_config(cfg: dict) -> TagRegistry:
    tags_cfg = cfg.get("tags", "default")
    if tags_cfg == "default":
        return default_tag_registry(cfg.get("tag_coupling", 0.01))
    tags = []
    for i, t in enumerate(tags_cfg):
        try:
            tags.append(make_tag(
                kind=t["kind"], tag_id=t["tag_id"],
                base_frequency=t["base_frequency_hz"],
                inductance=t.get("inductance", 1e-6),
                esr=t.get("esr", 0.5),
                shift_fraction=t.get("shift_fraction", 0.21),
                coupling_to_reader=t.get("coupling_to_reader", 0.01)))
        except (KeyError, RegistryError) as exc:
            raise ConfigError(f"tags[{i}]", str(exc)) from exc
    return TagRegistry(tags)


def cmd_pit(cfg: dict, out_dir: Path, seed: int) -> Path:
    coil = _port_from_config(cfg, "coil")
    rc = _need(cfg, "reader")
    reader = ReaderConfig(
        coil=coil,
        drive_power=_need(cfg, "reader.drive_power_w"),
        noise_floor_density=rc.get("noise_floor_density_v_per_rthz", 0.0),
        sweep=tuple(rc.get("sweep", (8e6, 28e6, 2001))),
        detection_prominence_db=rc.get("detection_prominence_db", 6.0),
        baseline_jitter_rel=rc.get("baseline_jitter_rel", 1e-3),
        reference_impedance=rc.get("reference_impedance", 50.0))
    registry = _registry_from_config(cfg)
    if cfg.get("mode", "bridge") == "bridge":
        system = TwinBridge(coil, coil,
                            imbalance=cfg.get("bridge_imbalance", 0.0))
    else:
        system = coil
    values_cfg = cfg.get("values", {})
    tags = list(registry)
    values = [values_cfg.get(t.tag_id, 0.0) for t in tags]
    result = sweep(reader, system, tags, values, seed=seed)
    detections = detect_peaks(result, reader.detection_prominence_db)
    readings = decode(detections, registry)
    files = {
        "sweep.csv": mio.sweep_csv(result.frequencies, result.response),
        "readings.json": mio.to_json([r.as_dict() for r in readings]),
        "report.json": mio.to_json({
            "command": "pit", "seed": seed, "version": __version__,
            "config": cfg, "mode": result.mode,
            "detections": len(detections),
            "readings": [r.as_dict() for r in readings]}),
    }
    return mio.emit_outputs(files, out_dir)


def cmd_scenario(cfg: dict, out_dir: Path, seed: int) -> Path:
    cfg["seed"] = seed
    run_scenario(cfg, out_dir)
    return out_dir / "manifest.json"


def validate_config(cfg: dict) -> str:
    """Dry-check a config file; returns the detected schema name."""
    if "kind" in cfg:
        kind = cfg["kind"]
        if kind not in ("confinement", "charging", "pit"):
            raise ConfigError("kind", f"unknown scenario kind {kind!r}")
        defaults = default_config(kind)
        for key in defaults:
            if key in ("seed", "notes", "calibrated_from_paper"):
                continue
            if key not in cfg:
                raise ConfigError(key, "missing required key "
                                       f"for {kind} scenario")
        for name in ("meander", "helical", "transmitter", "receiver", "coil"):
            if name in cfg and isinstance(cfg[name], dict):
                try:
                    coil_from_config(cfg[name])
                except (GeometryError, ScenarioError, KeyError) as exc:
                    raise ConfigError(name, str(exc)) from exc
        return f"scenario:{kind}"
    if "paths" in cfg:
        for i, entry in enumerate(_need(cfg, "paths")):
            if "name" not in entry:
                raise ConfigError(f"paths[{i}].name", "missing required key")
            try:
                coil_from_config(entry)
            except (GeometryError, ScenarioError, KeyError) as exc:
                raise ConfigError(f"paths[{i}]", str(exc)) from exc
        return "geom"
    if "coils" in cfg:
        body_from_config(_need(cfg, "body"))
        for i, entry in enumerate(cfg["coils"]):
            try:
                coil_from_config(entry)
            except (GeometryError, ScenarioError, KeyError) as exc:
                raise ConfigError(f"coils[{i}]", str(exc)) from exc
        return "field"
    if "transmitter" in cfg and "mutual" in cfg:
        _port_from_config(cfg, "transmitter")
        _port_from_config(cfg, "receiver")
        return "link"
    if "reader" in cfg:
        _port_from_config(cfg, "coil")
        _registry_from_config(cfg)
        return "pit"
    raise ConfigError("(top level)", "config matches no known schema")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {"geom": cmd_geom, "field": cmd_field, "link": cmd_link,
             "pit": cmd_pit, "scenario": cmd_scenario}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meanderlink",
        description="Body-scale meander coil link and telemetry simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("geom", "field", "link", "pit", "scenario", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--set", action="append", default=[], metavar="K=V",
                       dest="overrides", help="dotted-key config override")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        for assignment in args.overrides:
            apply_override(cfg, assignment)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        if args.command == "validate":
            schema = validate_config(cfg)
            log.info("config ok (%s)", schema)
            return EXIT_OK
        if args.command == "scenario":
            validate_config(cfg)
        manifest = _COMMANDS[args.command](cfg, Path(args.out), seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScenarioError, GeometryError, RegistryError, KeyError) as exc:
        print(f"error: invalid config: {exc!r}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:                      # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return EXIT_RUNTIME
    print(manifest)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
