"""Deterministic file emission: CSV/JSON serializers and the output manifest.

All writes are atomic (temp file + rename) and byte-reproducible: floats are
serialized with shortest round-trip repr and JSON keys are sorted, so a rerun
with the same inputs hashes identically.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .geometry import REGION_NAMES, WirePath
from .magnetics import ConfinementStats, FieldMap
from .circuit import ResponseCurve


def _fmt(x) -> str:
    return repr(float(x))


def path_csv(path: WirePath) -> str:
    """Vertex table: x,y,z in meters, one row per vertex."""
    lines = ["x,y,z"]
    for v in path.vertices:
        lines.append(",".join(_fmt(c) for c in v))
    return "\n".join(lines) + "\n"


def field_map_csv(fm: FieldMap) -> str:
    """Field samples: x,y,z,region,Bx,By,Bz (SI units, masked rows = nan)."""
    lines = ["x,y,z,region,Bx,By,Bz"]
    b = fm.b.copy()
    b[fm.masked] = np.nan
    for p, lab, bv in zip(fm.grid.points, fm.grid.labels, b):
        lines.append(",".join([_fmt(p[0]), _fmt(p[1]), _fmt(p[2]),
                               REGION_NAMES[lab],
                               _fmt(bv[0]), _fmt(bv[1]), _fmt(bv[2])]))
    return "\n".join(lines) + "\n"


def response_curve_csv(curve: ResponseCurve) -> str:
    lines = ["frequency_hz,efficiency,re_zin,im_zin"]
    for f, e, z in zip(curve.frequencies, curve.efficiency,
                       curve.input_impedance):
        lines.append(",".join([_fmt(f), _fmt(e), _fmt(z.real), _fmt(z.imag)]))
    return "\n".join(lines) + "\n"


def sweep_csv(frequencies, response) -> str:
    lines = ["frequency_hz,re_response,im_response"]
    for f, r in zip(frequencies, response):
        lines.append(",".join([_fmt(f), _fmt(r.real), _fmt(r.imag)]))
    return "\n".join(lines) + "\n"


def confinement_stats_dict(stats: ConfinementStats) -> dict:
    out = {"threshold_db": stats.threshold_db, "regions": {}}
    for name, rr in stats.regions.items():
        out["regions"][name] = {
            "fraction_ge_threshold": rr.fraction_ge_threshold,
            "median_db": None if np.isnan(rr.median_db) else rr.median_db,
            "count": rr.count,
        }
    out["overall"] = {
        "fraction_ge_threshold": stats.overall.fraction_ge_threshold,
        "median_db": None if np.isnan(stats.overall.median_db)
        else stats.overall.median_db,
        "count": stats.overall.count,
    }
    return out


def to_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def emit_outputs(files: dict, out_dir) -> Path:
    """Write named files atomically and a manifest listing name/bytes/sha256.

    Returns the manifest path.  ``files`` maps name -> str or bytes content.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for name in sorted(files):
        data = files[name]
        if isinstance(data, str):
            data = data.encode()
        target = out / name
        fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        entries.append({"name": name, "bytes": len(data),
                        "sha256": hashlib.sha256(data).hexdigest()})
    manifest_path = out / "manifest.json"
    data = to_json({"files": entries}).encode()
    fd, tmp = tempfile.mkstemp(dir=out, prefix=".manifest.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, manifest_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return manifest_path
