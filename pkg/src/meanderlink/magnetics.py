"""Quasi-static field evaluation and inductance extraction for wire paths.

The magnetic model is magnetostatic per frequency: the body does not perturb
the field, it only defines where the field is evaluated.  At the operating
frequencies here (MHz) the free-space wavelength is tens of meters, so
radiation and retardation are ignored.

Field kernel: the field of each straight polyline segment is evaluated with
its exact closed form, so discretization error is purely geometric (how well
chords approximate curves).  Inductances use Neumann double sums over
resampled segments, with analytic handling of the singular self and
shared-vertex terms.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .geometry import EvalGrid, REGION_NAMES, WirePath, resample_path

MU0 = 4.0 * math.pi * 1e-7      # vacuum permeability [H/m]
DB_FLOOR_TESLA = 1e-18          # below this, magnitudes are indistinguishable from 0


class PointInsideConductorError(ValueError):
    """Field requested inside the wire cross-section."""


class OverlappingConductorsError(ValueError):
    """Conductors closer than the sum of their wire radii."""


class OpenPathError(ValueError):
    """Operation requires a closed conductor loop."""


class GridMismatchError(ValueError):
    """Field maps were sampled on different grids."""


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("MEANDER_LINK_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Biot-Savart
# ---------------------------------------------------------------------------

def _segment_field_sum(starts, vecs, points):
    """Sum of exact per-segment kernels at each point, in units of (mu0 I/4pi).

    For a segment A->B and field point P, with a = B-A, b = B-P, c = A-P:

        B = (c x a) / |c x a|^2 * (a.b/|b| - a.c/|c|)

    Points collinear with a segment's line receive zero from that segment.
    Also returns the squared distance from each point to the nearest segment.
    """
    A = starts[:, None, :]
    a = vecs[:, None, :]
    c = A - points[None, :, :]

    cxa = np.cross(c, a)
    denom = np.einsum("ijk,ijk->ij", cxa, cxa)
    nc2 = np.einsum("ijk,ijk->ij", c, c)
    a_dot_c = np.einsum("ijk,ijk->ij", a, c)
    la2 = np.einsum("ij,ij->i", vecs, vecs)[:, None]
    # b = c + a, so |b|^2 and a.b follow without another (n, m, 3) temp
    nb2 = nc2 + 2.0 * a_dot_c + la2
    a_dot_b = a_dot_c + la2

    tiny = 1e-30
    # collinear (or on-vertex) guard: kernel limit is zero off the conductor
    bad = denom <= 1e-24 * la2 * np.maximum(nb2, nc2)
    with np.errstate(divide="ignore", invalid="ignore"):
        scal = (a_dot_b / np.sqrt(np.maximum(nb2, tiny))
                - a_dot_c / np.sqrt(np.maximum(nc2, tiny))) \
            / np.maximum(denom, tiny)
    scal[bad] = 0.0
    field = np.einsum("ijk,ij->jk", cxa, scal)

    # distance to nearest segment (for conductor-interior masking)
    t = np.clip(-a_dot_c / la2, 0.0, 1.0)
    d2 = (nc2 + t * (2.0 * a_dot_c + t * la2)).min(axis=0)
    return field, d2


def _paths_as_list(path_or_paths):
    if isinstance(path_or_paths, WirePath):
        return [path_or_paths]
    paths = list(path_or_paths)
    if not paths:
        raise ValueError("need at least one path")
    return paths


def biot_savart_at(path, current: float, point) -> np.ndarray:
    """Magnetic flux density vector [T] at one point outside the conductor."""
    paths = _paths_as_list(path)
    p = np.asarray(point, dtype=float).reshape(1, 3)
    total = np.zeros(3)
    for wp in paths:
        field, d2 = _segment_field_sum(wp.segment_starts, wp.segment_vectors, p)
        if d2[0] < wp.material.wire_radius ** 2:
            raise PointInsideConductorError(
                f"point {point} lies within the wire radius of the conductor")
        total += field[0]
    return 1e-7 * current * total     # mu0/(4 pi) = 1e-7


@dataclass
class FieldMap:
    """B sampled on a labeled grid at a given drive current."""

    grid: EvalGrid
    b: np.ndarray                # (n, 3) tesla
    source_current: float
    masked: np.ndarray           # (n,) True where inside a conductor

    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.b, axis=1)

    def per_ampere(self) -> np.ndarray:
        return self.b / self.source_current


def field_map(path, current: float, grid: EvalGrid,
              chunk_size: int = 2048) -> FieldMap:
    """Evaluate B on every grid point; conductor-interior points are masked.

    Accepts one path or a sequence of paths (fields superpose).  Summation
    order per point is fixed, so results are independent of threading.
    """
    if len(grid) == 0:
        raise ValueError("empty evaluation grid")
    paths = _paths_as_list(path)
    pts = grid.points
    n = len(pts)
    out = np.zeros((n, 3))
    d2min = np.full(n, np.inf)

    chunks = [(i, min(i + chunk_size, n)) for i in range(0, n, chunk_size)]

    def run_chunk(bounds):
        lo, hi = bounds
        acc = np.zeros((hi - lo, 3))
        d2 = np.full(hi - lo, np.inf)
        for wp in paths:
            f, d = _segment_field_sum(wp.segment_starts, wp.segment_vectors,
                                      pts[lo:hi])
            acc += f
            d2 = np.minimum(d2, d / wp.material.wire_radius ** 2)
        return lo, hi, acc, d2

    workers = min(_thread_count(), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run_chunk, chunks))
    else:
        results = [run_chunk(c) for c in chunks]
    for lo, hi, acc, d2 in results:
        out[lo:hi] = acc
        d2min[lo:hi] = d2

    masked = d2min < 1.0          # normalized by wire radius in run_chunk
    out *= 1e-7 * current
    out[masked] = 0.0
    return FieldMap(grid=grid, b=out, source_current=current, masked=masked)


# ---------------------------------------------------------------------------
# Confinement statistics
# ---------------------------------------------------------------------------

@dataclass
class RegionReduction:
    fraction_ge_threshold: float
    median_db: float
    count: int


@dataclass
class ConfinementStats:
    """Per-region field reduction of a test map relative to a reference map."""

    threshold_db: float
    regions: dict                  # region name -> RegionReduction
    overall: RegionReduction


def field_reduction_stats(test: FieldMap, reference: FieldMap,
                          threshold_db: float = 10.0) -> ConfinementStats:
    """Pointwise reduction 20 log10(|B_ref| / |B_test|), binned by region.

    Maps are normalized to equal drive current first.  Points where both
    magnitudes sit below the numeric floor, or that are masked in either
    map, are excluded.
    """
    if test.grid is not reference.grid and not (
            test.grid.points.shape == reference.grid.points.shape
            and np.array_equal(test.grid.points, reference.grid.points)
            and np.array_equal(test.grid.labels, reference.grid.labels)):
        raise GridMismatchError("field maps use different grids")

    mt = np.linalg.norm(test.per_ampere(), axis=1)
    mr = np.linalg.norm(reference.per_ampere(), axis=1)
    valid = ~(test.masked | reference.masked)
    valid &= ~((mt < DB_FLOOR_TESLA) & (mr < DB_FLOOR_TESLA))
    red = 20.0 * np.log10(np.maximum(mr, DB_FLOOR_TESLA)
                          / np.maximum(mt, DB_FLOOR_TESLA))

    def region_stats(mask):
        m = mask & valid
        cnt = int(m.sum())
        if cnt == 0:
            return RegionReduction(0.0, math.nan, 0)
        r = red[m]
        # tiny slack so exact-ratio cases are not split by log rounding
        return RegionReduction(float((r >= threshold_db - 1e-12).mean()),
                               float(np.median(r)), cnt)

    regions = {name: region_stats(test.grid.labels == idx)
               for idx, name in enumerate(REGION_NAMES)}
    overall = region_stats(np.ones(len(red), dtype=bool))
    return ConfinementStats(threshold_db=float(threshold_db),
                            regions=regions, overall=overall)


# ---------------------------------------------------------------------------
# Inductance
# ---------------------------------------------------------------------------

@dataclass
class InductanceResult:
    value: float
    quadrature_segments: int
    estimated_relative_error: float


def _gauss_nodes(n: int = 24):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w        # mapped to [0, 1]


_GL_U, _GL_W = _gauss_nodes()


def _shared_vertex_neumann(p: float, q: float, cosang: float,
                           a: float) -> float:
    """Regularized Neumann integral for two filaments meeting at a vertex.

    Evaluates the double integral of 1/sqrt(s^2 + t^2 + 2 c s t + a^2) over
    (0,p)x(0,q) by a Duffy-style triangle split; the inner radial integral is
    closed-form, leaving two smooth 1-D integrals.  cosang is the dot of the
    two traversal directions; the result excludes the mu0/4pi factor but
    includes the dl_a . dl_b orientation factor.
    """
    c = min(max(cosang, -0.999), 1.0)

    def triangle(outer: float, ratio: float) -> float:
        g = 1.0 + (ratio * _GL_U) ** 2 + 2.0 * c * ratio * _GL_U
        inner = (np.sqrt(outer ** 2 * g + a * a) - a) / g
        return ratio * float(np.dot(_GL_W, inner))

    return c * (triangle(p, q / p) + triangle(q, p / q))


def _partial_self(lengths: np.ndarray, a: float) -> float:
    """High-frequency partial self-inductance of straight round-wire segments.

    Uses the exact parallel-filament form at the wire radius,
    (mu0/2pi) [ l asinh(l/a)... ] written via logs; tends to
    (mu0 l / 2pi)(ln(2l/a) - 1) for l >> a.
    """
    ln = lengths
    root = np.sqrt(ln ** 2 + a ** 2)
    val = ln * np.log((ln + root) / a) - root + a
    return float((MU0 / (2.0 * math.pi)) * val.sum())


def _neumann_cross_sum(mids_a, vecs_a, mids_b, vecs_b) -> float:
    """Midpoint double sum of (dl_a . dl_b)/r, excluding the mu0/4pi factor."""
    dots = vecs_a @ vecs_b.T
    dist = cdist(mids_a, mids_b)
    return float((dots / dist).sum())


def mutual_inductance(a: WirePath, b: WirePath,
                      max_segment: float = 2e-3,
                      estimate_error: bool = True) -> InductanceResult:
    """Neumann mutual inductance between two disjoint conductors [H].

    The error estimate is the relative change under halving max_segment.
    """
    ra = resample_path(a, max_segment)
    rb = resample_path(b, max_segment)

    pa = np.vstack([ra.vertices, ra.segment_starts + 0.5 * ra.segment_vectors])
    pb = np.vstack([rb.vertices, rb.segment_starts + 0.5 * rb.segment_vectors])
    min_d = float(cdist(pa, pb).min())
    if min_d <= a.material.wire_radius + b.material.wire_radius:
        raise OverlappingConductorsError(
            f"paths come within {min_d:.3g} m of each other, "
            "less than the sum of wire radii")

    mids_a = ra.segment_starts + 0.5 * ra.segment_vectors
    mids_b = rb.segment_starts + 0.5 * rb.segment_vectors
    value = 1e-7 * _neumann_cross_sum(mids_a, ra.segment_vectors,
                                      mids_b, rb.segment_vectors)
    nseg = ra.num_segments + rb.num_segments

    err = 0.0
    if estimate_error and value != 0.0:
        fine = mutual_inductance(a, b, 0.5 * max_segment,
                                 estimate_error=False)
        err = abs(value - fine.value) / abs(value)
    return InductanceResult(value=value, quadrature_segments=nseg,
                            estimated_relative_error=err)


def self_inductance(path: WirePath, max_segment: float = 2e-3,
                    near_factor: float = 6.0, near_subdiv: int = 12,
                    estimate_error: bool = True) -> InductanceResult:
    """Self-inductance of a closed loop [H].

    Neumann sum over resampled segment pairs; shared-vertex pairs use an
    exact singularity-removing quadrature, close pairs are subdivided, and
    the diagonal uses the straight round-wire partial self-inductance with
    the wire radius as regularizer (surface-current convention, matching the
    thin-loop formula mu0 R (ln(8R/a) - 2)).
    """
    if not path.closed:
        raise OpenPathError("self-inductance requires a closed path")
    a_wire = path.material.wire_radius
    rp = resample_path(path, max_segment)
    n = rp.num_segments
    vecs = rp.segment_vectors
    lens = rp.segment_lengths
    mids = rp.segment_starts + 0.5 * vecs

    total = _partial_self(lens, a_wire)

    dots = vecs @ vecs.T
    dist = cdist(mids, mids)

    idx = np.arange(n)
    adjacent = np.zeros((n, n), dtype=bool)
    adjacent[idx, (idx + 1) % n] = True
    adjacent[(idx + 1) % n, idx] = True

    # self-approach guard: spatially close pairs that are far apart along
    # the wire mean the path doubles back onto itself
    arc = np.cumsum(lens) - 0.5 * lens
    arc_gap = np.abs(arc[:, None] - arc[None, :])
    arc_gap = np.minimum(arc_gap, lens.sum() - arc_gap)
    too_close = (dist < 2.0 * a_wire) & (arc_gap > 8.0 * a_wire + lens.max())
    if too_close.any():
        raise OverlappingConductorsError(
            "path approaches itself closer than the wire diameter")

    lmax = np.maximum(lens[:, None], lens[None, :])
    near = (dist < near_factor * lmax) & ~adjacent
    np.fill_diagonal(near, False)

    far = ~near & ~adjacent
    np.fill_diagonal(far, False)
    contrib = np.where(far, dots / np.sqrt(dist * dist + a_wire * a_wire), 0.0)
    total += 1e-7 * float(contrib.sum())

    # shared-vertex pairs: exact corner treatment (each unordered pair twice)
    for i in range(n):
        j = (i + 1) % n
        cosang = float(np.dot(vecs[i], vecs[j]) / (lens[i] * lens[j]))
        total += 2e-7 * _shared_vertex_neumann(lens[i], lens[j], cosang,
                                               a_wire)

    # near pairs: composite midpoint on subdivided segments
    ni, nj = np.nonzero(near)
    keep = ni < nj
    ni, nj = ni[keep], nj[keep]
    if len(ni):
        q = near_subdiv
        frac = (np.arange(q) + 0.5) / q - 0.5
        sub_i = mids[ni][:, None, :] + vecs[ni][:, None, :] * frac[None, :, None]
        sub_j = mids[nj][:, None, :] + vecs[nj][:, None, :] * frac[None, :, None]
        d2 = ((sub_i[:, :, None, :] - sub_j[:, None, :, :]) ** 2).sum(axis=3)
        kernel = 1.0 / np.sqrt(d2 + a_wire * a_wire)
        pair_dots = np.einsum("ij,ij->i", vecs[ni], vecs[nj]) / (q * q)
        total += 2e-7 * float((pair_dots * kernel.sum(axis=(1, 2))).sum())

    if total <= 0:
        raise ValueError("self-inductance came out non-positive; "
                         "geometry is likely degenerate")

    err = 0.0
    if estimate_error:
        fine = self_inductance(path, 0.5 * max_segment, near_factor,
                               near_subdiv, estimate_error=False)
        err = abs(total - fine.value) / total
    return InductanceResult(value=total, quadrature_segments=n,
                            estimated_relative_error=err)


def coupling_coefficient(m: float, l1: float, l2: float) -> float:
    """k = M / sqrt(L1 L2)."""
    if l1 <= 0 or l2 <= 0:
        raise ValueError("self-inductances must be > 0")
    k = m / math.sqrt(l1 * l2)
    if abs(k) >= 1.0:
        raise ValueError(f"non-physical coupling |k| = {abs(k):.3g} >= 1")
    return k


def quality_factor(inductance: float, resistance: float, frequency: float) -> float:
    """Q = 2 pi f L / R."""
    if inductance <= 0 or resistance <= 0 or frequency <= 0:
        raise ValueError("inductance, resistance and frequency must be > 0")
    return 2.0 * math.pi * frequency * inductance / resistance


def ac_resistance(path: WirePath, frequency: float) -> float:
    """Series resistance of the conductor at a given frequency [ohm].

    DC value rho L / (pi a^2); above the skin-depth crossover a/delta = 2 the
    standard surface-conduction approximation R_dc (a/2delta + 1/4) applies,
    blended below it by a quartic that matches value and slope at the
    crossover (within a few percent of the Bessel-exact solution).
    """
    if frequency < 0:
        raise ValueError("frequency must be >= 0")
    mat = path.material
    r_dc = mat.resistivity * path.length() / (math.pi * mat.wire_radius ** 2)
    if frequency == 0:
        return r_dc
    delta = math.sqrt(mat.resistivity / (math.pi * frequency * MU0))
    x = mat.wire_radius / delta
    if x > 2.0:
        factor = 0.5 * x + 0.25
    else:
        factor = 1.0 + 0.25 * (0.5 * x) ** 4
    return r_dc * factor


# ---------------------------------------------------------------------------
# Far-field decay
# ---------------------------------------------------------------------------

def decay_slope(path, current: float, origin, direction,
                r_lo: float, r_hi: float, points: int = 24) -> float:
    """Log-log slope of |B| versus distance along a ray (dipole: -3)."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    origin = np.asarray(origin, dtype=float)
    radii = np.geomspace(r_lo, r_hi, points)
    mags = np.array([
        np.linalg.norm(biot_savart_at(path, current, origin + r * direction))
        for r in radii])
    slope, _ = np.polyfit(np.log(radii), np.log(mags), 1)
    return float(slope)


def distance_to_path(points, path: WirePath) -> np.ndarray:
    """Distance from each point to the nearest conductor segment."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    A = path.segment_starts[:, None, :]
    a = path.segment_vectors[:, None, :]
    c = A - pts[None, :, :]
    la2 = np.einsum("ij,ij->i", path.segment_vectors,
                    path.segment_vectors)[:, None]
    t = np.clip(-np.einsum("ijk,ijk->ij", a, c) / la2, 0.0, 1.0)
    closest = c + a * t[:, :, None]
    d2 = np.einsum("ijk,ijk->ij", closest, closest).min(axis=0)
    return np.sqrt(d2)
