"""Coil path synthesis and the cylindrical body evaluation grid.

Builds discretized 3-D wire paths for three winding styles:

  meander  -- a square-wave chain of rectangular cells alternating above and
              below a baseline, so consecutive cells carry opposite circulation
              and the net magnetic moment cancels exactly for an even cell count
  helical  -- a conventional flat rectangular spiral, every turn wound in the
              same sense (net moment adds up)
  loop     -- small square or circular receiver/sensor coils

Paths are polylines in meters.  Flat coils live in the z=0 plane (extra turns
stack in -z) and can be wrapped isometrically onto the body cylinder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_SEGMENT = 2e-3   # m; fine enough for sub-0.1% quadrature oracles
TURN_STACK_PITCH = 2e-3      # m; spacing between stacked turns of one lobe


class GeometryError(ValueError):
    """Invalid coil or body geometry."""


# ---------------------------------------------------------------------------
# Materials and paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConductorMaterial:
    """Round-wire conductor: resistivity [ohm m] and wire radius [m]."""

    name: str
    resistivity: float
    wire_radius: float

    def __post_init__(self):
        if self.resistivity <= 0:
            raise GeometryError("resistivity must be > 0")
        if self.wire_radius <= 0:
            raise GeometryError("wire_radius must be > 0")


# Reference conductors: 1 mm diameter liquid-metal thread versus a standard
# conductive thread (about 8.3x more resistive).
LIQUID_METAL_THREAD = ConductorMaterial("liquid-metal thread", 29.6e-8, 0.5e-3)
STANDARD_THREAD = ConductorMaterial("standard conductive thread", 246.6e-8, 0.5e-3)
COPPER_WIRE = ConductorMaterial("copper wire", 1.68e-8, 0.3e-3)


class WirePath:
    """Discretized conductor: ordered 3-D vertices plus wire material.

    ``closed=True`` means the segment from the last vertex back to the first
    is part of the conductor (the first vertex is not repeated).
    """

    def __init__(self, vertices, closed: bool, material: ConductorMaterial):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 2:
            raise GeometryError("need at least 2 vertices of shape (n, 3)")
        if not np.all(np.isfinite(v)):
            raise GeometryError("vertices must be finite")
        d = np.linalg.norm(np.diff(v, axis=0), axis=1)
        if np.any(d <= 0.0):
            raise GeometryError("consecutive vertices must be distinct")
        if closed and np.linalg.norm(v[-1] - v[0]) <= 0.0:
            raise GeometryError("closed path must not repeat the first vertex")
        self.vertices = v
        self.closed = bool(closed)
        self.material = material

    # -- segment views ------------------------------------------------

    @property
    def segment_starts(self) -> np.ndarray:
        if self.closed:
            return self.vertices
        return self.vertices[:-1]

    @property
    def segment_ends(self) -> np.ndarray:
        if self.closed:
            return np.roll(self.vertices, -1, axis=0)
        return self.vertices[1:]

    @property
    def segment_vectors(self) -> np.ndarray:
        return self.segment_ends - self.segment_starts

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.segment_vectors, axis=1)

    @property
    def num_segments(self) -> int:
        return len(self.vertices) if self.closed else len(self.vertices) - 1

    def length(self) -> float:
        return float(self.segment_lengths.sum())

    def vector_area(self) -> np.ndarray:
        """Vector area (1/2) sum r_i x r_{i+1} of the (implied-closed) loop.

        Equals the magnetic moment per unit current.  Open paths are closed
        by the chord from the last vertex back to the first.
        """
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        return 0.5 * np.cross(a, b).sum(axis=0)

    def translated(self, offset) -> "WirePath":
        return WirePath(self.vertices + np.asarray(offset, dtype=float),
                        self.closed, self.material)

    def transformed(self, rotation: np.ndarray, offset=(0.0, 0.0, 0.0)) -> "WirePath":
        """Apply a 3x3 rotation then translate."""
        r = np.asarray(rotation, dtype=float)
        return WirePath(self.vertices @ r.T + np.asarray(offset, dtype=float),
                        self.closed, self.material)


# ---------------------------------------------------------------------------
# Coil specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeanderSpec:
    footprint_width: float
    footprint_height: float
    lobe_count: int
    turns_per_lobe: int = 1
    lobe_spacing: float = 0.01
    standoff: float = 5e-3
    material: ConductorMaterial = LIQUID_METAL_THREAD

    def __post_init__(self):
        if self.footprint_width <= 0 or self.footprint_height <= 0:
            raise GeometryError("footprint dimensions must be > 0")
        if self.lobe_count < 2 or self.lobe_count % 2 != 0:
            raise GeometryError("lobe_count must be even and >= 2")
        if self.turns_per_lobe < 1:
            raise GeometryError("turns_per_lobe must be >= 1")
        if self.lobe_spacing < 2.0 * self.material.wire_radius:
            raise GeometryError(
                "adjacent lobes would overlap: lobe_spacing "
                f"{self.lobe_spacing:g} m < wire diameter "
                f"{2.0 * self.material.wire_radius:g} m")
        if self.lobe_width <= 2.0 * self.material.wire_radius:
            raise GeometryError("lobe width too small for the given spacing")

    @property
    def lobe_width(self) -> float:
        n = self.lobe_count
        return (self.footprint_width - (n - 1) * self.lobe_spacing) / n

    @property
    def lobe_height(self) -> float:
        return self.footprint_height / 2.0


@dataclass(frozen=True)
class HelicalSpec:
    footprint_width: float
    footprint_height: float
    turns: int
    turn_spacing: float = 2e-3
    standoff: float = 5e-3
    material: ConductorMaterial = LIQUID_METAL_THREAD

    def __post_init__(self):
        if self.footprint_width <= 0 or self.footprint_height <= 0:
            raise GeometryError("footprint dimensions must be > 0")
        if self.turns < 1:
            raise GeometryError("turns must be >= 1")
        if self.turn_spacing < 2.0 * self.material.wire_radius:
            raise GeometryError("turn_spacing below wire diameter")
        inner = min(self.footprint_width, self.footprint_height) \
            - 2.0 * (self.turns - 1) * self.turn_spacing
        if inner <= 2.0 * self.material.wire_radius:
            raise GeometryError("turns x spacing exceed the footprint")


@dataclass(frozen=True)
class LoopSpec:
    shape: str                       # "square" | "circle"
    size: float                      # side length (square) or radius (circle)
    turns: int = 1
    turn_spacing: float = 1e-3
    material: ConductorMaterial = COPPER_WIRE
    max_segment: float = DEFAULT_MAX_SEGMENT   # circle facet length

    def __post_init__(self):
        if self.shape not in ("square", "circle"):
            raise GeometryError(f"unknown loop shape {self.shape!r}")
        if self.size <= 0:
            raise GeometryError("loop size must be > 0")
        if self.turns < 1:
            raise GeometryError("turns must be >= 1")
        if self.turns > 1 and self.turn_spacing < 2.0 * self.material.wire_radius:
            raise GeometryError("turn_spacing below wire diameter")


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_meander_path(spec: MeanderSpec) -> WirePath:
    """Alternating square-wave meander in the z=0 plane, centered at origin.

    Lobe k occupies the k-th slot along x; even lobes rise above the baseline,
    odd lobes drop below, so consecutive lobes enclose equal areas with
    opposite signed orientation and the total moment cancels pairwise.
    Extra turns per lobe repeat the same cell on stacked -z planes, joined by
    short diagonals along the baseline.
    """
    n, t = spec.lobe_count, spec.turns_per_lobe
    w, h, s = spec.lobe_width, spec.lobe_height, spec.lobe_spacing
    zp = TURN_STACK_PITCH
    if t > 1 and zp < 2.0 * spec.material.wire_radius:
        raise GeometryError("wire too thick for the turn stacking pitch")

    pts = []
    for k in range(n):
        x0 = k * (w + s)
        side = 1.0 if k % 2 == 0 else -1.0
        for j in range(t):
            z = -j * zp
            pts += [(x0, 0.0, z), (x0, side * h, z),
                    (x0 + w, side * h, z), (x0 + w, 0.0, z)]
        # the inter-lobe link (or, between turns, the return diagonal) is the
        # implicit segment to the next appended vertex
    verts = np.array(pts, dtype=float)
    verts[:, 0] -= spec.footprint_width / 2.0
    return WirePath(verts, closed=False, material=spec.material)


def meander_lobe_signed_areas(spec: MeanderSpec) -> np.ndarray:
    """Analytic per-lobe signed enclosed area.

    Even lobes rise above the baseline and are traversed clockwise
    (negative); odd lobes mirror them below.
    """
    a = spec.turns_per_lobe * spec.lobe_width * spec.lobe_height
    return np.array([-a if k % 2 == 0 else a for k in range(spec.lobe_count)])


def _rect_spiral(width: float, height: float, turns: int, pitch: float):
    """Vertices of a flat rectangular spiral; turn j is inset by j*pitch.

    Each revolution covers exactly its concentric-rectangle perimeter: the
    left wall stops one pitch short and a horizontal step leads inward.
    """
    pts = [(0.0, 0.0)]
    for j in range(turns):
        xl, yb = j * pitch, j * pitch
        xr, yt = width - j * pitch, height - j * pitch
        pts += [(xr, yb), (xr, yt), (xl, yt)]
        if j < turns - 1:
            pts += [(xl, yb + pitch), (xl + pitch, yb + pitch)]
    return pts


def _with_feed_return(verts: np.ndarray) -> np.ndarray:
    """Route the closing feed of a multi-turn spiral on a -z layer.

    An in-plane chord from the inner end back to the start would cross the
    outer turns; dropping it by one stack pitch keeps conductors disjoint.
    The implied closing segment then rises at the start corner.
    """
    zp = TURN_STACK_PITCH
    inner = verts[-1] + (0.0, 0.0, -zp)
    back = verts[0] + (0.0, 0.0, -zp)
    return np.vstack([verts, inner, back])


def build_helical_path(spec: HelicalSpec) -> WirePath:
    """Flat rectangular spiral in the z=0 plane, centered at origin.

    All turns share one winding sense; the net signed area is the sum of the
    concentric turn areas (small corner-step and feed deficits aside).
    """
    pts2 = _rect_spiral(spec.footprint_width, spec.footprint_height,
                        spec.turns, spec.turn_spacing)
    verts = np.array([(x, y, 0.0) for x, y in pts2], dtype=float)
    if spec.turns > 1:
        verts = _with_feed_return(verts)
    verts[:, 0] -= spec.footprint_width / 2.0
    verts[:, 1] -= spec.footprint_height / 2.0
    return WirePath(verts, closed=True, material=spec.material)


def build_loop_path(spec: LoopSpec) -> WirePath:
    """Closed planar receiver/sensor loop centered at origin, normal +z."""
    if spec.shape == "square":
        pts2 = _rect_spiral(spec.size, spec.size, spec.turns, spec.turn_spacing)
        verts = np.array([(x, y, 0.0) for x, y in pts2], dtype=float)
        if spec.turns > 1:
            verts = _with_feed_return(verts)
        verts[:, :2] -= spec.size / 2.0
        return WirePath(verts, closed=True, material=spec.material)

    pts = []
    for j in range(spec.turns):
        r = spec.size - j * spec.turn_spacing
        if r <= 0:
            raise GeometryError("turns x spacing exceed the loop radius")
        nseg = max(16, int(math.ceil(2.0 * math.pi * r / spec.max_segment)))
        ang = 2.0 * math.pi * np.arange(nseg) / nseg
        pts.append(np.column_stack([r * np.cos(ang), r * np.sin(ang),
                                    np.zeros(nseg)]))
    verts = np.vstack(pts)
    if spec.turns > 1:
        verts = _with_feed_return(verts)
    return WirePath(verts, closed=True, material=spec.material)


# ---------------------------------------------------------------------------
# Resampling and wrapping
# ---------------------------------------------------------------------------

def resample_path(path: WirePath, max_segment: float) -> WirePath:
    """Subdivide segments so none exceeds max_segment.

    Keeps every original vertex, adds collinear points only (never adds
    curvature), preserves total length, and is idempotent at a fixed
    max_segment.
    """
    if max_segment <= 0:
        raise GeometryError("max_segment must be > 0")
    limit = max_segment * (1.0 + 1e-9)      # float slack keeps idempotence
    lengths = path.segment_lengths
    if np.all(lengths <= limit):
        return path
    out = []
    starts, ends = path.segment_starts, path.segment_ends
    for a, b, ln in zip(starts, ends, lengths):
        out.append(a)
        k = int(math.ceil(ln / limit))
        for i in range(1, k):
            out.append(a + (b - a) * (i / k))
    if not path.closed:
        out.append(path.vertices[-1])
    return WirePath(np.array(out), path.closed, path.material)


def wrap_path_on_cylinder(path: WirePath, cylinder_radius: float,
                          z_center: float = 0.0,
                          close_tol: float = 1e-9) -> WirePath:
    """Wrap a flat path isometrically onto a cylinder around the z axis.

    Flat x maps to arc length along the circumference (phi = x / radius),
    flat y maps to axial z, and flat -z offsets stack radially outward.
    Wrap the path fine-grained first: chords are not re-bent into arcs.
    If the wrapped ends land on the same point the path is closed.
    """
    if cylinder_radius <= 0:
        raise GeometryError("cylinder_radius must be > 0")
    v = path.vertices
    phi = v[:, 0] / cylinder_radius
    rad = cylinder_radius - v[:, 2]
    wrapped = np.column_stack([rad * np.cos(phi), rad * np.sin(phi),
                               v[:, 1] + z_center])
    closed = path.closed
    if not closed and np.linalg.norm(wrapped[-1] - wrapped[0]) < close_tol:
        wrapped = wrapped[:-1]
        closed = True
    return WirePath(wrapped, closed, path.material)


def _twisted_feed_strands(cylinder_radius: float, phi: float,
                          z_top: float, z_bot: float,
                          strand_radius: float = 1.25e-3,
                          twists: int = 10, points_per_twist: int = 16):
    """Two interwound helical strands joining the z_top and z_bot levels.

    Models a twisted feed pair at one azimuth: the down and up conductors
    wind around a common vertical axis so the enclosed hairpin area (and its
    stray dipole moment) averages out.  Returns (down_strand, up_strand)
    vertex arrays; the down strand runs z_top -> z_bot, the up strand back.
    """
    e1 = np.array([math.cos(phi), math.sin(phi), 0.0])
    e2 = np.array([-math.sin(phi), math.cos(phi), 0.0])
    axis = cylinder_radius * e1
    n = twists * points_per_twist
    t = np.linspace(0.0, 1.0, n + 1)
    z = z_top + (z_bot - z_top) * t
    psi = 2.0 * math.pi * twists * t
    offs = strand_radius * (np.outer(np.cos(psi), e1)
                            + np.outer(np.sin(psi), e2))
    base = axis[None, :] + np.column_stack([np.zeros(n + 1),
                                            np.zeros(n + 1), z])
    down = base + offs
    up = (base - offs)[::-1]
    return down, up


def build_meander_ring(spec: MeanderSpec, cylinder_radius: float,
                       z_center: float = 0.0,
                       max_segment: float = 0.01,
                       band_gap: float = 6e-3) -> WirePath:
    """Closed body-scale meander: a two-band serpentine wrap of the zigzag.

    One meander band circling the body carries a net turn of circulation on
    top of its cancelling lobes, so the coil runs around twice: an upper
    band traversed one way and a lower mirror band traversed back, which
    cancels the belt circulation exactly.  The two bands connect through a
    twisted feed pair at the seam azimuth, so no stray feed moment is left.

    The spec describes one band; footprint width must equal the
    circumference minus one lobe spacing so lobes stay uniformly spaced
    around the ring (uniform spacing is what makes the lobe moments cancel
    pairwise).
    """
    circumference = 2.0 * math.pi * cylinder_radius
    if abs(spec.footprint_width - (circumference - spec.lobe_spacing)) > 1e-9:
        raise GeometryError(
            "ring meander needs footprint_width = 2 pi R - lobe_spacing "
            f"({circumference - spec.lobe_spacing:.6g} m for this radius)")

    pitch = spec.footprint_height + band_gap
    z_hi = z_center + 0.5 * pitch
    z_lo = z_center - 0.5 * pitch

    flat = resample_path(build_meander_path(spec), max_segment)
    reverse = WirePath(flat.vertices[::-1].copy(), False, spec.material)
    upper = wrap_path_on_cylinder(flat, cylinder_radius, z_hi)
    lower = wrap_path_on_cylinder(reverse, cylinder_radius, z_lo)

    phi_end = spec.footprint_width / (2.0 * cylinder_radius)
    gap_arc = spec.lobe_spacing / cylinder_radius
    phi_mid = phi_end + 0.5 * gap_arc          # mid seam gap
    down, up = _twisted_feed_strands(cylinder_radius, phi_mid, z_hi, z_lo)

    verts = np.vstack([upper.vertices, down, lower.vertices, up])
    return WirePath(verts, closed=True, material=spec.material)


def build_cylindrical_helix(cylinder_radius: float, turns: int,
                            turn_spacing: float, z_center: float = 0.0,
                            material: ConductorMaterial = LIQUID_METAL_THREAD,
                            max_segment: float = 0.01) -> WirePath:
    """Closed solenoid-style coil winding one direction around the body.

    This is the conventional body-scale counterpart of the meander ring:
    every turn circulates the same way, so the net moment is about
    turns x pi R^2.  The feed returns axially at a small radial offset,
    crossing over the turns without touching them.
    """
    if turns < 1:
        raise GeometryError("turns must be >= 1")
    if turn_spacing < 2.0 * material.wire_radius:
        raise GeometryError("turn_spacing below wire diameter")
    height = (turns - 1) * turn_spacing if turns > 1 else 0.0
    z_lo = z_center - height / 2.0
    n = max(16, int(math.ceil(turns * 2.0 * math.pi * cylinder_radius
                              / max_segment)))
    t = np.linspace(0.0, 1.0, n + 1)
    phi = 2.0 * math.pi * turns * t
    z = z_lo + height * t
    helix = np.column_stack([cylinder_radius * np.cos(phi),
                             cylinder_radius * np.sin(phi), z])
    # axial return at a radial offset clears the turns it crosses
    r_out = cylinder_radius + max(2e-3, 4.0 * material.wire_radius)
    ret = np.array([[r_out, 0.0, z_lo + height],
                    [r_out, 0.0, z_lo]])
    verts = np.vstack([helix, ret])
    return WirePath(verts, closed=True, material=material)


def coverage_fraction(device_footprint_area: float,
                      coil_footprint_area: float) -> float:
    """Device-to-coil footprint area ratio in [0, 1]."""
    if device_footprint_area <= 0 or coil_footprint_area <= 0:
        raise GeometryError("areas must be > 0")
    if device_footprint_area > coil_footprint_area:
        raise GeometryError("device area exceeds coil area")
    return device_footprint_area / coil_footprint_area


# ---------------------------------------------------------------------------
# Body model and evaluation grid
# ---------------------------------------------------------------------------

REGION_INTERIOR = 0
REGION_SHELL = 1
REGION_EXTERIOR = 2
REGION_NAMES = ("interior", "shell", "exterior")


@dataclass(frozen=True)
class BodyModel:
    """Cylindrical body stand-in used as the field evaluation region."""

    radius: float = 0.15
    height: float = 0.6
    origin: tuple = (0.0, 0.0, 0.0)
    axis: tuple = (0.0, 0.0, 1.0)
    grid_resolution: float = 0.01
    shell_thickness: float = 0.01

    def __post_init__(self):
        if min(self.radius, self.height, self.grid_resolution) <= 0:
            raise GeometryError("radius, height, resolution must be > 0")
        if not 0 < self.shell_thickness < self.radius:
            raise GeometryError("need 0 < shell_thickness < radius")
        if np.linalg.norm(self.axis) == 0:
            raise GeometryError("axis direction must be nonzero")


@dataclass
class EvalGrid:
    """Labeled evaluation points: body interior, near-surface shell, exterior."""

    points: np.ndarray            # (n, 3)
    labels: np.ndarray            # (n,) ints, REGION_* values

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise GeometryError("points must have shape (n, 3)")
        if len(self.points) != len(self.labels):
            raise GeometryError("one label per point required")
        if not np.all((self.labels >= 0) & (self.labels <= 2)):
            raise GeometryError("labels must be interior/shell/exterior")

    def __len__(self) -> int:
        return len(self.points)

    def region_mask(self, region: int) -> np.ndarray:
        return self.labels == region


def _axis_frame(axis) -> np.ndarray:
    """Rotation matrix whose third column is the unit axis."""
    w = np.asarray(axis, dtype=float)
    w = w / np.linalg.norm(w)
    helper = np.array([1.0, 0.0, 0.0]) if abs(w[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(helper, w)
    u /= np.linalg.norm(u)
    v = np.cross(w, u)
    return np.column_stack([u, v, w])


def make_eval_grid(body: BodyModel, margin: float = 0.04) -> EvalGrid:
    """Regular grid over the body cylinder plus a radial exterior margin.

    Labels: interior r <= R - t, shell R - t < r <= R (the near-surface
    tissue band), exterior r > R (air, textile, coil), with t the shell
    thickness.
    """
    if margin < 0:
        raise GeometryError("margin must be >= 0")
    res = body.grid_resolution
    rmax = body.radius + margin
    # symmetric transverse samples, axial samples spanning the body height
    n_half = int(math.floor(rmax / res))
    xy = res * np.arange(-n_half, n_half + 1)
    nz = int(math.floor(body.height / res))
    zz = res * np.arange(0, nz + 1)
    gx, gy, gz = np.meshgrid(xy, xy, zz, indexing="ij")
    pts_local = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    r = np.hypot(pts_local[:, 0], pts_local[:, 1])
    keep = r <= rmax + 1e-12
    pts_local = pts_local[keep]
    r = r[keep]

    t = body.shell_thickness
    labels = np.full(len(pts_local), REGION_EXTERIOR, dtype=np.int8)
    labels[r <= body.radius] = REGION_SHELL
    labels[r <= body.radius - t] = REGION_INTERIOR

    frame = _axis_frame(body.axis)
    pts = pts_local @ frame.T + np.asarray(body.origin, dtype=float)
    return EvalGrid(pts, labels)
