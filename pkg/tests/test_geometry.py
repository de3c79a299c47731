import math

import numpy as np
import pytest

from meanderlink.geometry import (
    BodyModel, ConductorMaterial, GeometryError, HelicalSpec, LIQUID_METAL_THREAD,
    LoopSpec, MeanderSpec, REGION_EXTERIOR, REGION_INTERIOR, REGION_SHELL,
    WirePath, build_cylindrical_helix, build_helical_path, build_loop_path,
    build_meander_path, build_meander_ring, coverage_fraction, make_eval_grid,
    meander_lobe_signed_areas, resample_path, wrap_path_on_cylinder)


def shoelace(xy):
    """Signed area of a closed 2-D polygon (independent oracle)."""
    x, y = np.asarray(xy).T
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


# ---------------------------------------------------------------------------
# Meander
# ---------------------------------------------------------------------------

def test_meander_two_lobes_cancel_exactly():
    # each lobe 0.1 x 0.1 m: band height 0.2, slot width 0.1
    spec = MeanderSpec(footprint_width=0.21, footprint_height=0.2,
                       lobe_count=2, lobe_spacing=0.01)
    assert spec.lobe_width == pytest.approx(0.1)
    path = build_meander_path(spec)
    area = path.vector_area()
    assert abs(area[2]) <= 1e-9 * 0.01
    assert np.allclose(area[:2], 0.0, atol=1e-15)

    # per-lobe signed areas via shoelace over each 4-vertex cell closed
    # along the baseline
    v = path.vertices
    lobe0 = shoelace(v[0:4, :2])
    lobe1 = shoelace(v[4:8, :2])
    assert lobe0 == pytest.approx(-0.01, abs=1e-15)
    assert lobe1 == pytest.approx(0.01, abs=1e-15)
    assert np.allclose(meander_lobe_signed_areas(spec), [-0.01, 0.01])


def test_meander_zigzag_length_oracle():
    # analytic: n (w + 2h) + (n-1) s with w = (W - (n-1) s)/n, h = H/2
    spec = MeanderSpec(0.6, 0.3, 8, lobe_spacing=0.01)
    w, h = spec.lobe_width, spec.lobe_height
    oracle = 8 * (w + 2 * h) + 7 * 0.01
    path = build_meander_path(spec)
    assert path.length() == pytest.approx(oracle, rel=1e-12)
    assert abs(path.vector_area()[2]) <= 1e-9 * w * h


def test_meander_body_scale_garment_config():
    # lobes sized so a 4x4 cm receiver occupies 0.4% of the footprint area
    rx_area = 0.04 ** 2
    footprint_area = rx_area / 0.004
    width = 0.96
    spec = MeanderSpec(width, footprint_area / width, 12, lobe_spacing=0.012)
    path = build_meander_path(spec)
    assert path.num_segments > 0
    assert coverage_fraction(rx_area, width * spec.footprint_height) == \
        pytest.approx(0.004)


def test_meander_multi_turn_stacks_and_cancels():
    spec = MeanderSpec(0.43, 0.2, 4, turns_per_lobe=3, lobe_spacing=0.01)
    path = build_meander_path(spec)
    assert abs(path.vector_area()[2]) <= 1e-9 * spec.lobe_width * 0.1
    areas = meander_lobe_signed_areas(spec)
    assert abs(areas[0]) == pytest.approx(3 * spec.lobe_width * 0.1)
    assert areas[0] == -areas[1]
    # turns stack in -z
    assert path.vertices[:, 2].min() == pytest.approx(-2 * 2e-3)


@pytest.mark.parametrize("turns", [1, 2])
def test_meander_point_symmetry(turns):
    # the built path is symmetric under 180-degree rotation about the
    # footprint center (an alternating meander cannot be mirror symmetric,
    # but the composition of both mirrors holds exactly)
    spec = MeanderSpec(0.43, 0.2, 4, turns_per_lobe=turns, lobe_spacing=0.01)
    v = build_meander_path(spec).vertices
    rotated = v * np.array([-1.0, -1.0, 1.0])
    orig = {tuple(np.round(p, 12)) for p in v}
    rot = {tuple(np.round(p, 12)) for p in rotated}
    assert orig == rot


def test_meander_invariants_rejected():
    with pytest.raises(GeometryError):
        MeanderSpec(0.6, 0.3, 7, lobe_spacing=0.01)        # odd lobes
    with pytest.raises(GeometryError):
        MeanderSpec(0.6, 0.3, 8, lobe_spacing=5e-4)        # under wire diameter
    with pytest.raises(GeometryError):
        MeanderSpec(0.6, 0.3, 8, turns_per_lobe=0)
    with pytest.raises(GeometryError):
        MeanderSpec(-0.6, 0.3, 8)


# ---------------------------------------------------------------------------
# Helical (flat spiral)
# ---------------------------------------------------------------------------

def test_helical_single_turn_exact():
    path = build_helical_path(HelicalSpec(0.1, 0.1, turns=1))
    assert path.closed
    assert path.vector_area()[2] == pytest.approx(0.01, rel=1e-12)
    assert path.length() == pytest.approx(0.4, rel=1e-12)


def test_helical_five_turn_area_oracle():
    spec = HelicalSpec(0.1, 0.1, turns=5, turn_spacing=2e-3)
    oracle = sum((0.1 - 2 * j * 2e-3) ** 2 for j in range(5))
    path = build_helical_path(spec)
    # small deficit from the corner steps and the stacked feed return
    assert path.vector_area()[2] == pytest.approx(oracle, rel=0.02)
    assert path.vector_area()[2] > 0


def test_helical_vs_meander_same_footprint():
    helical = build_helical_path(HelicalSpec(0.43, 0.2, turns=2))
    meander = build_meander_path(MeanderSpec(0.43, 0.2, 4, lobe_spacing=0.01))
    assert helical.vector_area()[2] > 0.05
    assert abs(meander.vector_area()[2]) < 1e-10


def test_helical_rejects_overfull_footprint():
    with pytest.raises(GeometryError):
        HelicalSpec(0.05, 0.05, turns=20, turn_spacing=2e-3)


# ---------------------------------------------------------------------------
# Loops
# ---------------------------------------------------------------------------

def test_circle_loop_resampled_length():
    path = build_loop_path(LoopSpec("circle", 0.05, turns=1))
    fine = resample_path(path, 1e-3)
    assert fine.num_segments >= 314
    assert fine.length() == pytest.approx(2 * math.pi * 0.05, rel=1e-3)


def test_square_loop_perimeter():
    path = build_loop_path(LoopSpec("square", 0.04, turns=1))
    assert path.length() == pytest.approx(0.16, rel=1e-12)


def test_square_loop_three_turn_perimeter_oracle():
    # concentric perimeter sum; the stacked feed return adds ~1.5%
    oracle = 4 * (0.03 + 0.028 + 0.026)
    path = build_loop_path(LoopSpec("square", 0.03, turns=3,
                                    turn_spacing=1e-3))
    assert path.length() == pytest.approx(oracle, rel=0.025)
    assert path.closed


def test_loop_rejects_bad_dimensions():
    with pytest.raises(GeometryError):
        LoopSpec("circle", -0.05)
    with pytest.raises(GeometryError):
        LoopSpec("hexagon", 0.05)


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------

def test_resample_uniform_subdivision():
    seg = WirePath([[0, 0, 0], [0.1, 0, 0]], False, LIQUID_METAL_THREAD)
    fine = resample_path(seg, 0.01)
    assert len(fine.vertices) == 11
    assert fine.length() == pytest.approx(0.1, rel=1e-12)


def test_resample_idempotent_and_keeps_vertices():
    path = build_meander_path(MeanderSpec(0.6, 0.3, 8, lobe_spacing=0.01))
    fine = resample_path(path, 2e-3)
    again = resample_path(fine, 2e-3)
    assert again is fine
    orig = {tuple(np.round(p, 12)) for p in path.vertices}
    new = {tuple(np.round(p, 12)) for p in fine.vertices}
    assert orig <= new
    assert fine.length() == pytest.approx(path.length(), rel=1e-12)


def test_resample_never_adds_curvature():
    octagon = [(0.05 * math.cos(2 * math.pi * i / 8),
                0.05 * math.sin(2 * math.pi * i / 8), 0.0) for i in range(8)]
    coarse = WirePath(octagon, True, LIQUID_METAL_THREAD)
    perimeter = 8 * 2 * 0.05 * math.sin(math.pi / 8)
    fine = resample_path(coarse, 1e-3)
    assert fine.length() == pytest.approx(perimeter, rel=1e-12)
    assert fine.length() < 2 * math.pi * 0.05 * 0.999


def test_resampled_segments_exceed_wire_diameter():
    for path in (build_meander_path(MeanderSpec(0.6, 0.3, 8,
                                                lobe_spacing=0.01)),
                 build_loop_path(LoopSpec("circle", 0.05)),
                 build_helical_path(HelicalSpec(0.1, 0.1, 3))):
        fine = resample_path(path, 2e-3)
        assert fine.segment_lengths.min() >= 2 * path.material.wire_radius


# ---------------------------------------------------------------------------
# Coverage fraction
# ---------------------------------------------------------------------------

def test_coverage_fraction_paper_ratios():
    assert coverage_fraction(16e-4, 0.4) == pytest.approx(0.004, rel=1e-12)
    assert coverage_fraction(9e-4, 0.3) == pytest.approx(0.003, rel=1e-12)
    assert coverage_fraction(0.2, 0.2) == 1.0


def test_coverage_fraction_scale_invariant():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = float(rng.uniform(0.01, 1.0))
        b = float(rng.uniform(a, 2.0))
        c = float(rng.uniform(0.1, 100.0))
        assert coverage_fraction(c * a, c * b) == \
            pytest.approx(coverage_fraction(a, b), rel=1e-12)


def test_coverage_fraction_rejects_oversized_device():
    with pytest.raises(GeometryError):
        coverage_fraction(0.5, 0.4)
    with pytest.raises(GeometryError):
        coverage_fraction(0.0, 0.4)


# ---------------------------------------------------------------------------
# Body wrap
# ---------------------------------------------------------------------------

def test_wrap_preserves_arc_length():
    spec = MeanderSpec(0.43, 0.2, 4, lobe_spacing=0.01)
    flat = resample_path(build_meander_path(spec), 2e-3)
    wrapped = wrap_path_on_cylinder(flat, 0.155)
    # chords under-measure arcs by O((l/R)^2)
    assert wrapped.length() == pytest.approx(flat.length(), rel=1e-4)


def test_meander_ring_closed_and_balanced():
    radius = 0.155
    spacing = 0.008
    spec = MeanderSpec(2 * math.pi * radius - spacing, 0.1, 8,
                       lobe_spacing=spacing)
    ring = build_meander_ring(spec, radius, z_center=0.3)
    assert ring.closed
    lobe_moment = spec.lobe_width * spec.lobe_height
    assert np.linalg.norm(ring.vector_area()) <= 1e-6 * lobe_moment


def test_meander_ring_rejects_wrong_width():
    spec = MeanderSpec(0.9, 0.1, 8, lobe_spacing=0.008)
    with pytest.raises(GeometryError):
        build_meander_ring(spec, 0.155)


def test_cylindrical_helix_moment():
    radius = 0.155
    helix = build_cylindrical_helix(radius, turns=6, turn_spacing=0.05)
    area = helix.vector_area()
    assert area[2] == pytest.approx(6 * math.pi * radius ** 2, rel=0.01)
    assert helix.closed


# ---------------------------------------------------------------------------
# Body model / grid
# ---------------------------------------------------------------------------

def test_eval_grid_labels_partition():
    body = BodyModel(radius=0.05, height=0.1, grid_resolution=0.01,
                     shell_thickness=0.01)
    grid = make_eval_grid(body, margin=0.02)
    counts = [int((grid.labels == r).sum())
              for r in (REGION_INTERIOR, REGION_SHELL, REGION_EXTERIOR)]
    assert sum(counts) == len(grid)
    assert all(c > 0 for c in counts)
    r = np.hypot(grid.points[:, 0], grid.points[:, 1])
    assert r[grid.labels == REGION_INTERIOR].max() <= body.radius - 0.01 + 1e-12
    assert r[grid.labels == REGION_SHELL].max() <= body.radius + 1e-12
    assert r[grid.labels == REGION_EXTERIOR].min() > body.radius


def test_body_model_invariants():
    with pytest.raises(GeometryError):
        BodyModel(radius=-1.0)
    with pytest.raises(GeometryError):
        BodyModel(shell_thickness=0.2, radius=0.15)


def test_wire_path_validation():
    mat = ConductorMaterial("m", 1e-7, 1e-4)
    with pytest.raises(GeometryError):
        WirePath([[0, 0, 0]], False, mat)
    with pytest.raises(GeometryError):
        WirePath([[0, 0, 0], [0, 0, 0]], False, mat)
    with pytest.raises(GeometryError):
        ConductorMaterial("m", -1.0, 1e-4)
