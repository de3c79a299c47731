import math
import time

import numpy as np
import pytest
from scipy.special import ellipe, ellipk

from meanderlink.geometry import (
    ConductorMaterial, EvalGrid, HelicalSpec, LIQUID_METAL_THREAD, LoopSpec,
    MeanderSpec, STANDARD_THREAD, WirePath, build_helical_path,
    build_loop_path, build_meander_path, resample_path)
from meanderlink.magnetics import (
    DB_FLOOR_TESLA, FieldMap, GridMismatchError, MU0, OpenPathError,
    OverlappingConductorsError, PointInsideConductorError, ac_resistance,
    biot_savart_at, coupling_coefficient, decay_slope, distance_to_path,
    field_map, field_reduction_stats, mutual_inductance, quality_factor,
    self_inductance)

LOOP_R = 0.05


def circle(radius=LOOP_R, max_segment=2e-3, material=LIQUID_METAL_THREAD):
    return build_loop_path(LoopSpec("circle", radius, turns=1,
                                    material=material,
                                    max_segment=max_segment))


def maxwell_mutual(r1, r2, d):
    """Coaxial-loop mutual inductance via complete elliptic integrals.

    Independent oracle; scipy's ellipk/ellipe take the parameter m = k^2.
    """
    m = 4 * r1 * r2 / ((r1 + r2) ** 2 + d ** 2)
    k = math.sqrt(m)
    return MU0 * math.sqrt(r1 * r2) * ((2 / k - k) * ellipk(m)
                                       - (2 / k) * ellipe(m))


def thin_loop_self(radius, wire_radius):
    return MU0 * radius * (math.log(8 * radius / wire_radius) - 2)


# ---------------------------------------------------------------------------
# Biot-Savart
# ---------------------------------------------------------------------------

def test_loop_center_field_oracle():
    b = biot_savart_at(circle(), 1.0, (0.0, 0.0, 0.0))
    exact = MU0 * 1.0 / (2 * LOOP_R)               # 12.566 uT
    assert exact == pytest.approx(1.2566370614359172e-05)
    assert np.linalg.norm(b) == pytest.approx(exact, rel=1e-3)
    assert b[2] > 0 and abs(b[0]) < 1e-12 * b[2] and abs(b[1]) < 1e-12 * b[2]


def test_loop_on_axis_field_oracle():
    z = 0.05
    b = biot_savart_at(circle(), 1.0, (0.0, 0.0, z))
    exact = MU0 * LOOP_R ** 2 / (2 * (LOOP_R ** 2 + z ** 2) ** 1.5)
    assert np.linalg.norm(b) == pytest.approx(exact, rel=1e-3)


def test_zero_current_zero_field():
    assert np.all(biot_savart_at(circle(), 0.0, (0.01, 0.02, 0.03)) == 0.0)


def test_field_linear_in_current():
    p = (0.01, -0.02, 0.04)
    b1 = biot_savart_at(circle(), 1.0, p)
    b2 = biot_savart_at(circle(), 2.0, p)
    assert np.array_equal(b2, 2.0 * b1)


def test_point_inside_conductor_rejected():
    loop = circle()
    on_wire = loop.vertices[0] + np.array([0.0, 0.0, 2e-4])
    with pytest.raises(PointInsideConductorError):
        biot_savart_at(loop, 1.0, on_wire)


def test_quadrature_convergence_rate():
    # polygon loop-center error drops ~4x per segment halving
    exact = MU0 / (2 * LOOP_R)
    errs = []
    for ms in (8e-3, 4e-3, 2e-3):
        b = biot_savart_at(circle(max_segment=ms), 1.0, (0, 0, 0))
        errs.append(abs(np.linalg.norm(b) - exact) / exact)
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] / errs[2] >= 3.5
    assert errs[2] < 1e-3


def test_field_map_matches_pointwise_and_masks():
    loop = circle()
    pts = np.array([[0, 0, 0], [0, 0, 0.05], [LOOP_R, 0, 0]])
    grid = EvalGrid(pts, [0, 0, 0])
    fm = field_map(loop, 1.0, grid)
    assert np.array_equal(fm.masked, [False, False, True])
    assert np.all(fm.b[2] == 0.0)
    for i in range(2):
        assert fm.b[i] == pytest.approx(
            biot_savart_at(loop, 1.0, pts[i]), rel=1e-12)


def test_field_map_superposition():
    a = circle()
    b = circle().translated((0.2, 0.0, 0.0))
    pts = np.array([[0.1, 0.05, 0.02], [0.0, 0.0, 0.1], [0.3, -0.1, 0.0]])
    grid = EvalGrid(pts, [2, 2, 2])
    combined = field_map([a, b], 1.0, grid)
    separate = field_map(a, 1.0, grid).b + field_map(b, 1.0, grid).b
    assert np.linalg.norm(combined.b - separate) <= \
        1e-12 * np.linalg.norm(separate)


def test_field_map_rejects_empty_grid():
    with pytest.raises(ValueError):
        field_map(circle(), 1.0, EvalGrid(np.zeros((0, 3)), []))


def test_far_field_decay_meander_vs_helical():
    # planar balanced meander decays at least one power faster than the
    # same-footprint spiral (moment-cancelled versus dipole); the flat
    # meander is an open path whose unterminated feed leaves a net current
    # element, so measure along that element's axis (x) where its r^-2
    # term vanishes and the true multipole order shows
    meander = build_meander_path(MeanderSpec(0.43, 0.2, 4, lobe_spacing=0.01))
    helical = build_helical_path(HelicalSpec(0.43, 0.2, turns=2))
    s_m = decay_slope(meander, 1.0, (0, 0, 0), (1, 0, 0), 1.0, 10.0)
    s_h = decay_slope(helical, 1.0, (0, 0, 0), (1, 0, 0), 1.0, 10.0)
    assert s_h == pytest.approx(-3.0, abs=0.1)
    assert s_h - s_m >= 0.8


# ---------------------------------------------------------------------------
# Mutual inductance
# ---------------------------------------------------------------------------

def test_mutual_coaxial_elliptic_oracle():
    t0 = time.time()
    top = circle()
    for d in (0.02, 0.05, 0.10):
        res = mutual_inductance(top, top.translated((0, 0, d)))
        assert res.value == pytest.approx(maxwell_mutual(LOOP_R, LOOP_R, d),
                                          rel=5e-3)
        assert res.estimated_relative_error < 5e-3
    assert time.time() - t0 < 5.0


def test_mutual_symmetry():
    a = circle()
    b = build_loop_path(LoopSpec("square", 0.04, turns=1)).translated(
        (0.03, 0.02, 0.06))
    m_ab = mutual_inductance(a, b, estimate_error=False).value
    m_ba = mutual_inductance(b, a, estimate_error=False).value
    assert m_ab == pytest.approx(m_ba, rel=1e-12)


def test_mutual_orthogonal_loops_null():
    a = circle()
    # loop in the xz plane centered on the x axis: A's field has no
    # y component anywhere on the y=0 plane, so the flux linkage vanishes
    b = circle().transformed(
        np.array([[1.0, 0, 0], [0, 0, 1.0], [0, -1.0, 0]]), (0.12, 0, 0))
    m = mutual_inductance(a, b, estimate_error=False).value
    assert abs(m) < 1e-12 * abs(maxwell_mutual(LOOP_R, LOOP_R, 0.12))


def test_mutual_rejects_overlap():
    a = circle()
    with pytest.raises(OverlappingConductorsError):
        mutual_inductance(a, a.translated((0, 0, 5e-4)))


# ---------------------------------------------------------------------------
# Self inductance
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("wire_radius", [1e-3, 5e-4, 2.5e-4])
def test_self_inductance_thin_loop_oracle(wire_radius):
    mat = ConductorMaterial("w", 1.7e-8, wire_radius)
    loop = WirePath(circle().vertices, True, mat)
    res = self_inductance(loop, estimate_error=False)
    assert res.value == pytest.approx(thin_loop_self(LOOP_R, wire_radius),
                                      rel=0.02)
    assert res.value > 0


def test_self_inductance_reference_value():
    # R = 5 cm, a = 0.5 mm: about 294 nH
    assert thin_loop_self(0.05, 5e-4) == pytest.approx(2.943e-7, rel=1e-3)


def test_self_inductance_scales_linearly():
    mat1 = ConductorMaterial("w", 1.7e-8, 5e-4)
    mat3 = ConductorMaterial("w", 1.7e-8, 1.5e-3)
    base = circle()
    l1 = self_inductance(WirePath(base.vertices, True, mat1),
                         estimate_error=False).value
    l3 = self_inductance(WirePath(3.0 * base.vertices, True, mat3),
                         max_segment=6e-3, estimate_error=False).value
    assert l3 == pytest.approx(3.0 * l1, rel=1e-9)


def test_self_inductance_deterministic():
    a = self_inductance(circle(), estimate_error=False).value
    b = self_inductance(circle(), estimate_error=False).value
    assert a == b


def test_self_inductance_requires_closed():
    open_path = WirePath([[0, 0, 0], [0.1, 0, 0], [0.1, 0.1, 0]], False,
                         LIQUID_METAL_THREAD)
    with pytest.raises(OpenPathError):
        self_inductance(open_path)


def test_self_inductance_error_estimate_populated():
    res = self_inductance(circle())
    assert 0 <= res.estimated_relative_error < 0.01


# ---------------------------------------------------------------------------
# Coupling, Q, AC resistance
# ---------------------------------------------------------------------------

def test_coupling_coefficient_definition():
    assert coupling_coefficient(0.0, 1e-6, 1e-6) == 0.0
    assert coupling_coefficient(0.5e-6, 1e-6, 1e-6) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        coupling_coefficient(1e-6, -1e-6, 1e-6)
    with pytest.raises(ValueError):
        coupling_coefficient(2e-6, 1e-6, 1e-6)


def test_coupling_coaxial_pair_physical():
    top = circle()
    bot = top.translated((0, 0, 0.05))
    m = mutual_inductance(top, bot, estimate_error=False).value
    l = self_inductance(top, estimate_error=False).value
    k = coupling_coefficient(m, l, l)
    assert 0.0 < k < 1.0


def test_quality_factor():
    assert quality_factor(1e-6, 1.0, 6.78e6) == pytest.approx(42.6, rel=1e-4)
    assert quality_factor(1e-6, 2.0, 6.78e6) == \
        pytest.approx(quality_factor(1e-6, 1.0, 6.78e6) / 2)
    with pytest.raises(ValueError):
        quality_factor(1e-6, 0.0, 6.78e6)


def one_meter_wire(material):
    return WirePath([[0, 0, 0], [1.0, 0, 0]], False, material)


def test_dc_resistance_liquid_metal():
    r = ac_resistance(one_meter_wire(LIQUID_METAL_THREAD), 0.0)
    assert r == pytest.approx(0.376878, rel=1e-4)


def test_resistivity_contrast():
    r_lm = ac_resistance(one_meter_wire(LIQUID_METAL_THREAD), 0.0)
    r_std = ac_resistance(one_meter_wire(STANDARD_THREAD), 0.0)
    assert r_std / r_lm == pytest.approx(246.6 / 29.6, rel=1e-12)
    assert 8.0 < r_std / r_lm < 8.7


def test_ac_resistance_monotone_and_continuous():
    wire = one_meter_wire(LIQUID_METAL_THREAD)
    freqs = np.geomspace(1e3, 5e7, 200)
    vals = np.array([ac_resistance(wire, float(f)) for f in freqs])
    assert np.all(np.diff(vals) >= -1e-15)
    assert ac_resistance(wire, 6.78e6) >= ac_resistance(wire, 1e3)
    # crossover a/delta = 2 is value- and slope-matched
    f_cross = LIQUID_METAL_THREAD.resistivity * 4 / (
        math.pi * MU0 * LIQUID_METAL_THREAD.wire_radius ** 2)
    lo = ac_resistance(wire, f_cross * 0.999)
    hi = ac_resistance(wire, f_cross * 1.001)
    assert hi == pytest.approx(lo, rel=1e-3)


# ---------------------------------------------------------------------------
# Reduction statistics
# ---------------------------------------------------------------------------

def synthetic_map(b, labels, current=1.0):
    n = len(b)
    grid = EvalGrid(np.arange(3 * n, dtype=float).reshape(n, 3), labels)
    return FieldMap(grid=grid, b=np.asarray(b, dtype=float),
                    source_current=current,
                    masked=np.zeros(n, dtype=bool)), grid


def test_reduction_self_comparison():
    b = np.random.default_rng(0).normal(size=(30, 3)) * 1e-6
    fm, grid = synthetic_map(b, [0] * 10 + [1] * 10 + [2] * 10)
    stats = field_reduction_stats(fm, fm, 10.0)
    for rr in stats.regions.values():
        assert rr.median_db == 0.0
        assert rr.fraction_ge_threshold == 0.0


def test_reduction_pure_scaling():
    b = np.random.default_rng(1).normal(size=(30, 3)) * 1e-6
    ref, grid = synthetic_map(b, [0] * 30)
    test = FieldMap(grid=grid, b=b / math.sqrt(10.0), source_current=1.0,
                    masked=np.zeros(30, dtype=bool))
    stats = field_reduction_stats(test, ref, 10.0)
    assert stats.regions["interior"].median_db == pytest.approx(10.0)
    assert stats.regions["interior"].fraction_ge_threshold == 1.0


def test_reduction_normalizes_current():
    b = np.random.default_rng(2).normal(size=(10, 3)) * 1e-6
    ref, grid = synthetic_map(b, [0] * 10)
    test = FieldMap(grid=grid, b=2.0 * b, source_current=2.0,
                    masked=np.zeros(10, dtype=bool))
    stats = field_reduction_stats(test, ref, 10.0)
    assert stats.regions["interior"].median_db == pytest.approx(0.0, abs=1e-12)


def test_reduction_floor_exclusion():
    b = np.ones((4, 3)) * 1e-6
    ref, grid = synthetic_map(b, [0] * 4)
    weak = b.copy()
    weak[0] = 1e-20                      # test below floor, ref above: kept
    test = FieldMap(grid=grid, b=weak, source_current=1.0,
                    masked=np.zeros(4, dtype=bool))
    stats = field_reduction_stats(test, ref, 10.0)
    assert stats.regions["interior"].count == 4
    both_weak = FieldMap(grid=grid, b=np.full((4, 3), 1e-20),
                         source_current=1.0, masked=np.zeros(4, dtype=bool))
    ref_weak = FieldMap(grid=grid, b=np.full((4, 3), 1e-20),
                        source_current=1.0, masked=np.zeros(4, dtype=bool))
    stats2 = field_reduction_stats(both_weak, ref_weak, 10.0)
    assert stats2.regions["interior"].count == 0


def test_reduction_grid_mismatch():
    b = np.ones((4, 3)) * 1e-6
    a, _ = synthetic_map(b, [0] * 4)
    other = FieldMap(grid=EvalGrid(np.ones((4, 3)), [0] * 4), b=b,
                     source_current=1.0, masked=np.zeros(4, dtype=bool))
    with pytest.raises(GridMismatchError):
        field_reduction_stats(a, other)


def test_distance_to_path():
    loop = circle()
    d = distance_to_path([[0, 0, 0], [LOOP_R, 0, 0.01]], loop)
    assert d[0] == pytest.approx(LOOP_R, rel=1e-3)
    assert d[1] == pytest.approx(0.01, rel=1e-3)
