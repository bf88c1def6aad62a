"""Core curve container, resampling, projections and planar measurements."""

import json
import math

import numpy as np
import pytest

from csflow import zoo
from csflow.curves import (
    ClosedCurve,
    CurveError,
    diameter,
    diameter_and_length,
    frame_geometry,
    polygon_area,
    projection_geometry,
    resample_uniform,
    roundness,
    total_turning,
)


def circle(n, r=1.0, dim=2):
    return zoo.make_primitive("circle", {"r": r}, n, dim=dim)


# ---------------------------------------------------------------------------
# container invariants

def test_curve_rejects_short_sample_lists():
    with pytest.raises(CurveError):
        ClosedCurve(np.zeros((4, 2)) + np.arange(4)[:, None])


def test_curve_rejects_coincident_consecutive_samples():
    pts = circle(16).samples.copy()
    pts[5] = pts[6]
    with pytest.raises(CurveError):
        ClosedCurve(pts)


def test_curve_rejects_one_dimensional_ambient():
    with pytest.raises(CurveError):
        ClosedCurve(np.arange(8.0)[:, None])


def test_samples_are_read_only():
    c = circle(16)
    with pytest.raises(ValueError):
        c.samples[0, 0] = 99.0


def test_json_round_trip_is_exact():
    c = zoo.figure_eight_lift(0.2, 64)
    back = ClosedCurve.from_json(c.to_json())
    assert back.dim == 3
    assert np.array_equal(back.samples, c.samples)


def test_json_dim_mismatch_rejected():
    doc = json.loads(circle(16).to_json())
    doc["dim"] = 3
    with pytest.raises(CurveError):
        ClosedCurve.from_json(json.dumps(doc))


# ---------------------------------------------------------------------------
# resampling

def test_resample_circle_keeps_equal_segments():
    out = resample_uniform(circle(64), 128)
    seg = out.segment_lengths()
    assert out.n == 128
    assert seg.max() - seg.min() <= 1e-12


def test_resample_identity_on_already_uniform_curve():
    c = circle(64)
    out = resample_uniform(c, 64)
    assert np.max(np.abs(out.samples - c.samples)) <= 1e-12


def test_resample_spread_along_source_polyline():
    # Segment targets are equispaced in the arclength of the *source*
    # polyline; measure the spacing there, where it should be exact to
    # rounding (chord lengths of the output only agree to O(h^2)).
    src = zoo.figure_eight_lift(0.2, 256)
    out = resample_uniform(src, 256)
    closed = np.vstack([src.samples, src.samples[:1]])
    seglen = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s_nodes = np.concatenate(([0.0], np.cumsum(seglen)))
    total = s_nodes[-1]

    def arc_coord(p):
        best = (np.inf, 0.0)
        for i in range(src.n):
            a, d = closed[i], closed[i + 1] - closed[i]
            t = np.clip(np.dot(p - a, d) / np.dot(d, d), 0.0, 1.0)
            dist = np.linalg.norm(p - (a + t * d))
            if dist < best[0]:
                best = (dist, s_nodes[i] + t * np.linalg.norm(d))
        return best[1]

    s = np.array([arc_coord(p) for p in out.samples])
    gaps = np.diff(np.concatenate([s, [s[0] + total]]))
    assert (gaps.max() - gaps.min()) / gaps.mean() < 1e-9


# ---------------------------------------------------------------------------
# frame geometry

def test_circle_curvature_is_one_over_radius():
    geo = frame_geometry(circle(512, r=2.0))
    assert np.max(np.abs(geo.curvature - 0.5)) <= 1e-4


def test_cardioid_lift_tangent_at_pi_is_straight_down():
    c = zoo.cardioid_lift(0.0, 1024)
    geo = frame_geometry(c)
    assert np.max(np.abs(geo.tangent[512] - np.array([0.0, 0.0, -1.0]))) <= 1e-4


def test_arclength_starts_at_zero_and_sums_to_length():
    c = zoo.figure_eight_lift(0.2, 128)
    geo = frame_geometry(c)
    assert geo.arclength[0] == 0.0
    assert abs(geo.arclength[-1] + c.segment_lengths()[-1] - geo.total_length) <= 1e-12


# ---------------------------------------------------------------------------
# projections

def test_projection_of_lift_is_the_flat_ellipse():
    c = zoo.figure_eight_lift(0.2, 256)
    assert np.max(np.abs(c.samples[:, :2] - zoo.make_primitive(
        "ellipse", {"a": 1.0, "b": 0.2}, 256, dim=2).samples)) <= 1e-12


def test_wave_projection_is_circle_of_radius_eps():
    base = zoo.default_wave_base(128)
    w = zoo.wave_approximation(base, 0.1, 128)
    assert w.dim == 5
    r = np.linalg.norm(w.samples[:, :2], axis=1)
    assert np.max(np.abs(r - 0.1)) <= 1e-12


def test_projection_geometry_unit_circle():
    pg = projection_geometry(circle(256, dim=3))
    assert np.max(np.abs(pg.c - 1.0)) <= 1e-4
    assert np.max(np.abs(pg.kbar - 1.0)) <= 1e-4
    assert np.all(pg.valid)


def test_projection_geometry_tilted_circle_matches_closed_form():
    n = 512
    c = zoo.make_primitive("tilted_circle", {"r": 1.0, "m": 1.0}, n)
    pg = projection_geometry(c)
    u = 2.0 * np.pi * np.arange(n) / n
    # tangent = (-sin u / sqrt2, cos u, -sin u / sqrt2); c = horiz^2 / |.|^2
    num = np.sin(u) ** 2 / 2.0 + np.cos(u) ** 2
    den = num + np.sin(u) ** 2 / 2.0
    assert np.max(np.abs(pg.c - num / den)) <= 1e-6


def test_projection_invalid_at_vertical_tangent():
    c = zoo.cardioid_lift(0.0, 1024)
    pg = projection_geometry(c, c_floor=1e-6)
    assert not pg.valid[512]
    assert pg.c[512] < 1e-6


def test_total_turning_of_convex_loop_is_two_pi():
    pg = projection_geometry(circle(256, dim=3))
    assert abs(total_turning(pg) - 2.0 * np.pi) <= 1e-6


# ---------------------------------------------------------------------------
# diameter, area, roundness

def test_circle_diameter_and_length():
    d, length = diameter_and_length(circle(256))
    assert abs(d - 2.0) <= 1e-3
    assert abs(length - 2.0 * np.pi) <= 1e-3


def test_diameter_two_clusters_is_exact():
    pts = np.array([[0.0, 0.0], [5.0, 0.0]] * 4)
    assert diameter(pts) == 5.0


def test_diameter_matches_independent_brute_force():
    c = zoo.figure_eight_lift(0.2, 512)
    pts = c.samples
    best = 0.0
    for i in range(0, pts.shape[0], 7):   # coarse independent scan
        best = max(best, float(np.max(np.linalg.norm(pts - pts[i], axis=1))))
    assert diameter(pts) >= best
    full = max(
        float(np.max(np.linalg.norm(pts - p, axis=1))) for p in pts
    )
    assert diameter(pts) == full


def test_shoelace_area_of_ccw_circle_is_positive_pi():
    area = polygon_area(circle(512).samples)
    assert abs(area - np.pi) <= 1e-3


def test_roundness_circle_is_one():
    assert abs(roundness(circle(512)) - 1.0) <= 1e-3


def test_roundness_ellipse_matches_perimeter_quadrature():
    u = np.linspace(0.0, 2.0 * np.pi, 200001)
    per = np.trapezoid(np.sqrt(4.0 * np.sin(u) ** 2 + np.cos(u) ** 2), u)
    oracle = per * per / (4.0 * np.pi * (2.0 * np.pi))
    e = zoo.make_primitive("ellipse", {"a": 2.0, "b": 1.0}, 512, dim=2)
    assert abs(roundness(e) - oracle) <= 1e-3


def test_roundness_square_is_four_over_pi():
    side = np.linspace(-1.0, 1.0, 4, endpoint=False)
    pts = ([(x, -1.0) for x in side] + [(1.0, y) for y in side]
           + [(-x, 1.0) for x in side] + [(-1.0, -y) for y in side])
    sq = ClosedCurve(np.array(pts))
    assert abs(roundness(sq) - 4.0 / math.pi) <= 1e-9


def test_roundness_rejects_self_crossing_polygon():
    bowtie = np.array([[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]])
    with pytest.raises(CurveError):
        roundness(bowtie)
