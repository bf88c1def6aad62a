"""The decaying-sine subsolution and its comparison checks."""

import math

import numpy as np
import pytest

import csflow as cs
from csflow import barriers, zoo
from csflow.barriers import Barrier
from csflow.flow import BranchError, FlowState, FrameSeries, extract_graph_branch


def circle(n, r=1.0):
    return zoo.make_primitive("circle", {"r": r}, n, dim=2)


def flat_topped_loop():
    """Closed polygon with a straight top edge y = 1 over x in [-2, 2]."""
    top_x = np.linspace(-2.0, 2.0, 9)
    pts = ([(x, 1.0) for x in top_x] + [(2.0, 0.0)]
           + [(x, -1.0) for x in top_x[::-1]] + [(-2.0, 0.0)])
    return cs.ClosedCurve(np.array(pts))


# ---------------------------------------------------------------------------
# the barrier itself

def test_barrier_field_validation():
    with pytest.raises(ValueError):
        Barrier(M=0.0, epsilon=0.1, lam=1.0)
    with pytest.raises(ValueError):
        Barrier(M=2.0, epsilon=0.0, lam=10.0)
    with pytest.raises(ValueError):
        Barrier(M=2.0, epsilon=0.1, lam=0.5 * barriers.default_rate(2.0))


def test_barrier_value_midpoint_endpoints_and_decay():
    b = Barrier(M=2.0, epsilon=0.1, lam=barriers.default_rate(2.0))
    assert abs(barriers.barrier_value(b, 1.0, 0.0) - 0.1) <= 1e-15
    assert abs(barriers.barrier_value(b, 0.0, 0.0)) <= 1e-15
    assert abs(barriers.barrier_value(b, 2.0, 0.0)) <= 1e-12
    expect = 0.1 * math.exp(-math.pi ** 2 / 4.0)
    assert abs(barriers.barrier_value(b, 1.0, 1.0) - expect) <= 1e-12


def test_barrier_value_rejects_out_of_window_and_negative_time():
    b = Barrier(M=2.0, epsilon=0.1, lam=barriers.default_rate(2.0))
    with pytest.raises(ValueError):
        barriers.barrier_value(b, 2.5, 0.0)
    with pytest.raises(ValueError):
        barriers.barrier_value(b, 1.0, -0.1)


def test_barrier_scales_linearly_in_epsilon():
    b1 = Barrier(M=2.0, epsilon=0.1, lam=barriers.default_rate(2.0))
    b3 = Barrier(M=2.0, epsilon=0.3, lam=barriers.default_rate(2.0))
    x = np.linspace(0.0, 2.0, 11)
    assert np.max(np.abs(barriers.barrier_value(b3, x, 0.7)
                         - 3.0 * barriers.barrier_value(b1, x, 0.7))) <= 1e-15


# ---------------------------------------------------------------------------
# calibration

def test_calibrate_constant_field_gives_099():
    x = np.linspace(0.0, 2.0, 41)
    branch = cs.GraphState(x_grid=x, r=np.ones((41, 1)), t=0.0)
    tpl = Barrier(M=2.0, epsilon=1.0, lam=barriers.default_rate(2.0))
    b = barriers.calibrate_epsilon(branch, np.ones(41), tpl)
    assert abs(b.epsilon - 0.99) <= 1e-12


def test_calibrate_sine_field_gives_099():
    x = np.linspace(0.0, 2.0, 41)
    field = np.sin(np.pi * x / 2.0)
    branch = cs.GraphState(x_grid=x, r=field[:, None], t=0.0)
    tpl = Barrier(M=2.0, epsilon=1.0, lam=barriers.default_rate(2.0))
    b = barriers.calibrate_epsilon(branch, field, tpl)
    assert abs(b.epsilon - 0.99) <= 1e-12


def test_calibrated_circle_branch_dominates_barrier():
    branch = extract_graph_branch(circle(512), (-0.5, 0.5), n_nodes=51)
    tpl = Barrier(M=1.0, epsilon=1.0, lam=barriers.default_rate(1.0),
                  x_offset=-0.5)
    b = barriers.calibrate_epsilon(branch, branch.r[:, 0], tpl)
    phi = barriers.barrier_value(b, branch.x_grid, 0.0)
    assert np.all(branch.r[:, 0] - phi >= 0.0)


def test_calibrate_rejects_nonpositive_field():
    x = np.linspace(0.0, 2.0, 11)
    branch = cs.GraphState(x_grid=x, r=np.ones((11, 1)), t=0.0)
    field = np.ones(11)
    field[5] = -0.1
    tpl = Barrier(M=2.0, epsilon=1.0, lam=barriers.default_rate(2.0))
    with pytest.raises(ValueError):
        barriers.calibrate_epsilon(branch, field, tpl)


# ---------------------------------------------------------------------------
# subsolution residual

def test_residual_zero_on_static_straight_branch():
    # |x_s| = 1 on the flat top, so (pi x_s / M)^2 - lam vanishes at the
    # weakest admissible rate: the equality case of the subsolution law.
    loop = flat_topped_loop()
    series = FrameSeries(
        frames=[FlowState(curve=loop, t=0.0),
                FlowState(curve=loop, t=0.001, step_index=1)],
        stop_reason="step_budget")
    b = Barrier(M=2.0, epsilon=0.5, lam=barriers.default_rate(2.0),
                x_offset=-1.0)
    assert abs(barriers.subsolution_residual(b, series, (-1.0, 1.0))) <= 1e-6


def test_residual_negative_on_curved_branch_and_monotone_in_rate():
    series = FrameSeries(frames=[FlowState(curve=circle(512), t=0.0)],
                         stop_reason="step_budget")
    lam0 = barriers.default_rate(1.0)
    b = Barrier(M=1.0, epsilon=0.3, lam=lam0, x_offset=-0.5)
    res = barriers.subsolution_residual(b, series, (-0.5, 0.5))
    assert res < 0.0 + 1e-4
    b2 = Barrier(M=1.0, epsilon=0.3, lam=2.0 * lam0, x_offset=-0.5)
    assert barriers.subsolution_residual(b2, series, (-0.5, 0.5)) < res


def test_residual_raises_when_no_frame_admits_window():
    series = FrameSeries(frames=[FlowState(curve=circle(64), t=0.0)],
                         stop_reason="step_budget")
    b = Barrier(M=1.0, epsilon=0.1, lam=barriers.default_rate(1.0),
                x_offset=4.0)
    with pytest.raises(BranchError):
        barriers.subsolution_residual(b, series, (4.0, 5.0))


# ---------------------------------------------------------------------------
# comparison checks

@pytest.fixture(scope="module")
def circle_series(warm_kernel):
    return cs.run_flow(circle(512), cs.RunPolicy(archive_every=200,
                                                 check_every=200, t_max=0.05))


def test_comparison_holds_for_circle_height(circle_series):
    branch0 = extract_graph_branch(circle_series.frames[0].curve, (-0.5, 0.5))
    tpl = Barrier(M=1.0, epsilon=1.0, lam=barriers.default_rate(1.0),
                  x_offset=-0.5)
    b = barriers.calibrate_epsilon(branch0, branch0.r[:, 0], tpl)
    ok, margins = barriers.comparison_check(circle_series, b, "y", (-0.5, 0.5))
    assert ok
    assert np.nanmin(margins) >= -1e-6


def test_comparison_holds_for_circle_horizontal_speed(circle_series):
    # on the upper branch of the unit circle x_s equals y: positive and
    # bounded below by cos(asin(0.5)) on the window
    idx_curve = circle_series.frames[0].curve
    branch0 = extract_graph_branch(idx_curve, (-0.5, 0.5))
    field = np.sqrt(1.0 - branch0.x_grid ** 2)    # analytic x_s at t=0
    tpl = Barrier(M=1.0, epsilon=1.0, lam=barriers.default_rate(1.0),
                  x_offset=-0.5)
    b = barriers.calibrate_epsilon(branch0, 0.9 * field, tpl)
    ok, _ = barriers.comparison_check(circle_series, b, "x_s", (-0.5, 0.5))
    assert ok


def test_comparison_fails_after_doubling_epsilon(circle_series):
    branch0 = extract_graph_branch(circle_series.frames[0].curve, (-0.5, 0.5))
    tpl = Barrier(M=1.0, epsilon=1.0, lam=barriers.default_rate(1.0),
                  x_offset=-0.5)
    b = barriers.calibrate_epsilon(branch0, branch0.r[:, 0], tpl)
    sabotaged = Barrier(M=b.M, epsilon=2.0 * b.epsilon, lam=b.lam,
                        x_offset=b.x_offset)
    ok, margins = barriers.comparison_check(circle_series, sabotaged, "y",
                                            (-0.5, 0.5))
    assert not ok
    assert margins[0] < -1e-6


def test_comparison_rejects_unknown_field():
    series = FrameSeries(frames=[FlowState(curve=circle(64), t=0.0)],
                         stop_reason="step_budget")
    b = Barrier(M=1.0, epsilon=0.1, lam=barriers.default_rate(1.0),
                x_offset=-0.5)
    with pytest.raises(ValueError):
        barriers.comparison_check(series, b, "z", (-0.5, 0.5))
