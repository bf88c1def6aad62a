"""Numerical laboratory for curve shortening flow of closed space curves."""

from .curves import (
    ClosedCurve,
    CurveError,
    FrameGeometry,
    ProjectionGeometry,
    diameter_and_length,
    frame_geometry,
    project,
    projection_geometry,
    resample_uniform,
    roundness,
)
from .flow import (
    FlowState,
    FrameSeries,
    GraphState,
    RunPolicy,
    choose_dt,
    csf_step,
    extract_graph_branch,
    graph_curvature,
    graph_step,
    projection_flow_residual,
    run_flow,
)
from .predicates import (
    ConvexityVerdict,
    Direction,
    Plane,
    SlopeSummary,
    check_diameter_bound,
    convexity_check,
    line_slope,
    mu_count,
    plane_intersection_count,
    plane_slope,
    sign_change_count,
    slope_profile,
    vertical_tangent_gap,
)
from .barriers import Barrier, barrier_value, calibrate_epsilon, comparison_check, subsolution_residual

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
