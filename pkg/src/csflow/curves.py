"""Closed polyline curves and per-sample differential geometry.

A closed curve is stored as N samples on the uniform parameter grid
u_j = 2*pi*j/N with periodic closure.  All derivative quantities are
computed with periodic centered differences; second derivatives use the
standard nonuniform three-point stencil in arclength.
"""

import json
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


class CurveError(ValueError):
    """Raised when curve invariants are violated."""


@dataclass(frozen=True)
class ClosedCurve:
    """Closed polyline sample of an immersed curve in R^dim.

    samples has shape (N, dim) with N >= 8; consecutive samples (including
    the wrap-around pair) must be distinct.
    """

    samples: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.samples, dtype=float)
        if pts.ndim != 2:
            raise CurveError("samples must be a 2-d array of points")
        n, d = pts.shape
        if d < 2:
            raise CurveError("ambient dimension must be >= 2")
        if n < 8:
            raise CurveError("need at least 8 samples, got %d" % n)
        seg = np.roll(pts, -1, axis=0) - pts
        if np.any(np.linalg.norm(seg, axis=1) == 0.0):
            raise CurveError("consecutive samples coincide (not immersed)")
        pts.setflags(write=False)
        object.__setattr__(self, "samples", pts)
        object.__setattr__(self, "dim", d)

    @property
    def n(self):
        return self.samples.shape[0]

    def segment_lengths(self):
        seg = np.roll(self.samples, -1, axis=0) - self.samples
        return np.linalg.norm(seg, axis=1)

    def to_json(self):
        return json.dumps(
            {"dim": self.dim, "samples": [[float(x) for x in p] for p in self.samples]}
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        pts = np.asarray(doc["samples"], dtype=float)
        if pts.shape[1] != doc["dim"]:
            raise CurveError("snapshot dim field disagrees with sample width")
        return cls(pts)


@dataclass(frozen=True)
class FrameGeometry:
    """Per-sample differential quantities of a space curve."""

    speed: np.ndarray            # |gamma_u|
    tangent: np.ndarray          # unit T, shape (N, dim)
    curvature_vector: np.ndarray  # gamma_ss
    curvature: np.ndarray        # k = |gamma_ss|
    arclength: np.ndarray        # cumulative s, arclength[0] = 0
    total_length: float


@dataclass(frozen=True)
class ProjectionGeometry:
    """Per-sample quantities of the xy-projection of a space curve."""

    planar_samples: np.ndarray   # (N, 2)
    kbar: np.ndarray             # signed planar curvature, CCW positive
    theta: np.ndarray            # unwrapped tangent angle
    nbar: np.ndarray             # unit left normal of the projection
    c: np.ndarray                # x_s^2 + y_s^2 (space arclength s)
    valid: np.ndarray            # bool mask, False where c < c_floor


def _centered_diff(pts):
    """(P_{j+1} - P_{j-1}) on the periodic grid."""
    return np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)


def _second_diff_arclength(pts):
    """Nonuniform periodic three-point second derivative in arclength."""
    e_next = np.roll(pts, -1, axis=0) - pts
    e_prev = pts - np.roll(pts, 1, axis=0)
    h_next = np.linalg.norm(e_next, axis=1)
    h_prev = np.linalg.norm(e_prev, axis=1)
    return (
        2.0
        / (h_prev + h_next)[:, None]
        * (e_next / h_next[:, None] - e_prev / h_prev[:, None])
    )


def frame_geometry(curve):
    """Speed, unit tangent, curvature vector and arclength of a closed curve."""
    pts = curve.samples
    n = pts.shape[0]
    du = TWO_PI / n
    diff = _centered_diff(pts)
    norm = np.linalg.norm(diff, axis=1)
    if np.any(norm == 0.0):
        raise CurveError("degenerate centered difference (back-and-forth curve)")
    speed = norm / (2.0 * du)
    tangent = diff / norm[:, None]
    kvec = _second_diff_arclength(pts)
    seg = curve.segment_lengths()
    arclength = np.concatenate(([0.0], np.cumsum(seg[:-1])))
    return FrameGeometry(
        speed=speed,
        tangent=tangent,
        curvature_vector=kvec,
        curvature=np.linalg.norm(kvec, axis=1),
        arclength=arclength,
        total_length=float(np.sum(seg)),
    )


def resample_uniform(curve, n_out):
    """Redistribute samples equidistantly in arclength along the polyline.

    Sample 0 of the output coincides with sample 0 of the input; total
    length of the piecewise-linear interpolant is preserved.
    """
    if n_out < 8:
        raise CurveError("n_out must be >= 8")
    pts = curve.samples
    seg = curve.segment_lengths()
    if np.any(seg == 0.0):
        raise CurveError("degenerate segment of zero length")
    total = np.sum(seg)
    s_nodes = np.concatenate(([0.0], np.cumsum(seg)))
    closed = np.vstack([pts, pts[:1]])
    s_new = total * np.arange(n_out) / n_out
    out = np.empty((n_out, curve.dim))
    for d in range(curve.dim):
        out[:, d] = np.interp(s_new, s_nodes, closed[:, d])
    return ClosedCurve(out)


def project(curve, coords=(0, 1)):
    """Coordinate projection onto the listed axes, same parameter grid.

    The result may fail the discrete-immersion invariant, so it is
    returned as a bare array wrapper only when immersed; otherwise the
    raw samples are returned with ``flagged=True``.
    """
    idx = list(coords)
    pts = curve.samples[:, idx]
    seg = np.roll(pts, -1, axis=0) - pts
    if np.any(np.linalg.norm(seg, axis=1) == 0.0):
        return pts, True
    return ClosedCurve(pts), False


def projection_curve(curve, coords=(0, 1)):
    """Projected sample array regardless of immersion, shape (N, len(coords))."""
    return curve.samples[:, list(coords)]


def projection_geometry(curve, c_floor=1e-8):
    """Planar geometry of the xy-projection, driven by space-curve arclength.

    c = x_s^2 + y_s^2 is read off the unit space tangent.  Where c falls
    below c_floor the projection frame is marked invalid; the planar
    quantities at those samples are not meaningful.
    """
    geo = frame_geometry(curve)
    t_xy = geo.tangent[:, :2]
    c = np.einsum("ij,ij->i", t_xy, t_xy)
    valid = c >= c_floor
    planar = curve.samples[:, :2]

    # Planar unit tangent and signed curvature from the projected polyline.
    diff = _centered_diff(planar)
    norm = np.linalg.norm(diff, axis=1)
    safe = np.where(norm > 0.0, norm, 1.0)
    tbar = diff / safe[:, None]
    theta_raw = np.arctan2(tbar[:, 1], tbar[:, 0])
    inc = np.diff(theta_raw)
    inc = (inc + np.pi) % TWO_PI - np.pi
    theta = np.concatenate(([theta_raw[0]], theta_raw[0] + np.cumsum(inc)))
    nbar = np.column_stack([-np.sin(theta), np.cos(theta)])

    with np.errstate(divide="ignore", invalid="ignore"):
        dd = _planar_second_diff(planar)
    kbar = tbar[:, 0] * dd[:, 1] - tbar[:, 1] * dd[:, 0]
    kbar = np.where(np.isfinite(kbar), kbar, 0.0)
    return ProjectionGeometry(
        planar_samples=planar, kbar=kbar, theta=theta, nbar=nbar, c=c, valid=valid
    )


def _planar_second_diff(planar):
    """Second derivative of the projection in its own arclength."""
    e_next = np.roll(planar, -1, axis=0) - planar
    e_prev = planar - np.roll(planar, 1, axis=0)
    h_next = np.linalg.norm(e_next, axis=1)
    h_prev = np.linalg.norm(e_prev, axis=1)
    h_next = np.where(h_next > 0.0, h_next, np.nan)
    h_prev = np.where(h_prev > 0.0, h_prev, np.nan)
    return (
        2.0
        / (h_prev + h_next)[:, None]
        * (e_next / h_next[:, None] - e_prev / h_prev[:, None])
    )


def total_turning(proj_geo):
    """Total turning of the projection over the closed grid (multiple of 2*pi)."""
    theta = proj_geo.theta
    wrap = (theta[0] - theta[-1] + np.pi) % TWO_PI - np.pi
    return float(theta[-1] - theta[0] + wrap)


def diameter(points):
    """Exact max pairwise distance, O(N^2) scan."""
    pts = np.asarray(points, dtype=float)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(np.max(d2)))


def diameter_and_length(curve):
    """Exact diameter over all sample pairs and the polyline length."""
    return diameter(curve.samples), float(np.sum(curve.segment_lengths()))


def polygon_area(planar):
    """Signed shoelace area of a closed planar polygon."""
    x = planar[:, 0]
    y = planar[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def roundness(planar_curve):
    """Isoperimetric ratio L^2 / (4*pi*A) of a simple closed planar curve."""
    from . import predicates

    pts = planar_curve.samples if isinstance(planar_curve, ClosedCurve) else np.asarray(planar_curve)
    if pts.shape[1] != 2:
        raise CurveError("roundness needs a planar curve")
    if not predicates.is_simple_polygon(pts):
        raise CurveError("roundness rejects self-intersecting curves")
    seg = np.roll(pts, -1, axis=0) - pts
    length = float(np.sum(np.linalg.norm(seg, axis=1)))
    area = abs(polygon_area(pts))
    return length * length / (4.0 * np.pi * area)
