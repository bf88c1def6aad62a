"""Time integrators: the space curve flow gamma_t = gamma_ss, the graph
flow for branches written as x -> (y, z_1, ...), and the consistency
residual of the projected evolution law.

The space integrator is explicit Euler followed by an arclength
redistribution of the samples every step; the redistribution is a pure
tangential motion of the underlying curve.
"""

from dataclasses import dataclass

import numpy as np

from .curves import ClosedCurve, diameter, projection_geometry


class FlowSingular(RuntimeError):
    """The updated polyline lost discrete immersion (singularity approach)."""


class BranchError(RuntimeError):
    """Branch extraction failed (branches inseparable or non-monotone)."""


@dataclass(frozen=True)
class FlowState:
    curve: ClosedCurve
    t: float = 0.0
    step_index: int = 0


@dataclass(frozen=True)
class FrameSeries:
    frames: list
    stop_reason: str

    def times(self):
        return np.array([f.t for f in self.frames])


@dataclass(frozen=True)
class GraphState:
    """Graph x -> r(x) on a uniform x-grid, r taking values in R^{dim-1}."""

    x_grid: np.ndarray
    r: np.ndarray           # shape (M, dim-1)
    t: float = 0.0

    @property
    def dx(self):
        return float(self.x_grid[1] - self.x_grid[0])


@dataclass(frozen=True)
class RunPolicy:
    safety: float = 0.4
    archive_every: int = 50
    diameter_min: float = 0.02
    curvature_max: float | None = None   # default 1e3 / initial length
    max_steps: int = 2_000_000
    t_max: float | None = None
    check_every: int | None = None
    stop_on_projection_invalid: bool = False
    c_floor: float = 1e-8


def _curvature_vector(pts):
    e_next = np.roll(pts, -1, axis=0) - pts
    e_prev = np.roll(e_next, 1, axis=0)
    h_next = np.linalg.norm(e_next, axis=1)
    h_prev = np.roll(h_next, 1)
    if np.any(h_next == 0.0):
        raise FlowSingular("consecutive samples coincide")
    kvec = (
        2.0
        / (h_prev + h_next)[:, None]
        * (e_next / h_next[:, None] - e_prev / h_prev[:, None])
    )
    return kvec, h_next


def _resample(pts, seg):
    n = pts.shape[0]
    total = np.sum(seg)
    s_nodes = np.empty(n + 1)
    s_nodes[0] = 0.0
    np.cumsum(seg, out=s_nodes[1:])
    closed = np.vstack([pts, pts[:1]])
    s_new = total * np.arange(n) / n
    out = np.empty_like(pts)
    for d in range(pts.shape[1]):
        out[:, d] = np.interp(s_new, s_nodes, closed[:, d])
    return out


def choose_dt(state, safety=0.4):
    """Stability bound dt = safety * (min segment length)^2 / 2."""
    if not (0.0 < safety <= 1.0):
        raise ValueError("safety must lie in (0, 1]")
    h = float(np.min(state.curve.segment_lengths()))
    return safety * h * h / 2.0


def csf_step(state, dt):
    """One explicit Euler step of gamma_t = gamma_ss plus redistribution."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    pts = state.curve.samples
    kvec, _ = _curvature_vector(pts)
    new_pts = pts + dt * kvec
    seg = np.linalg.norm(np.roll(new_pts, -1, axis=0) - new_pts, axis=1)
    if np.any(seg == 0.0):
        raise FlowSingular("updated polyline is not immersed")
    new_pts = _resample(new_pts, seg)
    return FlowState(
        curve=ClosedCurve(new_pts), t=state.t + dt, step_index=state.step_index + 1
    )


def run_flow(curve0, policy=RunPolicy()):
    """Drive the flow until a stop condition, archiving frames at cadence.

    The stepping itself runs in a compiled block kernel; stop conditions
    are evaluated every check_every steps (default: the archive cadence)
    using cheap diameter bounds, with the exact pairwise diameter only
    when the bounds straddle the threshold.
    """
    import math

    from . import _kernel

    pts = np.array(curve0.samples, dtype=float)
    t = 0.0
    step = 0
    frames = [FlowState(curve=ClosedCurve(pts.copy()), t=0.0, step_index=0)]
    seg0 = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    length0 = float(np.sum(seg0))
    kmax_limit = policy.curvature_max if policy.curvature_max is not None else 1e3 / length0
    check_every = policy.check_every or policy.archive_every
    block = math.gcd(check_every, policy.archive_every)
    stop_reason = "step_budget"
    t_max = policy.t_max if policy.t_max is not None else -1.0

    while step < policy.max_steps:
        todo = min(block, policy.max_steps - step)
        pts, t, done, status, kmax = _kernel.flow_block(
            pts, policy.safety, todo, t, t_max
        )
        step += done
        stopped = None
        if status == _kernel.STATUS_SINGULAR:
            stopped = "curvature_above_threshold"
        elif status == _kernel.STATUS_TMAX:
            stopped = "step_budget"
        elif step >= policy.max_steps:
            stopped = "step_budget"

        at_check = step % check_every == 0 or stopped is not None
        if at_check:
            centroid = np.mean(pts, axis=0)
            d1 = float(np.max(np.linalg.norm(pts - centroid, axis=1)))
            below = 2.0 * d1 < policy.diameter_min or (
                d1 < policy.diameter_min and diameter(pts) < policy.diameter_min
            )
            if below:
                stopped = stopped or "diameter_below_threshold"
            elif kmax > kmax_limit and stopped is None:
                stopped = "curvature_above_threshold"
            elif policy.stop_on_projection_invalid and stopped is None:
                tan = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
                tn = np.linalg.norm(tan, axis=1)
                c = (tan[:, 0] ** 2 + tan[:, 1] ** 2) / tn**2
                if np.min(c) < policy.c_floor:
                    stopped = "projection_invalid"
        if step % policy.archive_every == 0 and done > 0 and stopped is None:
            frames.append(FlowState(curve=ClosedCurve(pts.copy()), t=t, step_index=step))
        if stopped is not None:
            stop_reason = stopped
            break
        if done == 0:
            break

    if frames[-1].step_index != step:
        frames.append(FlowState(curve=ClosedCurve(pts.copy()), t=t, step_index=step))
    return FrameSeries(frames=frames, stop_reason=stop_reason)


def graph_step(state, dt, safety_check=True):
    """Explicit Euler step of r_t = r_xx / (1 + |r_x|^2), frozen Dirichlet
    boundary values."""
    dx = state.dx
    if safety_check and dt > dx * dx / 2.0:
        raise ValueError("dt exceeds the stability bound dx^2/2")
    r = state.r
    r_x = (r[2:] - r[:-2]) / (2.0 * dx)
    r_xx = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (dx * dx)
    denom = 1.0 + np.einsum("ij,ij->i", r_x, r_x)
    new_r = r.copy()
    new_r[1:-1] += dt * r_xx / denom[:, None]
    return GraphState(x_grid=state.x_grid, r=new_r, t=state.t + dt)


def graph_curvature(state):
    """Curvature of the graph x -> r(x) at interior nodes via
    sqrt((1+|r_x|^2)|r_xx|^2 - (r_x . r_xx)^2) / (1+|r_x|^2)^{3/2};
    boundary nodes are reported as nan."""
    dx = state.dx
    r = state.r
    r_x = (r[2:] - r[:-2]) / (2.0 * dx)
    r_xx = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (dx * dx)
    g = 1.0 + np.einsum("ij,ij->i", r_x, r_x)
    num = g * np.einsum("ij,ij->i", r_xx, r_xx) - np.einsum("ij,ij->i", r_x, r_xx) ** 2
    num = np.maximum(num, 0.0)
    k = np.sqrt(num) / g**1.5
    out = np.full(r.shape[0], np.nan)
    out[1:-1] = k
    return out


def branch_sample_indices(curve, window):
    """Indices of the upper-branch samples with x inside the window.

    Finds the cyclic runs of samples inside the slab a <= x <= b that exit
    the slab on both sides, and returns the run with the larger y values.
    """
    a, b = window
    if not a < b:
        raise BranchError("empty window")
    x = curve.samples[:, 0]
    n = x.shape[0]
    inside = (x >= a) & (x <= b)
    if not np.any(inside) or np.all(inside):
        raise BranchError("window does not cut the curve")
    # walk cyclic runs of inside samples
    runs = []
    first_out = int(np.nonzero(~inside)[0][0])
    idx_seq = np.arange(first_out, first_out + n) % n
    current = []
    for j in idx_seq:
        if inside[j]:
            current.append(j)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    spanning = []
    for run in runs:
        prev = (run[0] - 1) % n
        nxt = (run[-1] + 1) % n
        lo = min(x[prev], x[nxt])
        hi = max(x[prev], x[nxt])
        if lo < a and hi > b:
            spanning.append(run)
    if len(spanning) < 2:
        raise BranchError("branches cannot be separated over the window")
    spanning.sort(key=lambda run: float(np.mean(curve.samples[run, 1])))
    upper = spanning[-1]
    dx = np.diff(x[upper])
    if not (np.all(dx > 0.0) or np.all(dx < 0.0)):
        raise BranchError("x is not strictly monotone along the branch")
    return np.array(upper)


def extract_graph_branch(curve, window, n_nodes=None):
    """Resample the upper branch over an x-window as a graph on a uniform
    x-grid by monotone interpolation."""
    idx = branch_sample_indices(curve, window)
    n = curve.n
    ext = np.concatenate(([(idx[0] - 1) % n], idx, [(idx[-1] + 1) % n]))
    pts = curve.samples[ext]
    x = pts[:, 0]
    if x[1] < x[0]:  # orient with increasing x
        pts = pts[::-1]
        x = pts[:, 0]
    if np.any(np.diff(x) <= 0.0):
        raise BranchError("x is not strictly monotone along the branch")
    a, b = window
    if n_nodes is None:
        n_nodes = max(9, len(idx))
    grid = np.linspace(a, b, n_nodes)
    r = np.empty((n_nodes, curve.dim - 1))
    for d in range(1, curve.dim):
        r[:, d - 1] = np.interp(grid, x, pts[:, d])
    return GraphState(x_grid=grid, r=r, t=0.0)


def projection_flow_residual(series, c_floor=1e-8):
    """Consistency residual of the projected evolution law per frame pair.

    For consecutive archived frames, compares the normal part of the
    observed projected velocity with c * kbar * Nbar of the earlier frame,
    matching samples by arclength fraction (sample index, since frames are
    arclength-redistributed).  Frame pairs with invalid projection samples
    are skipped (reported as nan).
    """
    out = []
    for f0, f1 in zip(series.frames[:-1], series.frames[1:]):
        dt = f1.t - f0.t
        pg0 = projection_geometry(f0.curve, c_floor=c_floor)
        pg1 = projection_geometry(f1.curve, c_floor=c_floor)
        if not (np.all(pg0.valid) and np.all(pg1.valid)) or dt <= 0.0:
            out.append(float("nan"))
            continue
        vel = (pg1.planar_samples - pg0.planar_samples) / dt
        tbar = np.column_stack([np.cos(pg0.theta), np.sin(pg0.theta)])
        vperp = vel - np.einsum("ij,ij->i", vel, tbar)[:, None] * tbar
        model = pg0.c[:, None] * pg0.kbar[:, None] * pg0.nbar
        out.append(float(np.max(np.linalg.norm(vperp - model, axis=1))))
    return out
