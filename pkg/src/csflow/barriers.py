"""The explicit heat subsolution phi = eps * e^{-lambda t} sin(pi x / M)
and the comparison checks it powers: branch positivity and gradient lower
bounds along a flow run.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .curves import frame_geometry
from .flow import BranchError, branch_sample_indices


@dataclass(frozen=True)
class Barrier:
    """Window [x_offset, x_offset + M], amplitude epsilon and decay rate
    lam >= pi^2 / M^2."""

    M: float
    epsilon: float
    lam: float
    x_offset: float = 0.0

    def __post_init__(self):
        if self.M <= 0.0:
            raise ValueError("window width must be positive")
        if self.epsilon <= 0.0:
            raise ValueError("amplitude must be positive")
        if self.lam < math.pi**2 / self.M**2 * (1.0 - 1e-12):
            raise ValueError("rate must satisfy lam >= pi^2 / M^2")


@dataclass(frozen=True)
class BranchTrace:
    frames: list          # (t, GraphState) pairs
    window: tuple


def default_rate(m_width):
    """The weakest admissible decay rate pi^2 / M^2."""
    return math.pi**2 / m_width**2


def barrier_value(b, x, t):
    """phi(x, t) = eps e^{-lam t} sin(pi (x - x_offset) / M)."""
    x = np.asarray(x, dtype=float)
    rel = x - b.x_offset
    if np.any(rel < -1e-12 * b.M) or np.any(rel > b.M * (1.0 + 1e-12)):
        raise ValueError("x outside the barrier window")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    out = b.epsilon * math.exp(-b.lam * t) * np.sin(np.pi * np.clip(rel, 0.0, b.M) / b.M)
    return float(out) if out.ndim == 0 else out


def calibrate_epsilon(branch, field, b_template, margin=0.99):
    """Shrink the amplitude so that field >= phi at t = 0 on the window.

    field holds per-node values over branch.x_grid; the amplitude becomes
    margin * min(field / sin) over interior nodes.
    """
    field = np.asarray(field, dtype=float)
    x = branch.x_grid
    interior = slice(1, -1)
    if np.any(field[interior] <= 0.0):
        raise ValueError("comparison field must be positive at interior nodes")
    s = np.sin(np.pi * (x[interior] - b_template.x_offset) / b_template.M)
    s = np.maximum(s, 1e-300)
    eps = margin * float(np.min(field[interior] / s))
    return replace(b_template, epsilon=eps)


def _window_fields(curve, b, window):
    """Per-sample (x, x_s, theta) of the upper branch inside the window.

    x_s is reported with the orientation of increasing x, decided from the
    flanking samples just outside the window so that it stays well defined
    even when only one sample falls inside.
    """
    idx = branch_sample_indices(curve, window)
    geo = frame_geometry(curve)
    x = curve.samples[idx, 0]
    n = curve.n
    x_prev = curve.samples[(idx[0] - 1) % n, 0]
    x_next = curve.samples[(idx[-1] + 1) % n, 0]
    x_s = geo.tangent[idx, 0]
    if x_next < x_prev:
        x_s = -x_s
    theta = np.pi * (x - b.x_offset) / b.M
    return idx, x, x_s, theta, geo


def subsolution_residual(b, series, window):
    """Max of the discrete phi_t - phi_ss over the tracked branch.

    phi_t uses the material law x_t = x_ss with the same stencil that
    enters phi_ss, so the cos-theta terms cancel and the residual reduces
    to eps e^{-lam t} sin(theta) ((pi x_s / M)^2 - lam), evaluated with the
    discrete unit-tangent x_s.  Frames whose branch leaves the window are
    skipped.
    """
    worst = -math.inf
    seen = 0
    for frame in series.frames:
        try:
            idx, x, x_s, theta, _ = _window_fields(frame.curve, b, window)
        except BranchError:
            continue
        seen += 1
        amp = b.epsilon * math.exp(-b.lam * frame.t)
        res = amp * np.sin(theta) * ((np.pi * x_s / b.M) ** 2 - b.lam)
        worst = max(worst, float(np.max(res)))
    if seen == 0:
        raise BranchError("no frame admits the window")
    return worst


def comparison_check(series, b, field_selector, window, boundary_floor=1e-8):
    """field >= phi - 1e-6 at all window samples of all frames.

    field_selector is 'y' (branch height) or 'x_s' (horizontal speed along
    the branch, taken with the branch orientation of increasing x).
    Returns (passed, per-frame minimum margins).
    """
    if field_selector not in ("y", "x_s"):
        raise ValueError("field_selector must be 'y' or 'x_s'")
    margins = []
    passed = True
    for frame in series.frames:
        try:
            idx, x, x_s, theta, geo = _window_fields(frame.curve, b, window)
        except BranchError:
            margins.append(float("nan"))
            continue
        if field_selector == "y":
            field = frame.curve.samples[idx, 1]
        else:
            field = x_s   # already oriented with increasing x
        if field[0] <= boundary_floor or field[-1] <= boundary_floor:
            passed = False
        phi = b.epsilon * math.exp(-b.lam * frame.t) * np.sin(np.clip(theta, 0.0, np.pi))
        margin = float(np.min(field - phi))
        margins.append(margin)
        if margin < -1e-6:
            passed = False
    return passed, margins
