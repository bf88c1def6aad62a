"""Constructors for the named curve families and the perturbation builders.

Every constructor samples on the uniform grid u_j = 2*pi*j/N and returns a
ClosedCurve satisfying the discrete-immersion invariant.
"""

import numpy as np

from .curves import ClosedCurve, CurveError, resample_uniform
from . import predicates


def _grid(n):
    if n < 8:
        raise CurveError("need at least 8 samples")
    return 2.0 * np.pi * np.arange(n) / n


def figure_eight_lift(eps, n):
    """(cos u, eps sin u, sin 2u); eps = 0 is the planar figure eight."""
    u = _grid(n)
    return ClosedCurve(np.column_stack([np.cos(u), eps * np.sin(u), np.sin(2 * u)]))


def cardioid_lift(eps, n):
    """((cos u + 1 - eps) cos u, (cos u + 1 - eps) sin u, sin u).

    The xy-projection at eps = 0 is the standard cardioid; requires an even
    N so that u = pi lands on a grid node.
    """
    if not (0.0 <= eps < 1.0):
        raise CurveError("eps must lie in [0, 1)")
    if n % 2 != 0:
        raise CurveError("N must be even so that u = pi is a grid node")
    u = _grid(n)
    rho = np.cos(u) + 1.0 - eps
    return ClosedCurve(np.column_stack([rho * np.cos(u), rho * np.sin(u), np.sin(u)]))


def wave_approximation(base, eps, n):
    """(eps cos u, eps sin u, base(u)): lifts any closed immersed curve two
    dimensions up so that its xy-projection is the circle of radius |eps|."""
    if eps == 0.0:
        raise CurveError("eps must be nonzero for the lift to shrink to a point")
    resampled = base if base.n == n else resample_uniform(base, n)
    u = _grid(n)
    cols = [eps * np.cos(u), eps * np.sin(u)]
    return ClosedCurve(np.column_stack(cols + [resampled.samples]))


def critical_pair_lift(base, v, eps, n):
    """Lift a curve whose height along v has exactly two critical points.

    Rotates coordinates so v becomes the second axis and prepends a new
    first coordinate that bows the degenerate double-segment projection
    into an ellipse: the new (x, y) samples lie exactly on the ellipse
    (x/eps)^2 + ((y - y_mid)/y_half)^2 = 1.
    """
    if eps == 0.0:
        raise CurveError("eps must be nonzero")
    vv = v.v if isinstance(v, predicates.Direction) else np.asarray(v, dtype=float)
    vv = vv / np.linalg.norm(vv)
    resampled = base if base.n == n else resample_uniform(base, n)
    m = resampled.samples @ vv
    if predicates._mu_of_values(m) != 1 or predicates._mu_of_values(-m) != 1:
        raise CurveError("height along v must have exactly two critical points")

    # orthonormal completion with v first
    d = resampled.dim
    basis = np.eye(d)
    q, _ = np.linalg.qr(np.column_stack([vv, basis]))
    q = q[:, :d]
    if q[:, 0] @ vv < 0:
        q[:, 0] = -q[:, 0]
    rotated = resampled.samples @ q     # column 0 is v . base

    m_mid = 0.5 * (np.max(m) + np.min(m))
    m_half = 0.5 * (np.max(m) - np.min(m))
    mbar = np.clip((m - m_mid) / m_half, -1.0, 1.0)
    # +sqrt branch from the max down to the min, -sqrt branch on the way back
    i_max = int(np.argmax(m))
    i_min = int(np.argmin(m))
    sign = np.empty(n)
    j = i_max
    on_first = True
    for _ in range(n):
        sign[j] = 1.0 if on_first else -1.0
        if j == i_min:
            on_first = False
        j = (j + 1) % n
    sign[i_max] = 1.0
    new_x = eps * sign * np.sqrt(np.maximum(0.0, 1.0 - mbar * mbar))
    return ClosedCurve(np.column_stack([new_x, rotated]))


def make_primitive(kind, params, n, dim=3):
    """Fixtures: circle, ellipse, or a circle tilted into the plane z = m x."""
    u = _grid(n)
    if kind == "circle":
        r = float(params.get("r", 1.0))
        if r <= 0:
            raise CurveError("radius must be positive")
        cols = [r * np.cos(u), r * np.sin(u)]
    elif kind == "ellipse":
        a = float(params.get("a", 2.0))
        b = float(params.get("b", 1.0))
        if a <= 0 or b <= 0:
            raise CurveError("radii must be positive")
        cols = [a * np.cos(u), b * np.sin(u)]
    elif kind == "tilted_circle":
        r = float(params.get("r", 1.0))
        m = float(params.get("m", 1.0))
        if r <= 0 or m < 0:
            raise CurveError("need r > 0 and m >= 0")
        # unit circle in the plane z = m x: span{(1,0,m)/sqrt(1+m^2), (0,1,0)}
        e1 = np.array([1.0, 0.0, m]) / np.hypot(1.0, m)
        e2 = np.array([0.0, 1.0, 0.0])
        pts = r * (np.outer(np.cos(u), e1) + np.outer(np.sin(u), e2))
        return ClosedCurve(pts)
    else:
        raise CurveError("unknown primitive %r" % kind)
    pts = np.column_stack(cols + [np.zeros((n, dim - 2))]) if dim > 2 else np.column_stack(cols)
    return ClosedCurve(pts)


def random_convex_projection(seed, n_ambient, harmonics, n, retries=8):
    """Random lift with a uniformly convex planar projection.

    The projection is built from a support function h(theta) = 1 + small
    random harmonics with coefficients shrunk until h + h'' > 0, which
    guarantees positive curvature; the extra coordinates are random smooth
    waves of bounded slope.  Deterministic in the seed.
    """
    if n_ambient < 3:
        raise CurveError("ambient dimension must be >= 3")
    rng = np.random.default_rng(seed)
    u = _grid(n)
    modes = np.arange(2, 2 + harmonics)
    a = 0.05 * rng.standard_normal(harmonics)
    b = 0.05 * rng.standard_normal(harmonics)
    for _ in range(retries + 1):
        h = np.ones_like(u)
        hp = np.zeros_like(u)
        hpp = np.zeros_like(u)
        for m, am, bm in zip(modes, a, b):
            h += am * np.cos(m * u) + bm * np.sin(m * u)
            hp += m * (-am * np.sin(m * u) + bm * np.cos(m * u))
            hpp += m * m * (-am * np.cos(m * u) - bm * np.sin(m * u))
        if np.all(h + hpp > 0.05):
            break
        a *= 0.5
        b *= 0.5
    else:
        raise CurveError("could not build a convex support function")
    x = h * np.cos(u) - hp * np.sin(u)
    y = h * np.sin(u) + hp * np.cos(u)
    cols = [x, y]
    for _ in range(n_ambient - 2):
        z = np.zeros_like(u)
        for m in range(1, 4):
            z += 0.1 / m * (
                rng.standard_normal() * np.cos(m * u)
                + rng.standard_normal() * np.sin(m * u)
            )
        cols.append(z)
    return ClosedCurve(np.column_stack(cols))


FAMILIES = {
    "figure_eight_lift": {"eps": 0.2},
    "cardioid_lift": {"eps": 0.05},
    "wave_approximation": {"eps": 0.1},
    "circle": {"r": 1.0},
    "ellipse": {"a": 2.0, "b": 1.0},
    "tilted_circle": {"r": 1.0, "m": 1.0},
    "random_convex_projection": {"seed": 0, "dim": 3, "harmonics": 3},
}


def build(family, params, n):
    """Build a zoo curve by family name with a flat parameter map."""
    p = dict(params)
    if family == "figure_eight_lift":
        return figure_eight_lift(float(p.get("eps", 0.2)), n)
    if family == "cardioid_lift":
        return cardioid_lift(float(p.get("eps", 0.05)), n)
    if family == "wave_approximation":
        base = default_wave_base(n)
        return wave_approximation(base, float(p.get("eps", 0.1)), n)
    if family in ("circle", "ellipse", "tilted_circle"):
        return make_primitive(family, p, n, dim=int(p.get("dim", 3)))
    if family == "random_convex_projection":
        return random_convex_projection(
            int(p.get("seed", 0)), int(p.get("dim", 3)), int(p.get("harmonics", 3)), n
        )
    raise CurveError("unknown family %r" % family)


def default_wave_base(n, scale=0.15):
    """A small closed space curve in R^3 used as the stock wave-lift base."""
    u = _grid(n)
    return ClosedCurve(
        scale * np.column_stack([np.cos(u), np.sin(u), 0.5 * np.sin(2 * u)])
    )
