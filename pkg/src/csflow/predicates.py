"""Geometric predicates: convexity notions, height-function counts,
verticality, slopes and the three-point constant estimator.

All predicates are pure functions of a ClosedCurve; counting predicates
skip magnitudes below a fixed zero threshold so that the discrete counts
track the transversal crossings of the continuum quantities.
"""

import math
from dataclasses import dataclass

import numpy as np

from .curves import diameter, frame_geometry, projection_geometry

ZERO_TOL = 1e-10
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """A fixed unit direction; horizontal means only the first two
    components are nonzero."""

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
            raise ValueError("direction must be a unit vector")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def horizontal(self):
        return bool(np.all(self.v[2:] == 0.0))


@dataclass(frozen=True)
class Plane:
    """Plane {p : normal . p = offset} in R^3."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.shape != (3,):
            raise ValueError("plane normal must live in R^3")
        if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            raise ValueError("plane normal must be a unit vector")
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)


@dataclass(frozen=True)
class SlopeSummary:
    s_tangent_max: float
    s_secant_max: float
    s_osculating_max: float | None   # None when curvature vanishes somewhere
    delta_triple: float
    budget_used: int


@dataclass(frozen=True)
class ConvexityVerdict:
    injective_projection: bool
    simple: bool
    convex: bool
    strictly_convex: bool
    uniformly_convex: bool
    min_kbar: float
    min_c: float
    projection_valid: bool

    def as_dict(self):
        return {
            "injective_projection": self.injective_projection,
            "simple": self.simple,
            "convex": self.convex,
            "strictly_convex": self.strictly_convex,
            "uniformly_convex": self.uniformly_convex,
            "min_kbar": self.min_kbar,
            "min_c": self.min_c,
            "projection_valid": self.projection_valid,
        }


def _as_vec(v):
    return v.v if isinstance(v, Direction) else np.asarray(v, dtype=float)


def _compress_cyclic(values, tol):
    """Merge cyclic runs of values equal within tol, one representative each."""
    n = len(values)
    keep = [0]
    for i in range(1, n):
        if abs(values[i] - values[keep[-1]]) > tol:
            keep.append(i)
    # merge wrap-around run
    while len(keep) > 1 and abs(values[keep[-1]] - values[keep[0]]) <= tol:
        keep.pop()
    return values[np.array(keep)]


def mu_count(curve, v):
    """Number of strict local maxima of v . gamma over the periodic grid."""
    vals = curve.samples @ _as_vec(v)
    return _mu_of_values(vals)


def _mu_of_values(vals):
    reps = _compress_cyclic(np.asarray(vals, dtype=float), ZERO_TOL)
    m = len(reps)
    if m < 2:
        return 0
    nxt = np.roll(reps, -1)
    prv = np.roll(reps, 1)
    return int(np.sum((reps > prv) & (reps > nxt)))


def sign_change_count(curve, v):
    """Cyclic sign changes of v . T over the grid, skipping near-zero entries."""
    geo = frame_geometry(curve)
    vt = geo.tangent @ _as_vec(v)
    return cyclic_sign_changes(vt)


def cyclic_sign_changes(values, tol=ZERO_TOL):
    signs = np.sign(values[np.abs(values) >= tol])
    if signs.size == 0:
        return 0
    return int(np.sum(signs != np.roll(signs, 1)))


def is_simple_polygon(pts, tol=0.0):
    """True iff the closed polyline has no proper self-crossing.

    Adjacent segments sharing an endpoint are exempt; coincident
    non-adjacent vertices or overlapping collinear segments count as
    crossings.
    """
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[0]
    scale = diameter(pts)
    if scale == 0.0:
        return False
    # coincident non-adjacent vertices
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    gap = np.minimum((ii - jj) % n, (jj - ii) % n)
    if np.any(d2[gap > 1] < (1e-12 * scale) ** 2):
        return False
    a = pts
    b = np.roll(pts, -1, axis=0)
    return not _any_proper_crossing(a, b, scale)


def _any_proper_crossing(a, b, scale):
    """Check all non-adjacent segment pairs of a closed polyline."""
    n = a.shape[0]
    r = b - a
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    mask = jj > ii + 1
    mask &= ~((ii == 0) & (jj == n - 1))
    i, j = np.nonzero(mask)
    p, q = a[i], a[j]
    rp, rq = r[i], r[j]
    w = q - p
    cross_rs = rp[:, 0] * rq[:, 1] - rp[:, 1] * rq[:, 0]
    c1 = w[:, 0] * rq[:, 1] - w[:, 1] * rq[:, 0]
    c2 = w[:, 0] * rp[:, 1] - w[:, 1] * rp[:, 0]
    eps = 1e-14 * scale * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        t = c1 / cross_rs
        u = c2 / cross_rs
    proper = (np.abs(cross_rs) > eps) & (t > 0) & (t < 1) & (u > 0) & (u < 1)
    if np.any(proper):
        return True
    # collinear overlap: parallel segments whose supporting lines coincide
    par = np.abs(cross_rs) <= eps
    if np.any(par):
        w2 = np.abs(c1[par]) <= eps
        if np.any(w2):
            # project onto the segment direction and test interval overlap
            k = np.nonzero(par)[0][w2]
            for idx in k:
                d = rp[idx]
                t0, t1 = 0.0, float(d @ d)
                s0 = float((a[j[idx]] - a[i[idx]]) @ d)
                s1 = float((b[j[idx]] - a[i[idx]]) @ d)
                lo, hi = min(s0, s1), max(s0, s1)
                if hi > t0 + eps and lo < t1 - eps:
                    return True
    return False


def convexity_check(curve, c_floor=1e-8, n_directions=64):
    """Convexity verdict of the xy-projection of a curve.

    convex requires a single height maximum in every tested planar
    direction plus consistently signed edge turns; strict convexity
    additionally forbids collinear edge runs; uniform convexity requires
    strictly positive discrete curvature of the projection.
    """
    proj = curve.samples[:, :2]
    n = proj.shape[0]
    scale = diameter(proj)
    pg = projection_geometry(curve, c_floor=c_floor)
    projection_valid = bool(np.all(pg.valid))
    min_c = float(np.min(pg.c))

    if scale == 0.0:
        return ConvexityVerdict(False, False, False, False, False,
                                float("nan"), min_c, projection_valid)

    d2 = np.sum((proj[:, None, :] - proj[None, :, :]) ** 2, axis=-1)
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    gap = np.minimum((ii - jj) % n, (jj - ii) % n)
    injective = bool(np.all(d2[gap > 1] > (1e-9 * scale) ** 2))

    simple = injective and is_simple_polygon(proj)

    e = np.roll(proj, -1, axis=0) - proj
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    turn_eps = 1e-12 * scale * scale
    pos, neg = np.any(cross > turn_eps), np.any(cross < -turn_eps)
    one_sign = not (pos and neg)

    angles = np.arange(n_directions) * (2.0 * np.pi / n_directions)
    mu_ok = all(
        _mu_of_values(proj @ np.array([math.cos(a), math.sin(a)])) == 1
        for a in angles
    )

    convex = simple and one_sign and mu_ok
    strictly = convex and not np.any(np.abs(cross) <= turn_eps)
    valid_kbar = pg.kbar[pg.valid] if np.any(pg.valid) else pg.kbar
    # orient so CCW-positive regardless of traversal direction
    signed_min = float(np.min(valid_kbar)) if np.any(pg.valid) else float("nan")
    uniformly = bool(strictly and simple and signed_min > 0.0)
    return ConvexityVerdict(
        injective_projection=injective,
        simple=simple,
        convex=convex,
        strictly_convex=strictly,
        uniformly_convex=uniformly,
        min_kbar=signed_min,
        min_c=min_c,
        projection_valid=projection_valid,
    )


def vertical_tangent_gap(curve):
    """min over samples of sqrt(c) = |P_xy T|; 0 means a vertical tangent."""
    geo = frame_geometry(curve)
    t_xy = geo.tangent[:, :2]
    return float(np.min(np.linalg.norm(t_xy, axis=1)))


def plane_intersection_count(curve, plane):
    """Intersection count of a plane with the curve at sample resolution.

    Transversal sign changes count once each; an isolated zero run flanked
    by equal signs (a grazing tangency) also counts once.
    """
    if curve.dim != 3:
        raise ValueError("plane_intersection_count needs a curve in R^3")
    f = curve.samples @ plane.normal - plane.offset
    zero = np.abs(f) < ZERO_TOL
    if np.all(zero):
        return curve.n
    signs = np.sign(f[~zero])
    count = int(np.sum(signs != np.roll(signs, 1)))
    # grazing zero runs: same-signed flanks
    idx = np.nonzero(~zero)[0]
    n = curve.n
    for a, b in zip(idx, np.roll(idx, -1)):
        run = (b - a) % n
        if run > 1 and np.sign(f[a]) == np.sign(f[b]):
            count += 1
    return count


def line_slope(p, q):
    """Slope |dz| / sqrt(dx^2 + dy^2) of the line through p, q in R^3."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    norm = np.linalg.norm(d)
    if norm == 0.0:
        raise ValueError("line_slope needs two distinct points")
    horiz = math.hypot(d[0], d[1])
    if horiz < 1e-14 * norm:
        return math.inf
    return abs(d[2]) / horiz


def plane_slope(plane_or_normal):
    """Slope sqrt(nx^2 + ny^2) / |nz| of a plane from its normal."""
    n = plane_or_normal.normal if isinstance(plane_or_normal, Plane) else np.asarray(plane_or_normal, dtype=float)
    horiz = math.hypot(n[0], n[1])
    if abs(n[2]) < 1e-14 * np.linalg.norm(n):
        return math.inf
    return horiz / abs(n[2])


def _slopes_of_directions(d):
    """Vectorized line slope of direction vectors, +inf for vertical ones."""
    horiz = np.hypot(d[..., 0], d[..., 1])
    norm = np.linalg.norm(d, axis=-1)
    out = np.full(horiz.shape, np.inf)
    ok = horiz >= 1e-14 * norm
    out[ok] = np.abs(d[..., 2][ok]) / horiz[ok]
    return out


def _plane_slopes_of_normals(nrm, scale2):
    """Vectorized plane slope from (unnormalized) normals; near-degenerate
    normals are reported as nan and must be filtered by the caller."""
    mag = np.linalg.norm(nrm, axis=-1)
    horiz = np.hypot(nrm[..., 0], nrm[..., 1])
    out = np.full(mag.shape, np.nan)
    degenerate = mag <= 1e-12 * scale2
    vert = (~degenerate) & (np.abs(nrm[..., 2]) < 1e-14 * mag)
    ok = (~degenerate) & (~vert)
    out[vert] = np.inf
    out[ok] = horiz[ok] / np.abs(nrm[..., 2][ok])
    return out


def _sample_triples(n, budget, rng):
    """Deterministic triple sample: all consecutive triples, plus uniformly
    random distinct triples up to the budget."""
    base = np.stack(
        [np.arange(n), (np.arange(n) + 1) % n, (np.arange(n) + 2) % n], axis=1
    )
    extra = max(0, budget - n)
    if extra > 0:
        raw = rng.integers(0, n, size=(int(extra * 1.2) + 8, 3))
        good = (raw[:, 0] != raw[:, 1]) & (raw[:, 1] != raw[:, 2]) & (raw[:, 0] != raw[:, 2])
        raw = raw[good][:extra]
        return np.vstack([base, raw])
    return base


def slope_profile(curve, triple_budget=200_000, seed=0):
    """Max tangent/secant/osculating slopes and the sampled three-point
    constant of a curve in R^3.

    The three-point constant is estimated as the max plane slope over
    sampled triples; exhaustive when C(N,3) fits in the budget, otherwise a
    seeded random sample augmented with all consecutive triples and the
    triples through the steepest secant pair.
    """
    if curve.dim != 3:
        raise ValueError("slope_profile needs a curve in R^3")
    pts = curve.samples
    n = pts.shape[0]
    scale2 = diameter(pts) ** 2
    geo = frame_geometry(curve)

    s_tan = float(np.max(_slopes_of_directions(geo.tangent)))

    d = pts[:, None, :] - pts[None, :, :]
    iu = np.triu_indices(n, k=1)
    pair_d = d[iu]
    pair_slopes = _slopes_of_directions(pair_d)
    imax = int(np.argmax(pair_slopes))
    s_sec = float(pair_slopes[imax])
    pmax, qmax = iu[0][imax], iu[1][imax]

    if np.all(geo.curvature > 0.0):
        osc_n = np.cross(geo.tangent, geo.curvature_vector)
        osc = _plane_slopes_of_normals(osc_n, scale2)
        s_osc = float(np.nanmax(osc)) if np.any(np.isfinite(osc) | np.isinf(osc)) else None
    else:
        s_osc = None

    n_choose_3 = n * (n - 1) * (n - 2) // 6
    rng = np.random.default_rng(seed)
    if n_choose_3 <= triple_budget:
        i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
        m = (i < j) & (j < k)
        triples = np.stack([i[m], j[m], k[m]], axis=1)
    else:
        triples = _sample_triples(n, triple_budget, rng)
        # always cover the steepest secant pair with every third point
        third = np.arange(n)
        third = third[(third != pmax) & (third != qmax)]
        anchored = np.stack(
            [np.full(third.shape, pmax), np.full(third.shape, qmax), third], axis=1
        )
        triples = np.vstack([triples, anchored])

    a, b, c3 = pts[triples[:, 0]], pts[triples[:, 1]], pts[triples[:, 2]]
    nrm = np.cross(b - a, c3 - a)
    tri_slopes = _plane_slopes_of_normals(nrm, scale2)
    finite_or_inf = tri_slopes[~np.isnan(tri_slopes)]
    delta = float(np.max(finite_or_inf)) if finite_or_inf.size else 0.0
    delta = max(delta, s_sec)

    return SlopeSummary(
        s_tangent_max=s_tan,
        s_secant_max=s_sec,
        s_osculating_max=s_osc,
        delta_triple=delta,
        budget_used=int(triples.shape[0]),
    )


def check_diameter_bound(curve, delta):
    """diam(curve) <= sqrt(1 + delta^2) * diam(xy-projection) + slack."""
    if not (delta >= 0.0 and math.isfinite(delta)):
        raise ValueError("delta must be finite and nonnegative")
    d_space = diameter(curve.samples)
    d_proj = diameter(curve.samples[:, :2])
    return d_space <= math.sqrt(1.0 + delta * delta) * d_proj + 1e-9
