"""Experiment orchestration: config parsing, run execution, per-frame
logging, limit-region tracking and verdict reports.

Configs are flat INI-style text with [curve], [flow], [stop], [checks] and
[output] sections; unknown or duplicate keys are rejected with
line-numbered diagnostics.  Runs are deterministic given the seed.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import predicates, svg, zoo
from .curves import ClosedCurve, diameter, projection_geometry, roundness
from .flow import RunPolicy, run_flow


class ConfigError(ValueError):
    """Configuration text violates the documented schema."""


@dataclass
class CheckSet:
    convexity: bool = True
    slopes: bool = True
    sturm_directions: int = 16
    planes: int = 8
    triple_budget: int = 200_000
    roundness: bool = True
    limit_region: bool = True
    vertical_watch: bool = False


@dataclass
class RunConfig:
    family: str | None = None
    snapshot: str | None = None
    params: dict = field(default_factory=dict)
    n: int = 512
    safety: float = 0.4
    archive_every: int = 50
    diameter_min: float = 0.02
    curvature_max: float | None = None
    max_steps: int = 2_000_000
    t_max: float | None = None
    checks: CheckSet = field(default_factory=CheckSet)
    out_dir: str = "out"
    seed: int = 0


_SECTIONS = {"curve", "flow", "stop", "checks", "output"}
_KEYS = {
    "curve": {"family", "snapshot", "n", "eps", "r", "a", "b", "m", "dim",
              "harmonics", "seed"},
    "flow": {"safety", "archive_every"},
    "stop": {"diameter_min", "curvature_max", "max_steps", "t_max"},
    "checks": {"convexity", "slopes", "sturm_directions", "planes",
               "triple_budget", "roundness", "limit_region", "vertical_watch"},
    "output": {"out_dir", "seed"},
}
_CURVE_PARAM_KEYS = {"eps", "r", "a", "b", "m", "dim", "harmonics", "seed"}


def _parse_bool(raw, lineno, key):
    if raw.lower() in ("true", "yes", "1"):
        return True
    if raw.lower() in ("false", "no", "0"):
        return False
    raise ConfigError("line %d: key %r wants a boolean, got %r" % (lineno, key, raw))


def parse_config(text):
    """Parse and fully validate the key=value config format."""
    section = None
    seen = set()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError("line %d: unknown section [%s]" % (lineno, section))
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key = value" % lineno)
        if section is None:
            raise ConfigError("line %d: key outside any section" % lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS[section]:
            raise ConfigError("line %d: unknown key %r in [%s]" % (lineno, key, section))
        if (section, key) in seen:
            raise ConfigError("line %d: duplicate key %r in [%s]" % (lineno, key, section))
        seen.add((section, key))
        values[(section, key)] = (val, lineno)

    cfg = RunConfig()

    def take(section, key, conv, default=None):
        if (section, key) not in values:
            return default
        raw, lineno = values[(section, key)]
        try:
            return conv(raw)
        except ConfigError:
            raise
        except Exception:
            raise ConfigError("line %d: bad value %r for key %r" % (lineno, raw, key))

    cfg.family = take("curve", "family", str, None)
    cfg.snapshot = take("curve", "snapshot", str, None)
    if cfg.family is None and cfg.snapshot is None:
        raise ConfigError("[curve] needs either family or snapshot")
    if cfg.family is not None and cfg.snapshot is not None:
        raise ConfigError("[curve] family and snapshot are mutually exclusive")
    cfg.n = take("curve", "n", int, cfg.n)
    if cfg.n < 8:
        raise ConfigError("key 'n' must be >= 8")
    for key in _CURVE_PARAM_KEYS:
        if ("curve", key) in values:
            raw, lineno = values[("curve", key)]
            try:
                cfg.params[key] = float(raw) if key not in ("dim", "harmonics", "seed") else int(raw)
            except ValueError:
                raise ConfigError("line %d: bad value %r for key %r" % (lineno, raw, key))

    cfg.safety = take("flow", "safety", float, cfg.safety)
    if not (0.0 < cfg.safety <= 1.0):
        raise ConfigError("key 'safety' must lie in (0, 1]")
    cfg.archive_every = take("flow", "archive_every", int, cfg.archive_every)
    if cfg.archive_every < 1:
        raise ConfigError("key 'archive_every' must be >= 1")

    cfg.diameter_min = take("stop", "diameter_min", float, cfg.diameter_min)
    if cfg.diameter_min <= 0.0:
        raise ConfigError("key 'diameter_min' must be positive")
    cfg.curvature_max = take("stop", "curvature_max", float, None)
    cfg.max_steps = take("stop", "max_steps", int, cfg.max_steps)
    cfg.t_max = take("stop", "t_max", float, None)

    ck = cfg.checks
    ck.convexity = take("checks", "convexity", lambda r: _parse_bool(r, 0, "convexity"), ck.convexity)
    ck.slopes = take("checks", "slopes", lambda r: _parse_bool(r, 0, "slopes"), ck.slopes)
    ck.roundness = take("checks", "roundness", lambda r: _parse_bool(r, 0, "roundness"), ck.roundness)
    ck.limit_region = take("checks", "limit_region", lambda r: _parse_bool(r, 0, "limit_region"), ck.limit_region)
    ck.vertical_watch = take("checks", "vertical_watch", lambda r: _parse_bool(r, 0, "vertical_watch"), ck.vertical_watch)
    ck.sturm_directions = take("checks", "sturm_directions", int, ck.sturm_directions)
    ck.planes = take("checks", "planes", int, ck.planes)
    ck.triple_budget = take("checks", "triple_budget", int, ck.triple_budget)

    cfg.out_dir = take("output", "out_dir", str, cfg.out_dir)
    cfg.seed = take("output", "seed", int, cfg.seed)
    return cfg


def build_curve(cfg):
    if cfg.snapshot is not None:
        with open(cfg.snapshot) as fh:
            return ClosedCurve.from_json(fh.read())
    return zoo.build(cfg.family, cfg.params, cfg.n)


def sturm_directions(dim, n_horizontal=16):
    """n_horizontal equispaced horizontal directions plus one per vertical axis."""
    dirs = []
    for i in range(n_horizontal):
        a = 2.0 * np.pi * i / n_horizontal
        v = np.zeros(dim)
        v[0], v[1] = math.cos(a), math.sin(a)
        dirs.append(v)
    for k in range(2, dim):
        v = np.zeros(dim)
        v[k] = 1.0
        dirs.append(v)
    return dirs


_PLANE_NORMALS = [
    (0.0, 0.0, 1.0),
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (1.0, 1.0, 1.0),
    (1.0, 0.0, 1.0),
    (0.0, 1.0, 1.0),
    (1.0, -1.0, 0.0),
    (1.0, 1.0, -1.0),
]


def reference_planes(curve0, count=8):
    """Fixed planes through the initial centroid with a symmetric normal net."""
    centroid = np.mean(curve0.samples[:, :3], axis=0)
    planes = []
    for raw in _PLANE_NORMALS[:count]:
        n = np.asarray(raw) / np.linalg.norm(raw)
        planes.append(predicates.Plane(normal=n, offset=float(n @ centroid)))
    return planes


def frame_record(frame, cfg, dirs, planes, delta_seed=0):
    """The scalar log row of one archived frame."""
    curve = frame.curve
    from .curves import frame_geometry

    geo = frame_geometry(curve)
    pg = projection_geometry(curve)
    proj = curve.samples[:, :2]
    row = {
        "t": frame.t,
        "step": frame.step_index,
        "length": geo.total_length,
        "diameter": diameter(curve.samples),
        "proj_diameter": diameter(proj),
        "min_c": float(np.min(pg.c)),
        "max_k": float(np.max(geo.curvature)),
        "min_kbar": float(np.min(pg.kbar[pg.valid])) if np.any(pg.valid) else float("nan"),
        "max_kbar": float(np.max(pg.kbar[pg.valid])) if np.any(pg.valid) else float("nan"),
    }
    ck = cfg.checks
    if ck.slopes and curve.dim == 3:
        prof = predicates.slope_profile(curve, triple_budget=ck.triple_budget, seed=delta_seed)
        row["delta_triple"] = prof.delta_triple
        row["s_tangent_max"] = prof.s_tangent_max
        row["s_secant_max"] = prof.s_secant_max
    if ck.convexity:
        verdict = predicates.convexity_check(curve)
        for k, v in verdict.as_dict().items():
            row["cv_" + k] = v
    if ck.roundness:
        try:
            row["roundness"] = roundness(ClosedCurve(proj))
        except Exception:
            row["roundness"] = float("nan")
    for i, v in enumerate(dirs):
        row["sign_changes_%d" % i] = predicates.cyclic_sign_changes(geo.tangent @ v)
    for i, p in enumerate(planes):
        if curve.dim == 3:
            row["plane_count_%d" % i] = predicates.plane_intersection_count(curve, p)
    if ck.vertical_watch:
        row["vt_gap"] = predicates.vertical_tangent_gap(curve)
    return row


# ---------------------------------------------------------------------------
# limit region tracking

@dataclass(frozen=True)
class LimitRegionTrack:
    hulls: list                 # CCW hull vertex arrays per frame
    nested: bool
    diam_D: float
    hausdorff_to_prev: list
    excluded_frames: list


def convex_hull(points):
    """Andrew monotone chain; returns CCW hull vertices."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    if len(pts) < 3:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                u = out[-1] - out[-2]
                w = p - out[-2]
                if u[0] * w[1] - u[1] * w[0] > 0.0:
                    break
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _point_in_hull(p, hull, slack):
    a = hull
    b = np.roll(hull, -1, axis=0)
    e = b - a
    w = p[None, :] - a
    cross = e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]
    lens = np.linalg.norm(e, axis=1)
    return bool(np.all(cross >= -slack * lens))


def _boundary_samples(hull, count=512):
    closed = np.vstack([hull, hull[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s_nodes = np.concatenate(([0.0], np.cumsum(seg)))
    s = s_nodes[-1] * np.arange(count) / count
    out = np.empty((count, 2))
    for d in range(2):
        out[:, d] = np.interp(s, s_nodes, closed[:, d])
    return out


def hull_hausdorff(hull_a, hull_b, count=512):
    """Hausdorff distance of two convex hull boundaries by dense sampling."""
    a = _boundary_samples(hull_a, count)
    b = _boundary_samples(hull_b, count)
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def limit_region_summary(series, slack=1e-6):
    """Convex hulls of the projected frames, their nesting and convergence."""
    hulls = []
    excluded = []
    for i, frame in enumerate(series.frames):
        proj = frame.curve.samples[:, :2]
        verdict = predicates.convexity_check(frame.curve)
        if not verdict.convex:
            excluded.append(i)
            continue
        hulls.append(convex_hull(proj))
    nested = True
    hausdorff = [0.0]
    for prev, cur in zip(hulls[:-1], hulls[1:]):
        if not all(_point_in_hull(p, prev, slack) for p in cur):
            nested = False
        hausdorff.append(hull_hausdorff(prev, cur))
    diam_d = diameter(hulls[-1]) if hulls else float("nan")
    return LimitRegionTrack(
        hulls=hulls,
        nested=nested,
        diam_D=diam_d,
        hausdorff_to_prev=hausdorff,
        excluded_frames=excluded,
    )


# ---------------------------------------------------------------------------
# run execution and artifacts

def _csv_cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_series_csv(path, rows):
    cols = list(rows[0].keys())
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(row[c]) for c in cols) + "\n")


def evaluate_verdicts(series, rows, cfg, dirs, planes):
    """Per-theorem pass/fail verdicts with margins over the archived frames."""
    verdicts = {}
    times = [f.t for f in series.frames]
    lengths = [r["length"] for r in rows]
    verdicts["stop_reason"] = series.stop_reason
    verdicts["extinction_time"] = {
        "value": times[-1],
        "bracket": [times[-2] if len(times) > 1 else 0.0, times[-1]],
        "applicable": series.stop_reason == "diameter_below_threshold",
    }
    dl = np.diff(lengths)
    verdicts["length_monotone"] = {
        "pass": bool(np.all(dl < 1e-12)),
        "max_increase": float(np.max(dl)) if len(dl) else 0.0,
    }
    # containment in the shrinking ball, compared in squared-radius units
    # (the scale on which the exact ball satisfies d/dt r^2 = -2, so the
    # Euler bias near extinction stays O(dt) instead of blowing up)
    r0sq = float(np.max(np.sum(series.frames[0].curve.samples ** 2, axis=1)))
    worst = -math.inf
    for f in series.frames:
        rsq = float(np.max(np.sum(f.curve.samples ** 2, axis=1)))
        worst = max(worst, rsq - (r0sq - 2.0 * f.t))
    verdicts["containment"] = {"pass": bool(worst <= 1e-3), "max_excess_sq": worst}
    # per-direction extrema monotone
    ok = True
    worst_jump = 0.0
    for v in dirs:
        heights = [f.curve.samples @ v for f in series.frames]
        maxs = np.array([h.max() for h in heights])
        mins = np.array([h.min() for h in heights])
        jump = max(
            float(np.max(np.diff(maxs), initial=0.0)),
            float(np.max(-np.diff(mins), initial=0.0)),
        )
        worst_jump = max(worst_jump, jump)
        if jump > 1e-9:
            ok = False
    verdicts["max_principle"] = {"pass": ok, "worst_jump": worst_jump}
    # Sturm monotonicity
    ok = True
    for i in range(len(dirs)):
        counts = [r["sign_changes_%d" % i] for r in rows]
        if any(b > a for a, b in zip(counts[:-1], counts[1:])):
            ok = False
    verdicts["sturm_monotone"] = {"pass": ok}
    # plane-count monotonicity with grazing exemption
    if planes and series.frames[0].curve.dim == 3:
        ok = True
        for i, plane in enumerate(planes):
            counts = [r.get("plane_count_%d" % i) for r in rows]
            for j in range(len(counts) - 1):
                if counts[j + 1] > counts[j]:
                    f = series.frames[j + 1].curve.samples @ plane.normal - plane.offset
                    if float(np.min(np.abs(f))) > 1e-6:
                        ok = False
        verdicts["plane_count_monotone"] = {"pass": ok}
    # convexity after t > 0
    if cfg.checks.convexity:
        later = rows[1:] if len(rows) > 1 else rows
        verdicts["convexity_after_t0"] = {
            "pass": bool(all(r.get("cv_uniformly_convex") for r in later)),
            "min_c": float(min(r["min_c"] for r in later)),
        }
    # three-point constant monotone within 2 percent
    if cfg.checks.slopes and "delta_triple" in rows[0]:
        deltas = [r["delta_triple"] for r in rows]
        ok = all(b <= a * 1.02 for a, b in zip(deltas[:-1], deltas[1:]))
        d1 = deltas[1] if len(deltas) > 1 else deltas[0]
        bound_ok = all(
            r["diameter"] <= math.sqrt(1.0 + d1 * d1) * r["proj_diameter"] + 1e-9
            for r in rows
        )
        verdicts["delta_monotone"] = {"pass": bool(ok), "first": deltas[0], "last": deltas[-1]}
        verdicts["diameter_bound"] = {"pass": bool(bound_ok), "delta_used": d1}
    if cfg.checks.roundness and "roundness" in rows[-1]:
        verdicts["roundness_final"] = {"value": rows[-1]["roundness"]}
    if cfg.checks.vertical_watch:
        gaps = [r["vt_gap"] for r in rows]
        below = [(t, g) for t, g in zip(times, gaps) if g < 0.02]
        verdicts["vertical_tangent_watch"] = {
            "initial_gap": gaps[0],
            "min_gap": float(min(gaps)),
            "first_t_below_0.02": below[0][0] if below else None,
        }
    return verdicts


def execute_run(cfg):
    """Run the configured experiment and write all artifacts.

    Returns (exit_status, verdicts): status 0 when every evaluated check
    passed, 1 when some check failed.
    """
    curve0 = build_curve(cfg)
    policy = RunPolicy(
        safety=cfg.safety,
        archive_every=cfg.archive_every,
        diameter_min=cfg.diameter_min,
        curvature_max=cfg.curvature_max,
        max_steps=cfg.max_steps,
        t_max=cfg.t_max,
    )
    series = run_flow(curve0, policy)
    dirs = sturm_directions(curve0.dim, cfg.checks.sturm_directions)
    planes = reference_planes(curve0, cfg.checks.planes) if curve0.dim == 3 else []
    rows = [
        frame_record(f, cfg, dirs, planes, delta_seed=cfg.seed)
        for f in series.frames
    ]
    verdicts = evaluate_verdicts(series, rows, cfg, dirs, planes)
    if cfg.checks.limit_region:
        track = limit_region_summary(series)
        verdicts["limit_region"] = {
            "nested": track.nested,
            "diam_D": track.diam_D,
            "excluded_frames": track.excluded_frames,
        }

    os.makedirs(os.path.join(cfg.out_dir, "frames"), exist_ok=True)
    for f in series.frames:
        path = os.path.join(cfg.out_dir, "frames", "%06d.json" % f.step_index)
        with open(path, "w") as fh:
            fh.write(f.curve.to_json())
    write_series_csv(os.path.join(cfg.out_dir, "series.csv"), rows)
    with open(os.path.join(cfg.out_dir, "verdicts.json"), "w") as fh:
        json.dump(verdicts, fh, indent=2, sort_keys=True)
        fh.write("\n")

    failed = any(
        isinstance(v, dict) and v.get("pass") is False for v in verdicts.values()
    )
    return (1 if failed else 0), verdicts


def emit_plots(out_dir):
    """Write SVG plots for the archived frames of a completed run."""
    frames_dir = os.path.join(out_dir, "frames")
    if not os.path.isdir(frames_dir):
        raise FileNotFoundError("no frames/ directory under %s" % out_dir)
    names = sorted(os.listdir(frames_dir))
    curves = []
    for name in names:
        with open(os.path.join(frames_dir, name)) as fh:
            curves.append(ClosedCurve.from_json(fh.read()))
    plots_dir = os.path.join(out_dir, "plots")
    os.makedirs(plots_dir, exist_ok=True)
    sel = np.linspace(0, len(curves) - 1, min(4, len(curves))).round().astype(int)
    paths = []
    for i in sel:
        doc = svg.curve_svg([curves[i], curves[i].samples[:, :2]])
        path = os.path.join(plots_dir, "frame_%s.svg" % names[i].split(".")[0])
        with open(path, "w") as fh:
            fh.write(doc)
        paths.append(path)
    return paths


def report(out_dir):
    """Human-readable verdict table of a completed run."""
    vpath = os.path.join(out_dir, "verdicts.json")
    if not os.path.exists(vpath):
        raise FileNotFoundError("missing verdicts.json under %s" % out_dir)
    with open(vpath) as fh:
        verdicts = json.load(fh)
    lines = ["run report: %s" % out_dir, "-" * 48]
    for name in sorted(verdicts):
        v = verdicts[name]
        if isinstance(v, dict):
            status = v.get("pass")
            tag = {True: "PASS", False: "FAIL", None: "info"}[status]
            detail = ", ".join(
                "%s=%s" % (k, val) for k, val in v.items() if k != "pass"
            )
            lines.append("%-26s %-5s %s" % (name, tag, detail))
        else:
            lines.append("%-26s %s" % (name, v))
    return "\n".join(lines)
