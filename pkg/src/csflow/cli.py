"""Command line front end.

Exit codes: 0 success, 1 a check failed, 2 usage or config error,
3 I/O error.
"""

import argparse
import json
import sys

from . import lab, predicates, zoo
from .curves import ClosedCurve


def _cmd_run(args):
    try:
        with open(args.config) as fh:
            cfg = lab.parse_config(fh.read())
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except lab.ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    try:
        status, verdicts = lab.execute_run(cfg)
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    print(json.dumps(verdicts, indent=2, sort_keys=True))
    return status


def _cmd_zoo(args):
    if args.action == "list":
        for family, params in zoo.FAMILIES.items():
            schema = " ".join("%s=%s" % kv for kv in params.items())
            print("%-26s %s" % (family, schema))
        return 0
    # emit
    params = {}
    for item in args.params or []:
        key, val = item.split("=", 1)
        params[key] = float(val) if "." in val or "e" in val.lower() else int(val)
    try:
        curve = zoo.build(args.family, params, args.n)
    except Exception as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    try:
        with open(args.out, "w") as fh:
            fh.write(curve.to_json())
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    return 0


def _cmd_check(args):
    try:
        with open(args.snapshot) as fh:
            curve = ClosedCurve.from_json(fh.read())
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except Exception as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    out = {"convexity": predicates.convexity_check(curve).as_dict()}
    out["vertical_tangent_gap"] = predicates.vertical_tangent_gap(curve)
    if args.all and curve.dim == 3:
        prof = predicates.slope_profile(curve)
        out["slopes"] = {
            "s_tangent_max": prof.s_tangent_max,
            "s_secant_max": prof.s_secant_max,
            "s_osculating_max": prof.s_osculating_max,
            "delta_triple": prof.delta_triple,
            "budget_used": prof.budget_used,
        }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _cmd_report(args):
    try:
        print(lab.report(args.out_dir))
    except FileNotFoundError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    return 0


def _cmd_plot(args):
    try:
        paths = lab.emit_plots(args.out_dir)
    except FileNotFoundError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    for p in paths:
        print(p)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="csflow")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured flow run")
    p_run.add_argument("config")
    p_run.set_defaults(func=_cmd_run)

    p_zoo = sub.add_parser("zoo", help="list or emit the curve families")
    zsub = p_zoo.add_subparsers(dest="action", required=True)
    z_list = zsub.add_parser("list")
    z_list.set_defaults(func=_cmd_zoo, action="list")
    z_emit = zsub.add_parser("emit")
    z_emit.add_argument("family")
    z_emit.add_argument("--params", nargs="*", metavar="KEY=VALUE")
    z_emit.add_argument("--n", type=int, default=512)
    z_emit.add_argument("--out", required=True)
    z_emit.set_defaults(func=_cmd_zoo, action="emit")

    p_check = sub.add_parser("check", help="run predicates on a snapshot")
    p_check.add_argument("snapshot")
    p_check.add_argument("--all", action="store_true")
    p_check.set_defaults(func=_cmd_check)

    p_report = sub.add_parser("report", help="summarize a completed run")
    p_report.add_argument("out_dir")
    p_report.set_defaults(func=_cmd_report)

    p_plot = sub.add_parser("plot", help="emit SVG plots for a completed run")
    p_plot.add_argument("out_dir")
    p_plot.set_defaults(func=_cmd_plot)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
