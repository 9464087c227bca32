"""Command-line front end.

Subcommands: simulate (closed-loop rollouts to CSV plus a JSON summary),
field (grid dump of the navigation field), trace (isonormal curve CSV),
median (geometric median as JSON on stdout), validate (schema and
feasibility report).  Exit codes: 0 success, 2 validation failure,
3 runtime failure.  All file outputs are deterministic: rerunning a
command with identical inputs produces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .geometry import geometric_median, theta_dist, trace_isonormal
from .fields import v_field
from .sim import (
    Scenario,
    ScenarioError,
    load_scenario,
    run_rollout,
    sample_field_grid,
    write_summary_json,
)
from .sim import _fmt as _fmt17

TRACE_DEFAULT_STEP = 0.05


def _parse_bounds(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise ScenarioError(
            f"--bounds needs x0min,x0max,x1min,x1max (4 numbers), got {text!r}"
        )
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ScenarioError(f"--bounds values must be numbers, got {text!r}")


def _parse_v0(text: str, d: int) -> np.ndarray:
    parts = text.split(",")
    try:
        vec = np.array([float(p) for p in parts])
    except ValueError:
        raise ScenarioError(f"--v0 values must be numbers, got {text!r}")
    if vec.shape != (d,):
        raise ScenarioError(
            f"--v0 needs {d} components for this scenario, got {len(parts)}"
        )
    return vec


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    scn = load_scenario(args.scenario, dt=args.dt, t_max=args.t_max,
                        epsilon=args.epsilon)
    out = _out_dir(args)
    summaries = []
    names = []
    for idx, state in enumerate(scn.initial_states):
        log, summary = run_rollout(scn, state)
        name = f"traj_{idx:03d}.csv"
        log.to_csv(out / name)
        names.append(name)
        summaries.append(summary)
    write_summary_json(out / "summary.json", summaries, names)
    converged = sum(1 for s in summaries if s.converged)
    print(f"wrote {len(names)} trajectories to {out} "
          f"({converged}/{len(names)} converged)")
    return 0


def cmd_field(args) -> int:
    scn = load_scenario(args.scenario, epsilon=args.epsilon)
    grid = sample_field_grid(scn, _parse_bounds(args.bounds), args.resolution)
    out = _out_dir(args)
    grid.to_csv(out / "field.csv")
    print(f"wrote {out / 'field.csv'} ({args.resolution}x{args.resolution})")
    return 0


def _trace_rows(scn: Scenario, curve, v0: np.ndarray):
    for r, point in zip(curve.r, curve.points):
        v = v_field(point, scn.landmarks)
        v_err = np.inf if v is None else float(np.linalg.norm(v - v0))
        theta_err = abs(theta_dist(point, scn.landmarks) - r)
        yield (float(r), *point, v_err, theta_err)


def cmd_trace(args) -> int:
    scn = load_scenario(args.scenario)
    v0 = _parse_v0(args.v0, scn.dimension)
    r_start = args.r_start
    if r_start is None:
        median = geometric_median(scn.landmarks)
        r_start = theta_dist(median.representative(), scn.landmarks) * (1.0 + 1e-3)
    curve = trace_isonormal(scn.landmarks, v0, r_start, args.r_end, args.r_step)
    out = _out_dir(args)
    coords = [f"x{i}" for i in range(scn.dimension)]
    lines = [",".join(["r"] + coords + ["v_err", "theta_err"])]
    for row in _trace_rows(scn, curve, curve.v0):
        lines.append(",".join(_fmt17(value) for value in row))
    (out / "trace.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / 'trace.csv'} ({len(curve.r)} samples)")
    return 0


def cmd_median(args) -> int:
    scn = load_scenario(args.scenario)
    result = geometric_median(scn.landmarks)
    if result.kind == "unique-point":
        payload = {"kind": result.kind, "point": [float(c) for c in result.point]}
    else:
        payload = {"kind": result.kind,
                   "endpoints": [[float(c) for c in e] for e in result.endpoints]}
    print(json.dumps(payload))
    return 0


def cmd_validate(args) -> int:
    scn = load_scenario(args.scenario, dt=args.dt, t_max=args.t_max,
                        epsilon=args.epsilon)
    print(f"scenario OK: {args.scenario}")
    print(f"  dimension      {scn.dimension}")
    print(f"  landmarks      {scn.landmarks.k}")
    print(f"  robot          {scn.robot_kind}")
    print(f"  initial states {len(scn.initial_states)}")
    print(f"  dt / t_max     {scn.dt:g} / {scn.t_max:g}")
    print(f"  fov_angle_rad  {scn.fov_angle:.6g}")
    print(f"  epsilon        {scn.bump.epsilon:.6g} "
          f"(pair margin {scn.context.home.pair_margin():.6g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homingvf",
        description="Bearing-only visual homing: simulate, inspect, and "
                    "export the navigation field.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_arg(p):
        p.add_argument("--scenario", "-s", required=True, metavar="PATH",
                       help="scenario JSON file")

    p = sub.add_parser("simulate", help="run rollouts, write CSVs + summary")
    scenario_arg(p)
    p.add_argument("--out", "-o", required=True, metavar="DIR")
    p.add_argument("--dt", type=float, default=None, help="override step (s)")
    p.add_argument("--t-max", type=float, default=None, help="override horizon (s)")
    p.add_argument("--epsilon", type=float, default=None,
                   help="override bump width (cosine units)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("field", help="sample the combined field on a grid")
    scenario_arg(p)
    p.add_argument("--out", "-o", required=True, metavar="DIR")
    p.add_argument("--bounds", required=True, metavar="x0min,x0max,x1min,x1max")
    p.add_argument("--resolution", type=int, default=41, metavar="N",
                   help="grid points per axis (default 41)")
    p.add_argument("--epsilon", type=float, default=None)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("trace", help="trace an isonormal curve")
    scenario_arg(p)
    p.add_argument("--out", "-o", required=True, metavar="DIR")
    p.add_argument("--v0", required=True, metavar="a,b[,c]",
                   help="unit direction (rejected if not unit norm)")
    p.add_argument("--r-start", type=float, default=None,
                   help="start distance sum (default: just above the median value)")
    p.add_argument("--r-end", type=float, required=True)
    p.add_argument("--r-step", type=float, default=TRACE_DEFAULT_STEP)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("median", help="print the geometric median as JSON")
    scenario_arg(p)
    p.set_defaults(func=cmd_median)

    p = sub.add_parser("validate", help="check a scenario without running it")
    scenario_arg(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
