"""Command-line entry: plotkit {field,traj,trace} <csv...> -o out.png"""

import argparse
import sys

from .io import SchemaError
from .plots import PlotJob, plot_field, plot_trace, plot_trajectories


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render figures from homing-simulator CSV dumps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_field = sub.add_parser("field", help="quiver plot of a field grid dump")
    p_field.add_argument("inputs", nargs=1, metavar="grid.csv")
    p_field.add_argument("-o", "--output", required=True)
    p_field.add_argument("--delta-contour", action="store_true",
                         help="overlay the zero level of the delta column")
    p_field.add_argument("--fov-boundary", action="store_true",
                         help="overlay the zero level of a fov_margin "
                              "column when the grid has one")

    p_traj = sub.add_parser("traj", help="overlay one or more rollout logs")
    p_traj.add_argument("inputs", nargs="+", metavar="traj.csv")
    p_traj.add_argument("-o", "--output", required=True)
    p_traj.add_argument("--summary", default=None,
                        help="summary.json for convergence annotations")

    p_trace = sub.add_parser("trace", help="render an isonormal curve dump")
    p_trace.add_argument("inputs", nargs=1, metavar="trace.csv")
    p_trace.add_argument("-o", "--output", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "field":
            job = PlotJob(inputs=tuple(args.inputs), output=args.output,
                          show_delta_contour=args.delta_contour,
                          show_fov_boundary=args.fov_boundary)
            result = plot_field(job)
            print(f"wrote {result.output} ({result.drawn_arrows} arrows, "
                  f"{result.undefined_cells} undefined cells)")
        elif args.command == "traj":
            job = PlotJob(inputs=tuple(args.inputs), output=args.output,
                          summary=args.summary)
            result = plot_trajectories(job)
            print(f"wrote {result.output} ({len(args.inputs)} paths, "
                  f"{result.highlighted_segments} violation spans)")
        else:
            job = PlotJob(inputs=tuple(args.inputs), output=args.output)
            result = plot_trace(job)
            print(f"wrote {result.output}")
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
