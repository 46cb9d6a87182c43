"""Command line entry: render one trajectory or sweep CSV."""

import argparse
import sys

from .render import LAYOUTS, PlotsError, render_sweep, render_trajectory


def build_parser():
    parser = argparse.ArgumentParser(
        prog="opdyn-plots", description="Render simulation CSV files to SVG and PNG.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_traj = sub.add_parser("trajectory", help="per-agent mean-value panels")
    p_traj.add_argument("--csv", required=True)
    p_traj.add_argument("--out", required=True, help="output image path (extension ignored)")
    p_traj.add_argument("--layout", default=None, choices=LAYOUTS,
                        help="single panel instead of the 2x2 grid")

    p_sweep = sub.add_parser("sweep", help="asymptote-vs-parameter curve")
    p_sweep.add_argument("--csv", required=True)
    p_sweep.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "trajectory":
            paths = render_trajectory(args.csv, args.out, layout=args.layout)
        else:
            paths = render_sweep(args.csv, args.out)
    except (PlotsError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
