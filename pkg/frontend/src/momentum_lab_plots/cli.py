"""CLI: render sweep CSVs into figures with auditable sidecars."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="momentum-lab-plot",
        description="Plot iterations-vs-m or rows-vs-m from sweep CSV tables.")
    p.add_argument("inputs", nargs="+", help="sweep CSV path(s)")
    p.add_argument("--y-axis", choices=["iterations", "rows"], default="iterations")
    p.add_argument("--output", default="figure.png", help="PNG or SVG path")
    p.add_argument("--title", default="")
    p.add_argument("--linear-x", action="store_true", help="disable log2 x axis")
    p.add_argument("--linear-y", action="store_true", help="disable log y axis")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(inputs=args.inputs, y_axis=args.y_axis, output=args.output,
                      log_x=not args.linear_x, log_y=not args.linear_y,
                      title=args.title)
    payload = render(spec)
    n_pts = sum(len(s["points"]) for s in payload["series"])
    print(f"{len(payload['series'])} series, {n_pts} points -> {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
