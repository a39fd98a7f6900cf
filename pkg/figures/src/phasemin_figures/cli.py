"""``make-figure``: render one phasemin CSV into an image.

Usage::

    make-figure --kind fg_curve --in fg.csv --out fg.svg
    make-figure --kind heatmap --in phase-diagram.csv --out grid.png
    make-figure --kind trajectory --in run.csv --out traj.svg [--title T]
"""

from __future__ import annotations

import argparse
import sys

from .render import SCHEMAS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="make-figure", description="Render phasemin CSV outputs."
    )
    parser.add_argument("--kind", required=True, choices=sorted(SCHEMAS))
    parser.add_argument("--in", dest="input_csv", required=True,
                        help="input CSV (must match the kind's schema)")
    parser.add_argument("--out", dest="output_image", required=True,
                        help="output image path (.svg/.png/.pdf)")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    spec = FigureSpec(
        input_csv=args.input_csv,
        figure_kind=args.kind,
        output_image=args.output_image,
        title=args.title,
    )
    try:
        render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
