"""plotkit <kind> --in CSV [CSV ...] --manifest PATH --out IMG"""

from __future__ import annotations

import argparse
import sys

from .render import SCHEMAS, PlotJob, RenderResult, SchemaError, render

__all__ = ["main"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plotkit",
                                 description="render dead-core laboratory reports")
    ap.add_argument("kind", choices=sorted(SCHEMAS))
    ap.add_argument("--in", dest="inputs", nargs="+", required=True,
                    help="input CSV file(s)")
    ap.add_argument("--manifest", default=None, help="manifest.json of the run")
    ap.add_argument("--out", required=True, help="output image path")
    args = ap.parse_args(argv)
    try:
        job = PlotJob(kind=args.kind, inputs=args.inputs, out=args.out,
                      manifest=args.manifest)
        result: RenderResult = render(job)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(result.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
