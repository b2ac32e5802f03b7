"""Figure rendering CLI:  oscsim-plot <spec.json> [more specs...]"""

from __future__ import annotations

import argparse
import sys

from .render import PlotError, PlotSpec, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="oscsim-plot",
        description="Render oscsim harness CSVs into figures",
    )
    parser.add_argument("spec", nargs="+", help="plot spec JSON file(s)")
    args = parser.parse_args(argv)
    status = 0
    for path in args.spec:
        try:
            result = render(PlotSpec.load(path))
        except PlotError as exc:
            print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
            status = 2
            continue
        note = f" (slope {result.slope:.3f})" if result.slope is not None else ""
        print(f"wrote {result.output}{note}")
    return status


if __name__ == "__main__":
    sys.exit(main())
