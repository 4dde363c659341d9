"""CLI: render one figure from a run directory.

Exit codes: 0 success, 2 bad arguments or artifact schema mismatch,
3 run holds no data for the requested figure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import NoDataError, SchemaError
from .render import KINDS, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdloop-render",
        description="Render figures from rdloop run directories",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render")
    p.add_argument("--run", required=True, help="run directory with CSV artifacts")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--out", required=True, help="output image path (e.g. fig.png)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(PlotJob(Path(args.run), args.kind, Path(args.out)))
    except SchemaError as exc:
        print(f"artifact schema error: {exc}", file=sys.stderr)
        return 2
    except NoDataError as exc:
        print(f"no data: {exc}", file=sys.stderr)
        return 3
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
