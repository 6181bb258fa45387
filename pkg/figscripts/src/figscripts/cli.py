"""Command-line figure renderer: ``render --spec figure.json --out fig.png``."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import FigureSpec, SpecError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="render",
        description="Render figures from ndsf pipeline CSV/JSON outputs.",
    )
    p.add_argument("--spec", required=True, help="figure JSON specification")
    p.add_argument("--out", required=True, help="output PNG path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec.load(args.spec)
        render(spec, args.out)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
