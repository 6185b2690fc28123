"""Command line: render --spec <json>."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .readers import SchemaError
from .spec import SpecError, load_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render driftlock CSV/JSON outputs into figures.",
    )
    parser.add_argument("--spec", required=True, help="path to a figure spec JSON file")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args.spec)
        output = render(spec)
    except (SpecError, SchemaError) as exc:
        print(f"render: error: {exc}", file=sys.stderr)
        return 2
    print(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
