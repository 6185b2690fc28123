"""Command line entry point.

    driftlock --config run.json [--scenario NAME] [--seed N] [--out DIR]

The config file picks the scenario and parameters; --scenario, --seed and
--out override the corresponding config fields.  On success the emitted
file names are printed; configuration and scenario errors exit with
status 2 and a diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .scenarios import ScenarioError, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftlock",
        description="Run a named simulation or analysis scenario from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON configuration")
    parser.add_argument("--scenario", default=None, help="override the config's scenario")
    parser.add_argument("--seed", type=int, default=None, help="override the config's seed")
    parser.add_argument("--out", default=None, help="override the output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        resolved = load_config(
            args.config,
            scenario_override=args.scenario,
            seed_override=args.seed,
            out_override=args.out,
        )
        outdir = run_scenario(resolved)
    except (ConfigError, ScenarioError) as exc:
        print(f"driftlock: error: {exc}", file=sys.stderr)
        return 2
    manifest = json.loads((Path(outdir) / "manifest.json").read_text())
    for name in manifest["outputs"]:
        print(Path(outdir) / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
