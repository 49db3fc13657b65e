"""Command-line runner for scenario files.

Exit codes: 0 when contact was established, 2 when the run ended
without contact, 1 on any error (bad config, plant divergence, I/O).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from funnelsim.errors import FunnelSimError
from funnelsim.mission import emit_outputs, load_scenario, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="funnelsim",
        description="Run a contact-approach scenario and write its artifacts.")
    parser.add_argument("--scenario", required=True,
                        help="path to a scenario YAML file")
    parser.add_argument("--out", default="out",
                        help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    parser.add_argument("--duration", type=float, default=None,
                        help="override the scenario duration [s]")
    parser.add_argument("--plant", choices=("kinematic", "dynamic"),
                        default=None, help="override the plant variant")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress the summary printout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_scenario(args.scenario)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.duration is not None:
            config = replace(config, duration=args.duration)
        if args.plant is not None:
            config = replace(config, plant_variant=args.plant)
        report = run_scenario(config)
        paths = emit_outputs(report, args.out)
    except FunnelSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        s = report.summary
        if s["contact_reached"]:
            print(f"{config.name}: contact at t={s['time_to_contact_s']:.3f}s "
                  f"with speed {s['contact_speed_mps']:.4f} m/s")
        else:
            print(f"{config.name}: no contact within {config.duration:.1f}s")
        print(f"artifacts written to {paths['run_csv'].parent}")
    return 0 if report.summary["contact_reached"] else 2


if __name__ == "__main__":
    sys.exit(main())
