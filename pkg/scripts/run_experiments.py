#!/usr/bin/env python3
"""Run one or more preset scenarios and collect their outputs.

Examples:
    python3 scripts/run_experiments.py --group geodesic --out results
    python3 scripts/run_experiments.py angenent_torus cf_free --out results
    python3 scripts/run_experiments.py --list
"""

import argparse
import sys
import time
from pathlib import Path

from riemflow.scenario import PRESETS, preset_config, run_scenario

GROUPS = {
    "geodesic": [
        "cf_mu1_cigars", "cf_muneg1_cigars", "cf_axis_semicircle",
        "cf_dirichlet", "cf_free", "hyperbolic_geodesic",
    ],
    "torus": ["torus_geodesic_fixed_ends", "torus_nonhomotopic"],
    "elastic": [
        "ef_navier", "ef_clamped", "angenent_torus", "angenent_torus_n3",
        "angenent_torus_n4", "angenent_shifted_plus", "angenent_shifted_minus",
        "sphere_selfshrinker", "sphere_selfshrinker_n3",
        "nonembedded_7x", "nonembedded_genus0", "dk17_n3",
    ],
    "cone": ["cone_shrink", "cone_cme", "cone_elastic"],
    "gibbs": [
        "gibbs_edges", "gibbs_469",
        "gibbs_sigma123_10", "gibbs_sigma123_100", "gibbs_sigma123_1000",
    ],
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("presets", nargs="*", help="preset names to run")
    parser.add_argument("--group", choices=sorted(GROUPS) + ["all"],
                        help="run a predefined group of presets")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="config override, repeatable")
    parser.add_argument("--list", action="store_true", help="list presets")
    args = parser.parse_args(argv)

    if args.list:
        for name in sorted(PRESETS):
            print(name)
        return 0

    names = list(args.presets)
    if args.group == "all":
        names += [n for g in sorted(GROUPS) for n in GROUPS[g]]
    elif args.group:
        names += GROUPS[args.group]
    if not names:
        parser.error("no presets selected (use names, --group, or --list)")

    overrides = {}
    for item in args.overrides:
        key, _, value = item.partition("=")
        overrides[key] = value

    out_root = Path(args.out)
    failures = 0
    for name in names:
        cfg = preset_config(name, overrides or None)
        out_dir = out_root / name
        t0 = time.perf_counter()
        code, result = run_scenario(cfg, out_dir)
        print(f"{name:28s} {result.status.value:20s} "
              f"t_stop={result.t_stop:<10.4g} "
              f"[{time.perf_counter() - t0:6.1f}s] -> {out_dir}")
        if code != 0:
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
