#!/usr/bin/env python3
"""Run the whole estimation pipeline on the bundled data and show its work.

Prints the analog matches, the fleet-rate transfers, and the composed
penetration table for the requested year (default 2022).
"""

import argparse

from adasfleet.catalog import PRIORITY_FEATURES
from adasfleet.cli import RunConfig, build_fars_series, load_bundle
from adasfleet.errors import InsufficientData
from adasfleet.estimator import EstimatorConfig, estimate_equipped, estimate_table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--year", type=int, default=2022)
    parser.add_argument("--data-dir", default=None, help="directory overriding bundled data files")
    args = parser.parse_args()

    config = RunConfig(data_dir=args.data_dir)
    bundle = load_bundle(config)
    fars_series = build_fars_series(bundle)
    thresholds = EstimatorConfig()

    print(f"== equipped-rate derivations for {args.year} ==")
    for feature in PRIORITY_FEATURES:
        try:
            est = estimate_equipped(feature, args.year, bundle.fleet, bundle.adoption, fars_series, thresholds)
        except InsufficientData as exc:
            print(f"{feature.value}: unavailable ({exc})")
            continue
        line = f"{feature.value}: {est.rate} via {est.provenance.render()}"
        if est.match is not None:
            line += f" (distance {est.match.distance:.6f}, overlap {est.match.overlap_years}y)"
        if est.cautions:
            line += " cautions=" + ",".join(sorted(c.render() for c in est.cautions))
        print(line)

    print(f"\n== composed penetration table for {args.year} ==")
    rows = estimate_table(args.year, bundle.fleet, bundle.adoption, fars_series, bundle.activation, thresholds)
    for row in rows:
        print(
            f"{row.feature.display_name:<40} equipped {row.equipped_pct:>3}%  "
            f"activated-when-equipped {row.activation_pct:>3}%  "
            f"activated-of-fleet {row.activated_of_fleet_pct:>3}%"
        )


if __name__ == "__main__":
    main()
