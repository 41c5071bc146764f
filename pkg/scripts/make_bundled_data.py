#!/usr/bin/env python3
"""Regenerate the bundled crash-vehicle fixture and its availability catalog.

The fixture is a 100-vehicle model-year-2021 cohort built so the cohort
availability fractions come out at published values: lane centering assist
23% standard + 2% optional, pedestrian automatic emergency braking 67%
standard with no optional offerings. Deterministic; writes into the
package data directory.
"""

from pathlib import Path

from adasfleet.catalog import FeatureId
from adasfleet.vin import compute_check_digit

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "adasfleet" / "data" / "default"

COHORT_SIZE = 100
LCA_STANDARD = 23
LCA_OPTIONAL = 2
PAEB_STANDARD = 67
CRASH_YEAR = 2021

# Position 7 is alphabetic, selecting the 2010-2039 model-year cycle;
# position 10 'M' then decodes to 2021.
VIN_TEMPLATE = "1ATCDEFG{check}MA{serial:06d}"


def fixture_vin(index: int) -> str:
    draft = VIN_TEMPLATE.format(check="0", serial=index)
    return VIN_TEMPLATE.format(check=compute_check_digit(draft), serial=index)


def main() -> None:
    lca = FeatureId.LANE_CENTERING_ASSIST.value
    paeb = FeatureId.PEDESTRIAN_AUTOMATIC_EMERGENCY_BRAKING.value

    catalog_lines = [
        "# Availability catalog for the bundled crash-vehicle fixture.",
        "# Models absent for a feature resolve to not_available at model year 2021.",
        "make,model,model_year,feature,availability",
    ]
    for i in range(LCA_STANDARD):
        catalog_lines.append(f"acme,m{i:02d},2021,{lca},standard")
    for i in range(LCA_STANDARD, LCA_STANDARD + LCA_OPTIONAL):
        catalog_lines.append(f"acme,m{i:02d},2021,{lca},optional")
    for i in range(PAEB_STANDARD):
        catalog_lines.append(f"acme,m{i:02d},2021,{paeb},standard")
    (DATA_DIR / "catalog.csv").write_text("\n".join(catalog_lines) + "\n", encoding="utf-8")

    fars_lines = [
        "# Model-year-2021 vehicles involved in 2021 fatal crashes (synthetic cohort).",
        "vin,crash_year,make,model",
    ]
    for i in range(COHORT_SIZE):
        fars_lines.append(f"{fixture_vin(i)},{CRASH_YEAR},acme,m{i:02d}")
    (DATA_DIR / "fars_vehicles.csv").write_text("\n".join(fars_lines) + "\n", encoding="utf-8")

    print(f"wrote {DATA_DIR / 'catalog.csv'} and {DATA_DIR / 'fars_vehicles.csv'}")


if __name__ == "__main__":
    main()
