"""Driver-assistance feature taxonomy and the make/model/year availability catalog."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import BadEnumValue, DuplicateKey, SchemaError


class FeatureId(Enum):
    ADAPTIVE_CRUISE_CONTROL = "adaptive_cruise_control"
    AUTOMATIC_EMERGENCY_BRAKING = "automatic_emergency_braking"
    FORWARD_COLLISION_PREVENTION = "forward_collision_prevention"
    LANE_CENTERING_ASSIST = "lane_centering_assist"
    LANE_DEPARTURE_PREVENTION = "lane_departure_prevention"
    PEDESTRIAN_AUTOMATIC_EMERGENCY_BRAKING = "pedestrian_automatic_emergency_braking"
    # Analog technologies used for adoption-curve matching.
    LANE_DEPARTURE_WARNING = "lane_departure_warning"
    REAR_PARKING_SENSORS = "rear_parking_sensors"
    ELECTRONIC_STABILITY_CONTROL = "electronic_stability_control"
    LANE_KEEP_ASSIST = "lane_keep_assist"

    @property
    def display_name(self) -> str:
        return self.value.replace("_", " ").capitalize()


# Report row order for the six features tracked as high priority.
PRIORITY_FEATURES: tuple[FeatureId, ...] = (
    FeatureId.ADAPTIVE_CRUISE_CONTROL,
    FeatureId.AUTOMATIC_EMERGENCY_BRAKING,
    FeatureId.FORWARD_COLLISION_PREVENTION,
    FeatureId.LANE_CENTERING_ASSIST,
    FeatureId.LANE_DEPARTURE_PREVENTION,
    FeatureId.PEDESTRIAN_AUTOMATIC_EMERGENCY_BRAKING,
)

ANALOG_FEATURES: tuple[FeatureId, ...] = (
    FeatureId.LANE_DEPARTURE_WARNING,
    FeatureId.REAR_PARKING_SENSORS,
    FeatureId.ELECTRONIC_STABILITY_CONTROL,
    FeatureId.LANE_KEEP_ASSIST,
)


def feature_from_name(name: str) -> FeatureId:
    try:
        return FeatureId(name.strip())
    except ValueError:
        raise BadEnumValue(f"unknown feature name {name!r}") from None


class Availability(Enum):
    STANDARD = "standard"
    OPTIONAL = "optional"
    NOT_AVAILABLE = "not_available"
    # Reserved for model years below the decode-coverage floor or absent records.
    UNKNOWN = "unknown"


_CSV_AVAILABILITY = {
    "standard": Availability.STANDARD,
    "optional": Availability.OPTIONAL,
    "not_available": Availability.NOT_AVAILABLE,
}


def availability_from_name(name: str) -> Availability:
    try:
        return _CSV_AVAILABILITY[name.strip()]
    except KeyError:
        raise BadEnumValue(f"availability must be one of {sorted(_CSV_AVAILABILITY)}, got {name!r}") from None


@dataclass(frozen=True)
class TrimAvailabilityRecord:
    make: str
    model: str
    model_year: int
    feature: FeatureId
    availability: Availability


@dataclass(frozen=True)
class MandateInfo:
    """A regulatory mandate that can distort an analog technology's adoption."""

    feature: FeatureId
    announced_year: int
    effective_year: int

    def __post_init__(self):
        if self.announced_year > self.effective_year:
            raise ValueError("mandate cannot take effect before it is announced")


# FMVSS 126: electronic stability control, proposed 2006, mandatory on new
# vehicles from 2012.
DEFAULT_MANDATES: Mapping[FeatureId, MandateInfo] = {
    FeatureId.ELECTRONIC_STABILITY_CONTROL: MandateInfo(
        FeatureId.ELECTRONIC_STABILITY_CONTROL, announced_year=2006, effective_year=2012
    ),
}

# Decoded availability data does not reach below this model year.
DEFAULT_COVERAGE_FLOOR = 2017

CATALOG_HEADER = ("make", "model", "model_year", "feature", "availability")


def _key(make: str, model: str, model_year: int, feature: FeatureId):
    return (make.strip().lower(), model.strip().lower(), model_year, feature)


@dataclass(frozen=True)
class Catalog:
    """Immutable (make, model, year, feature) -> availability index."""

    records: tuple[TrimAvailabilityRecord, ...]
    coverage_floor: int = DEFAULT_COVERAGE_FLOOR
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for rec in self.records:
            key = _key(rec.make, rec.model, rec.model_year, rec.feature)
            if key in index:
                raise DuplicateKey(
                    f"duplicate catalog entry for {rec.make}/{rec.model}/{rec.model_year}/{rec.feature.value}"
                )
            index[key] = rec.availability
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.records)

    def lookup_availability(self, make: str, model: str, model_year: int, feature: FeatureId) -> Availability:
        """Stored value on a hit; on a miss, Unknown below the coverage floor
        and NotAvailable at or above it. Total: never raises."""
        hit = self._index.get(_key(make, model, model_year, feature))
        if hit is not None:
            return hit
        if model_year < self.coverage_floor:
            return Availability.UNKNOWN
        return Availability.NOT_AVAILABLE


def _read_table(source, expected_header: tuple[str, ...]) -> Iterable[tuple[int, list[str]]]:
    """Yield (line_number, cells) for a comma-split table.

    The dialect is deliberately naive: no quoting, so an embedded comma
    changes the column count and the row is rejected. Blank lines and
    '#' comment lines are skipped.
    """
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, Path)) else source.read()
    lines = text.splitlines()
    rows = []
    header = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            header = cells
            if tuple(header) != expected_header:
                raise SchemaError(f"expected header {','.join(expected_header)!r}, got {line!r}")
            continue
        if len(cells) != len(expected_header):
            raise SchemaError(f"row {lineno}: expected {len(expected_header)} columns, got {len(cells)}")
        rows.append((lineno, cells))
    if header is None:
        raise SchemaError("file has no header row")
    return rows


def load_catalog(source, coverage_floor: int = DEFAULT_COVERAGE_FLOOR) -> Catalog:
    """Load an availability catalog CSV, rejecting duplicates and bad enums."""
    records = []
    seen = set()
    for lineno, (make, model, year_text, feature_text, avail_text) in _read_table(source, CATALOG_HEADER):
        try:
            model_year = int(year_text)
        except ValueError:
            raise SchemaError(f"row {lineno}: model_year {year_text!r} is not an integer") from None
        if model_year < 1980:
            raise SchemaError(f"row {lineno}: model_year {model_year} predates 17-character VINs")
        try:
            feature = feature_from_name(feature_text)
            availability = availability_from_name(avail_text)
        except BadEnumValue as exc:
            raise BadEnumValue(f"row {lineno}: {exc}") from None
        key = _key(make, model, model_year, feature)
        if key in seen:
            raise DuplicateKey(f"row {lineno}: duplicate key {make}/{model}/{model_year}/{feature.value}")
        seen.add(key)
        records.append(TrimAvailabilityRecord(make, model, model_year, feature, availability))
    return Catalog(records=tuple(records), coverage_floor=coverage_floor)
