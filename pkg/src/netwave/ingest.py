"""Raw observation data -> arrival tables.

Two input families are supported: geo-tagged event logs (one row per
matching public post) and coarse cumulative-interest series (one row
per region and time bin, e.g. biweekly search counts). Events without a
pre-assigned region are attached to the nearest region centroid; polygon
geocoding is deliberately out of scope.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .arrivals import ArrivalTable
from .effective import haversine_km
from .errors import DuplicateRegionId, NonMonotoneCumulative, UnknownRegionId
from .regions import Region


@dataclass(frozen=True)
class GeoEvent:
    """One geo-tagged observation (timestamp in UNIX seconds).

    Coordinates only need to be valid when no region_id is pre-assigned;
    pre-assigned events are taken at their word.
    """

    timestamp: float
    lat: float
    lon: float
    region_id: str | None = None

    def __post_init__(self) -> None:
        if self.region_id is None:
            if not (-90.0 <= self.lat <= 90.0 and -180.0 < self.lon <= 180.0):
                raise ValueError(
                    f"event at t={self.timestamp}: invalid coordinates "
                    f"({self.lat}, {self.lon}) and no region id")


def assign_region(event: GeoEvent, regions: Sequence[Region]) -> str:
    """Region id for an event: pre-assigned, else nearest centroid.

    Nearest is by great-circle distance; exact ties break to the
    lexicographically smaller region id.
    """
    if not regions:
        raise ValueError("assign_region needs a nonempty region list")
    if event.region_id is not None:
        if all(r.id != event.region_id for r in regions):
            raise UnknownRegionId(
                f"event region id {event.region_id!r} is not a known region")
        return event.region_id
    best_id = ""
    best_d = math.inf
    for r in sorted(regions, key=lambda r: r.id):
        d = haversine_km(event.lat, event.lon, r.centroid_lat, r.centroid_lon)
        if d < best_d:
            best_d = d
            best_id = r.id
    return best_id


def first_arrivals(
    events: Iterable[GeoEvent], regions: Sequence[Region]
) -> ArrivalTable:
    """Earliest event timestamp per region (provenance "events").

    Order-independent: the minimum does not care how the log is sorted.
    Regions with no events are simply absent.
    """
    earliest: dict[str, float] = {}
    for event in events:
        rid = assign_region(event, regions)
        t = float(event.timestamp)
        if rid not in earliest or t < earliest[rid]:
            earliest[rid] = t
    return ArrivalTable(entries=earliest, provenance="events", resolution=0.0)


def read_events_csv(path: str | Path) -> tuple[list[GeoEvent], int]:
    """Read timestamp,lat,lon[,region_id] rows.

    Malformed rows are skipped, not fatal; the skip count comes back so
    callers can report it.
    """
    events: list[GeoEvent] = []
    skipped = 0
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rid = (row.get("region_id") or "").strip() or None
            try:
                events.append(GeoEvent(
                    timestamp=float(row["timestamp"]),
                    lat=float(row["lat"]) if rid is None else _opt_float(row.get("lat")),
                    lon=float(row["lon"]) if rid is None else _opt_float(row.get("lon")),
                    region_id=rid,
                ))
            except (KeyError, TypeError, ValueError):
                skipped += 1
    return events, skipped


def _opt_float(raw: str | None) -> float:
    try:
        return float(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        return math.nan


@dataclass(frozen=True)
class CoarseSeries:
    """Cumulative counts for one region on a uniform time grid.

    bin_starts are strictly increasing with spacing bin_width;
    cumulative counts are nonnegative and non-decreasing.
    """

    region_id: str
    bin_starts: tuple[float, ...]
    cumulative: tuple[float, ...]
    bin_width: float

    def __post_init__(self) -> None:
        if self.bin_width <= 0:
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")
        if len(self.bin_starts) != len(self.cumulative):
            raise ValueError("bin_starts and cumulative lengths differ")
        if not self.bin_starts:
            raise ValueError(f"series {self.region_id!r} has no bins")
        for a, b in zip(self.bin_starts, self.bin_starts[1:]):
            if b <= a:
                raise ValueError(
                    f"series {self.region_id!r}: bin starts must strictly increase")
            if abs((b - a) - self.bin_width) > 1e-9 * max(1.0, self.bin_width):
                raise ValueError(
                    f"series {self.region_id!r}: bin spacing {b - a} != "
                    f"declared width {self.bin_width}")
        prev = -math.inf
        for c in self.cumulative:
            if c < 0:
                raise ValueError(
                    f"series {self.region_id!r}: negative cumulative count {c}")
            if c < prev:
                raise NonMonotoneCumulative(
                    f"series {self.region_id!r}: cumulative count dropped "
                    f"from {prev} to {c}")
            prev = c


def arrivals_from_coarse(
    series: Sequence[CoarseSeries], threshold: float = 1.0
) -> ArrivalTable:
    """First bin start where each region's cumulative count >= threshold.

    Regions that never reach the threshold are absent. All series must
    share one bin width, which becomes the table's resolution.
    """
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    widths = {s.bin_width for s in series}
    if len(widths) > 1:
        raise ValueError(f"series mix bin widths: {sorted(widths)}")
    entries: dict[str, float] = {}
    for s in series:
        if s.region_id in entries:
            raise DuplicateRegionId(
                f"coarse series for region {s.region_id!r} appears twice")
        for start, count in zip(s.bin_starts, s.cumulative):
            if count >= threshold:
                entries[s.region_id] = start
                break
    return ArrivalTable(
        entries=entries,
        provenance="coarse-bins",
        resolution=widths.pop() if widths else 0.0,
    )


def read_coarse_csv(path: str | Path, bin_width: float) -> list[CoarseSeries]:
    """Read region_id,bin_start,cumulative_count rows into series.

    Rows are grouped by region and sorted by bin start; the declared
    bin width is validated against the observed spacing.
    """
    grouped: dict[str, list[tuple[float, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            grouped.setdefault(row["region_id"], []).append(
                (float(row["bin_start"]), float(row["cumulative_count"])))
    series = []
    for rid in sorted(grouped):
        rows = sorted(grouped[rid])
        series.append(CoarseSeries(
            region_id=rid,
            bin_starts=tuple(t for t, _ in rows),
            cumulative=tuple(c for _, c in rows),
            bin_width=bin_width,
        ))
    return series
