"""First-arrival tables: region id -> arrival time, with provenance.

All three producers write the same structure: simulated trajectories
(provenance "simulated"), geo-tagged event logs ("events"), and coarse
cumulative series ("coarse-bins", resolution = the bin width).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .util import fmt9

PROVENANCES = ("simulated", "events", "coarse-bins")


@dataclass(frozen=True)
class ArrivalTable:
    """Mapping of region id to first-arrival time (absent = never seen).

    Times share one epoch and unit (the producer's). resolution is 0 for
    exact times, or the coarse bin width for binned data.
    """

    entries: dict[str, float]
    provenance: str
    resolution: float = 0.0

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(
                f"provenance must be one of {PROVENANCES}, got {self.provenance!r}")
        if self.resolution < 0:
            raise ValueError(f"resolution must be >= 0, got {self.resolution}")
        for rid, t in self.entries.items():
            if not math.isfinite(t):
                raise ValueError(f"arrival time for {rid!r} is not finite: {t}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, region_id: str) -> bool:
        return region_id in self.entries

    def get(self, region_id: str) -> float | None:
        return self.entries.get(region_id)

    def items_by_id(self) -> list[tuple[str, float]]:
        return sorted(self.entries.items())


def write_arrivals_csv(table: ArrivalTable, path: str | Path) -> None:
    """Write region_id,arrival_time,provenance,resolution rows, id-sorted."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region_id", "arrival_time", "provenance", "resolution"])
        for rid, t in table.items_by_id():
            writer.writerow([rid, fmt9(t), table.provenance, fmt9(table.resolution)])


def read_arrivals_csv(path: str | Path) -> ArrivalTable:
    """Read an arrival CSV written by write_arrivals_csv."""
    entries: dict[str, float] = {}
    provenance: str | None = None
    resolution = 0.0
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rid = row["region_id"]
            entries[rid] = float(row["arrival_time"])
            if provenance is None:
                provenance = row["provenance"]
                resolution = float(row["resolution"])
            elif provenance != row["provenance"]:
                raise ValueError(f"{path}: mixed provenance values in one table")
    if provenance is None:
        raise ValueError(f"{path}: arrival table is empty")
    return ArrivalTable(entries=entries, provenance=provenance, resolution=resolution)
