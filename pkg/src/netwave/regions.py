"""Region metadata and the weighted directed flux graph.

A RegionGraph owns the list of regions, the directed flux matrix, and
the two matrices derived from it:

  flux[a, b]        directed flow (tie count) from region a to region b,
                    rows are origins, columns destinations, diagonal zero
  transitions[m, n] probability of choosing destination m when in region
                    n, i.e. flux[n, m] / sum_k flux[n, k]; columns sum to
                    one wherever region n has any out-flux
  coupling[m, n]    per-capita rate of flow from region m to region n,
                    i.e. flux[m, n] / population_m (rows are origins)

Graphs are immutable after construction (arrays are frozen read-only),
so they can be shared freely across worker threads/processes; anything
"derived" is computed exactly once, at build time.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateRegionId,
    InvalidCoordinate,
    NegativeWeight,
    NonPositivePopulation,
    UnknownRegionId,
)
from .util import round9


@dataclass(frozen=True)
class Region:
    """One node of the region graph: a geo-political area.

    Attributes:
        id: Stable unique key, e.g. "PH" or "US-CA".
        name: Display name.
        centroid_lat: Degrees in [-90, 90].
        centroid_lon: Degrees in (-180, 180].
        population: Number of users/inhabitants, > 0.
    """

    id: str
    name: str
    centroid_lat: float
    centroid_lon: float
    population: float

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("region id must be a non-empty string")
        if not (-90.0 <= self.centroid_lat <= 90.0):
            raise InvalidCoordinate(
                f"region {self.id!r}: latitude {self.centroid_lat} outside [-90, 90]")
        if not (-180.0 < self.centroid_lon <= 180.0):
            raise InvalidCoordinate(
                f"region {self.id!r}: longitude {self.centroid_lon} outside (-180, 180]")
        if not self.population > 0:
            raise NonPositivePopulation(
                f"region {self.id!r}: population must be > 0, got {self.population}")


def load_regions(records: Iterable[Mapping[str, object]]) -> list[Region]:
    """Validate raw region records (id, name, lat, lon, population).

    Records are returned as Regions in input order. Duplicate ids,
    unparseable coordinates, and non-positive populations are rejected.
    """
    regions: list[Region] = []
    seen: set[str] = set()
    for k, rec in enumerate(records):
        rid = str(rec.get("id", "") or "")
        if not rid:
            raise ValueError(f"record {k}: region id must be non-empty")
        if rid in seen:
            raise DuplicateRegionId(f"region id {rid!r} appears more than once")
        seen.add(rid)
        try:
            lat = float(rec["lat"])  # type: ignore[arg-type]
            lon = float(rec["lon"])  # type: ignore[arg-type]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidCoordinate(f"region {rid!r}: unparseable coordinates ({exc})")
        try:
            pop = float(rec["population"])  # type: ignore[arg-type]
        except (KeyError, TypeError, ValueError) as exc:
            raise NonPositivePopulation(f"region {rid!r}: unparseable population ({exc})")
        regions.append(Region(
            id=rid,
            name=str(rec.get("name", rid)),
            centroid_lat=lat,
            centroid_lon=lon,
            population=pop,
        ))
    return regions


def read_region_csv(path: str | Path) -> list[Region]:
    """Read a region table CSV with header id,name,lat,lon,population."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return load_regions(reader)


def build_flux(
    edges: Iterable[tuple[str, str, float]],
    regions: Sequence[Region],
    undirected: bool = False,
) -> tuple[np.ndarray, int]:
    """Aggregate an edge list into the directed flux matrix.

    Duplicate (from, to) pairs are summed. Self-loops are accumulated and
    then zeroed; their entry count is returned so callers can warn (the
    intra-region ties act through N_n, not through inter-region
    coupling). With undirected=True every input edge contributes its
    weight to both directions.

    Returns:
        (flux, self_loop_count) with flux[a, b] = flow from a to b.
    """
    index = {r.id: k for k, r in enumerate(regions)}
    n = len(regions)
    flux = np.zeros((n, n), dtype=float)
    self_loops = 0
    for src, dst, weight in edges:
        try:
            a, b = index[src], index[dst]
        except KeyError as exc:
            raise UnknownRegionId(f"edge endpoint {exc.args[0]!r} is not a known region")
        w = float(weight)
        if w < 0:
            raise NegativeWeight(f"edge ({src!r}, {dst!r}) has negative weight {w}")
        if a == b:
            self_loops += 1
            continue
        flux[a, b] += w
        if undirected:
            flux[b, a] += w
    return flux, self_loops


def read_edge_csv(path: str | Path) -> list[tuple[str, str, float]]:
    """Read an edge list CSV with header from,to,weight."""
    edges: list[tuple[str, str, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            edges.append((row["from"], row["to"], float(row["weight"])))
    return edges


def derive_transitions(flux: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Column-normalize the flux into destination-choice probabilities.

    transitions[m, n] = flux[n, m] / sum_k flux[n, k]. Regions with no
    out-flux become all-zero ("sink") columns rather than raising; their
    indices are returned as diagnostics.
    """
    out = np.asarray(flux, dtype=float).sum(axis=1)
    sinks = [int(i) for i in np.flatnonzero(out == 0.0)]
    denom = np.where(out > 0.0, out, 1.0)
    trans = np.ascontiguousarray((flux / denom[:, None]).T)
    return trans, sinks


def derive_coupling(flux: np.ndarray, regions: Sequence[Region]) -> np.ndarray:
    """Per-capita flow rates: coupling[m, n] = flux[m, n] / population_m."""
    pops = np.array([r.population for r in regions], dtype=float)
    return np.asarray(flux, dtype=float) / pops[:, None]


@dataclass(frozen=True)
class RegionGraph:
    """Immutable container for regions + flux + derived matrices.

    Build one with build_graph() (from an edge list) or graph_from_flux()
    (from a ready matrix); both enforce the invariants and freeze the
    arrays. Safe for concurrent read-sharing.
    """

    regions: tuple[Region, ...]
    flux: np.ndarray
    transitions: np.ndarray
    coupling: np.ndarray
    sink_regions: tuple[str, ...] = ()
    isolated_regions: tuple[str, ...] = ()
    self_loop_count: int = 0
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = len(self.regions)
        for (name, mat) in (("flux", self.flux), ("transitions", self.transitions),
                            ("coupling", self.coupling)):
            if mat.shape != (n, n):
                raise ValueError(f"{name} matrix shape {mat.shape} != ({n}, {n})")
        object.__setattr__(self, "_index", {r.id: k for k, r in enumerate(self.regions)})

    @property
    def n(self) -> int:
        return len(self.regions)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.regions)

    def index(self, region_id: str) -> int:
        try:
            return self._index[region_id]
        except KeyError:
            raise UnknownRegionId(f"no region with id {region_id!r}")

    def region(self, region_id: str) -> Region:
        return self.regions[self.index(region_id)]

    def populations(self) -> np.ndarray:
        return np.array([r.population for r in self.regions], dtype=float)


def graph_from_flux(
    regions: Sequence[Region],
    flux: np.ndarray,
    self_loops: int = 0,
) -> RegionGraph:
    """Assemble a RegionGraph from a prebuilt flux matrix.

    The matrix must be square, nonnegative, and match the region count.
    Nonzero diagonal entries are dropped (counted on top of the given
    self_loops), since all derived quantities ignore them.
    """
    flux = np.array(flux, dtype=float)
    n = len(regions)
    if flux.shape != (n, n):
        raise ValueError(f"flux shape {flux.shape} does not match {n} regions")
    if np.any(flux < 0):
        raise NegativeWeight("flux entries must be >= 0")
    ids = [r.id for r in regions]
    if len(set(ids)) != n:
        raise DuplicateRegionId("region ids must be unique within a graph")

    self_loops += int(np.count_nonzero(np.diag(flux)))
    np.fill_diagonal(flux, 0.0)

    trans, sink_idx = derive_transitions(flux)
    coup = derive_coupling(flux, regions)
    isolated = [ids[i] for i in range(n)
                if not flux[i].any() and not flux[:, i].any()]

    for arr in (flux, trans, coup):
        arr.setflags(write=False)
    return RegionGraph(
        regions=tuple(regions),
        flux=flux,
        transitions=trans,
        coupling=coup,
        sink_regions=tuple(ids[i] for i in sink_idx),
        isolated_regions=tuple(isolated),
        self_loop_count=self_loops,
    )


def build_graph(
    regions: Sequence[Region],
    edges: Iterable[tuple[str, str, float]],
    undirected: bool = False,
) -> RegionGraph:
    """Build a validated RegionGraph from regions plus an edge list."""
    flux, self_loops = build_flux(edges, regions, undirected=undirected)
    return graph_from_flux(regions, flux, self_loops=self_loops)


# ── graph bundle (JSON) ──────────────────────────────────────────────
#
# The bundle is the single self-describing artifact the CLI passes
# between commands. Derived matrices are stored for auditability, but
# the loader re-derives them from the stored flux: values in the file
# carry 9 significant digits, which is stable for regression-diffing
# but not enough to keep column sums within 1e-12 as stored.

BUNDLE_FORMAT = "netwave-graph/1"


def _matrix9(mat: np.ndarray) -> list[list[float]]:
    return [[round9(v) for v in row] for row in mat]


def save_bundle(graph: RegionGraph, path: str | Path) -> None:
    """Write a RegionGraph to a JSON bundle file."""
    doc = {
        "format": BUNDLE_FORMAT,
        "conventions": {
            "flux": "flux[i][j] = flow from regions[i] to regions[j]",
            "transitions": "transitions[m][n] = probability of picking "
                           "destination m when in region n (columns sum to 1)",
            "coupling": "coupling[m][n] = per-capita rate of flow from "
                        "regions[m] to regions[n]",
        },
        "regions": [
            {
                "id": r.id,
                "name": r.name,
                "lat": round9(r.centroid_lat),
                "lon": round9(r.centroid_lon),
                "population": round9(r.population),
            }
            for r in graph.regions
        ],
        "flux": _matrix9(graph.flux),
        "transitions": _matrix9(graph.transitions),
        "coupling": _matrix9(graph.coupling),
        "diagnostics": {
            "sink_regions": list(graph.sink_regions),
            "isolated_regions": list(graph.isolated_regions),
            "self_loop_count": graph.self_loop_count,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_bundle(path: str | Path) -> RegionGraph:
    """Read a JSON bundle back into a RegionGraph.

    Transition and coupling matrices are re-derived from the stored flux
    so the stochasticity invariant holds exactly after the 9-digit
    round-trip.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"{path}: not a {BUNDLE_FORMAT} bundle")
    regions = [
        Region(
            id=rec["id"],
            name=rec["name"],
            centroid_lat=float(rec["lat"]),
            centroid_lon=float(rec["lon"]),
            population=float(rec["population"]),
        )
        for rec in doc["regions"]
    ]
    return graph_from_flux(regions, np.array(doc["flux"], dtype=float))
