"""Effective distances, shortest-path trees, and figure-support exports.

An edge that is traversed with probability p gets the quasi-distance
1 - ln(p): certain hops cost exactly 1, unlikely hops cost more, and
path lengths add because the log turns products of probabilities into
sums. Shortest paths over these lengths are the most probable spreading
routes, and the tree distance from a chosen origin is the "effective
distance" used everywhere downstream.

Paths follow the spreading direction: stepping from region n to region m
uses the destination-choice probability transitions[m, n].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .arrivals import ArrivalTable
from .errors import EmptyArrivals, NonPositiveProbability
from .regions import Region, RegionGraph
from .util import round9

EARTH_RADIUS_KM = 6371.0


def edge_length(p: float) -> float:
    """Quasi-distance of a single hop taken with probability p in (0, 1].

    Always >= 1, with equality iff p == 1 (a certain hop). Zero-flux
    pairs have no edge at all; asking for their length raises.
    """
    if p <= 0.0:
        raise NonPositiveProbability(f"no edge exists for probability {p}")
    if p > 1.0:
        raise ValueError(f"probability {p} exceeds 1")
    return 1.0 - math.log(p)


@dataclass(frozen=True)
class EffectiveDistanceField:
    """Single-source shortest-path distances and predecessor tree.

    Arrays are aligned with region_ids. Unreachable regions carry
    distance +inf and predecessor None; the source has distance 0 and
    predecessor None.
    """

    source: str
    region_ids: tuple[str, ...]
    distance: np.ndarray
    predecessor: tuple[str | None, ...]

    def dist(self, region_id: str) -> float:
        return float(self.distance[self.region_ids.index(region_id)])

    def pred(self, region_id: str) -> str | None:
        return self.predecessor[self.region_ids.index(region_id)]

    def reachable(self) -> list[str]:
        return [rid for rid, d in zip(self.region_ids, self.distance)
                if math.isfinite(d)]


def _adjacency(graph: RegionGraph) -> list[list[tuple[str, int, float]]]:
    """Out-edges per region as (dest_id, dest_index, length), id-sorted."""
    n = graph.n
    ids = graph.ids
    adj: list[list[tuple[str, int, float]]] = [[] for _ in range(n)]
    flux = graph.flux
    trans = graph.transitions
    for a in range(n):
        row = np.flatnonzero(flux[a])
        dests = sorted((ids[int(b)], int(b)) for b in row)
        adj[a] = [(rid, b, edge_length(trans[b, a])) for rid, b in dests]
    return adj


def shortest_path_field(graph: RegionGraph, source: str) -> EffectiveDistanceField:
    """Dijkstra over effective edge lengths, following spreading direction.

    Deterministic: the settle queue is ordered by (distance, region id),
    and when two parents offer exactly the same distance the
    lexicographically smaller one keeps the predecessor slot.
    """
    return _dijkstra(graph, source, _adjacency(graph))


def _dijkstra(
    graph: RegionGraph,
    source: str,
    adj: list[list[tuple[str, int, float]]],
) -> EffectiveDistanceField:
    n = graph.n
    ids = graph.ids
    src = graph.index(source)

    dist = np.full(n, np.inf)
    pred: list[str | None] = [None] * n
    dist[src] = 0.0
    done = [False] * n
    heap: list[tuple[float, str, int]] = [(0.0, ids[src], src)]
    while heap:
        d_u, _, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for rid_v, v, length in adj[u]:
            d_v = d_u + length
            if d_v < dist[v]:
                dist[v] = d_v
                pred[v] = ids[u]
                heappush(heap, (d_v, rid_v, v))
            elif d_v == dist[v] and pred[v] is not None and ids[u] < pred[v]:
                pred[v] = ids[u]
    dist.setflags(write=False)
    return EffectiveDistanceField(
        source=source,
        region_ids=ids,
        distance=dist,
        predecessor=tuple(pred),
    )


def all_pairs_effective(graph: RegionGraph) -> np.ndarray:
    """Matrix D with D[s, v] = effective distance from region s to v.

    Row s equals shortest_path_field(graph, s).distance; the matrix is
    not symmetric in general. Rows are independent (pure function of the
    immutable graph), so callers may compute them in parallel; this
    implementation is a plain sequential map.
    """
    adj = _adjacency(graph)
    rows = [_dijkstra(graph, rid, adj).distance for rid in graph.ids]
    return np.vstack(rows)


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in km between two (lat, lon) points."""
    rlat1, rlon1, rlat2, rlon2 = map(math.radians, (lat1, lon1, lat2, lon2))
    a = (math.sin((rlat2 - rlat1) / 2.0) ** 2
         + math.cos(rlat1) * math.cos(rlat2) * math.sin((rlon2 - rlon1) / 2.0) ** 2)
    return EARTH_RADIUS_KM * 2.0 * math.asin(min(1.0, math.sqrt(a)))


def geographic_distance(a: Region, b: Region) -> float:
    """Great-circle distance between two region centroids, in km."""
    return haversine_km(a.centroid_lat, a.centroid_lon,
                        b.centroid_lat, b.centroid_lon)


# ── radial layout (tree embedding for the wheel figure) ──────────────

@dataclass(frozen=True)
class PolarNode:
    id: str
    r: float
    theta: float


@dataclass(frozen=True)
class RadialLayout:
    """Polar coordinates for every reachable node plus the tree edges.

    r is the node's effective distance from the source; theta is chosen
    by depth-first traversal, every subtree getting an angular sector
    proportional to its leaf count, children at sector centers. The
    source sits at (0, 0).
    """

    source: str
    nodes: tuple[PolarNode, ...]
    edges: tuple[tuple[str, str], ...]

    def to_json_dict(self) -> dict:
        return {
            "source": self.source,
            "nodes": [
                {"id": n.id, "r": round9(n.r), "theta": round9(n.theta)}
                for n in self.nodes
            ],
            "edges": [{"parent": p, "child": c} for p, c in self.edges],
        }


def radial_layout(field: EffectiveDistanceField, graph: RegionGraph) -> RadialLayout:
    """Embed the shortest-path tree in polar coordinates.

    Unreachable regions are omitted. Deterministic: children are visited
    in region-id order.
    """
    ids = field.region_ids
    children: dict[str, list[str]] = {rid: [] for rid in ids}
    for rid, parent in zip(ids, field.predecessor):
        if parent is not None:
            children[parent].append(rid)
    for kids in children.values():
        kids.sort()

    leaves: dict[str, int] = {}

    def count_leaves(rid: str) -> int:
        kids = children[rid]
        total = 1 if not kids else sum(count_leaves(k) for k in kids)
        leaves[rid] = total
        return total

    count_leaves(field.source)

    nodes = [PolarNode(field.source, 0.0, 0.0)]
    edges: list[tuple[str, str]] = []

    def assign(rid: str, lo: float, hi: float) -> None:
        start = lo
        for kid in children[rid]:
            span = (hi - lo) * leaves[kid] / leaves[rid]
            nodes.append(PolarNode(
                kid,
                field.dist(kid),
                start + span / 2.0,
            ))
            edges.append((rid, kid))
            assign(kid, start, start + span)
            start += span

    assign(field.source, 0.0, 2.0 * math.pi)
    return RadialLayout(source=field.source, nodes=tuple(nodes), edges=tuple(edges))


# ── stage histogram (wavefront snapshots) ────────────────────────────

@dataclass(frozen=True)
class Stage:
    """One equal-length time slice of the propagation.

    members lists the regions whose arrival falls in [t_start, t_end)
    (the final slice is closed on the right); distances are their
    effective distances from the field's source; counts is the histogram
    of those distances over the shared bin grid.
    """

    index: int
    t_start: float
    t_end: float
    members: tuple[str, ...]
    distances: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class StageHistogram:
    source: str
    bin_width: float
    bin_edges: np.ndarray
    stages: tuple[Stage, ...]
    skipped_regions: tuple[str, ...]


def stage_histogram(
    field: EffectiveDistanceField,
    arrivals: ArrivalTable,
    stages: int,
    bin_width: float = 0.5,
) -> StageHistogram:
    """Bin regions into k progressive stages and histogram their distances.

    The [min, max] arrival interval (over the regions that can be
    placed: present in the graph, finite effective distance) is split
    into `stages` equal slices. Regions with arrivals but no finite
    distance from the source are skipped and reported.
    """
    if stages < 1:
        raise ValueError(f"stages must be >= 1, got {stages}")
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    if not arrivals.entries:
        raise EmptyArrivals("cannot build stage histogram from an empty arrival table")

    pos = {rid: k for k, rid in enumerate(field.region_ids)}
    usable: list[tuple[str, float, float]] = []
    skipped: list[str] = []
    for rid, t in sorted(arrivals.entries.items()):
        k = pos.get(rid)
        if k is None or not math.isfinite(field.distance[k]):
            skipped.append(rid)
            continue
        usable.append((rid, t, float(field.distance[k])))
    if not usable:
        raise EmptyArrivals("no arrival region is reachable from the source")

    times = np.array([t for _, t, _ in usable])
    t0, t1 = float(times.min()), float(times.max())
    span = t1 - t0
    n_bins = int(max(d for _, _, d in usable) // bin_width) + 1
    edges = np.arange(n_bins + 1) * bin_width

    per_stage: list[list[tuple[str, float]]] = [[] for _ in range(stages)]
    for rid, t, d in usable:
        if span == 0.0:
            idx = 0
        else:
            idx = min(int(stages * (t - t0) / span), stages - 1)
        per_stage[idx].append((rid, d))

    built = []
    width = span / stages if span > 0 else 0.0
    for i, members in enumerate(per_stage):
        dists = np.array([d for _, d in members])
        counts = np.zeros(n_bins, dtype=int)
        for d in dists:
            counts[min(int(d // bin_width), n_bins - 1)] += 1
        built.append(Stage(
            index=i,
            t_start=t0 + i * width,
            t_end=t1 if i == stages - 1 else t0 + (i + 1) * width,
            members=tuple(rid for rid, _ in members),
            distances=dists,
            counts=counts,
        ))
    return StageHistogram(
        source=field.source,
        bin_width=bin_width,
        bin_edges=edges,
        stages=tuple(built),
        skipped_regions=tuple(skipped),
    )
