"""Shared test fixtures: graph factories and independent oracles.

The oracles here deliberately avoid the library's own code paths: the
shortest-path oracle enumerates simple paths, the OLS oracle uses the
textbook normal equations, and so on. They exist so the fast
implementations can be checked against something slow and obvious.
"""

from __future__ import annotations

import math

import numpy as np

from netwave import Region, RegionGraph, build_graph, graph_from_flux


def make_regions(n, populations=None, rng=None):
    """n regions R00..R(n-1) with valid centroids."""
    pops = populations if populations is not None else [1000.0] * n
    if rng is None:
        lats = [(k * 7 % 120) - 60.0 for k in range(n)]
        lons = [(k * 13 % 300) - 120.0 for k in range(n)]
    else:
        lats = rng.uniform(-60, 70, n)
        lons = rng.uniform(-179, 180, n)
    return [
        Region(id=f"R{k:02d}", name=f"region {k}", centroid_lat=float(lats[k]),
               centroid_lon=float(lons[k]), population=float(pops[k]))
        for k in range(n)
    ]


def random_graph(rng, n, edge_prob=0.5, flux_lo=-1.0, flux_hi=2.0,
                 populations=None) -> RegionGraph:
    """Random directed graph with log-uniform positive flux."""
    regions = make_regions(n, populations=populations, rng=rng)
    mask = rng.random((n, n)) < edge_prob
    np.fill_diagonal(mask, False)
    flux = np.where(mask, 10.0 ** rng.uniform(flux_lo, flux_hi, (n, n)), 0.0)
    return graph_from_flux(regions, flux)


def connected_trial_graph(rng, n=50, extra_edge_prob=0.08,
                          flux_lo=-1.0, flux_hi=1.0,
                          pop_lo=3.9, pop_hi=4.1) -> RegionGraph:
    """Strongly connected random graph for outbreak trials.

    A ring through a random permutation guarantees every region is
    reachable from every other; extra random edges add shortcuts.
    """
    pops = 10.0 ** rng.uniform(pop_lo, pop_hi, n)
    regions = make_regions(n, populations=pops, rng=rng)
    order = rng.permutation(n)
    edges = []
    for i in range(n):
        a, b = int(order[i]), int(order[(i + 1) % n])
        edges.append((regions[a].id, regions[b].id,
                      float(10.0 ** rng.uniform(flux_lo, flux_hi))))
    mask = rng.random((n, n)) < extra_edge_prob
    for a in range(n):
        for b in range(n):
            if a != b and mask[a, b]:
                edges.append((regions[a].id, regions[b].id,
                              float(10.0 ** rng.uniform(flux_lo, flux_hi))))
    return build_graph(regions, edges)


# ── independent oracles ──────────────────────────────────────────────

def brute_force_distances(graph: RegionGraph, source: str) -> dict[str, float]:
    """Exhaustive simple-path enumeration over 1 - ln(P) edge lengths.

    Exponential in graph size; only sane for <= 8 nodes.
    """
    ids = list(graph.ids)
    flux = np.asarray(graph.flux)
    out = flux.sum(axis=1)
    n = len(ids)
    best = {rid: math.inf for rid in ids}
    best[source] = 0.0
    src = ids.index(source)

    def dfs(node: int, dist: float, visited: frozenset) -> None:
        for m in range(n):
            if m == node or m in visited or flux[node, m] <= 0.0:
                continue
            d = dist + 1.0 - math.log(flux[node, m] / out[node])
            if d < best[ids[m]]:
                best[ids[m]] = d
            dfs(m, d, visited | {m})

    dfs(src, 0.0, frozenset({src}))
    return best


def ols_oracle(x, t):
    """Textbook OLS via explicit sums: slope, intercept, R^2."""
    x = list(map(float, x))
    t = list(map(float, t))
    n = len(x)
    sx, st = sum(x), sum(t)
    sxx = sum(v * v for v in x)
    sxt = sum(a * b for a, b in zip(x, t))
    den = n * sxx - sx * sx
    slope = (n * sxt - sx * st) / den
    intercept = (st - slope * sx) / n
    ss_res = sum((b - slope * a - intercept) ** 2 for a, b in zip(x, t))
    mean_t = st / n
    ss_tot = sum((b - mean_t) ** 2 for b in t)
    r2 = 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def spearman_oracle(x, y):
    """rho = 1 - 6 sum d^2 / (n (n^2 - 1)); valid only without ties."""
    def ranks(v):
        order = sorted(range(len(v)), key=lambda i: v[i])
        r = [0] * len(v)
        for pos, i in enumerate(order):
            r[i] = pos + 1
        return r
    rx, ry = ranks(x), ranks(y)
    n = len(x)
    d2 = sum((a - b) ** 2 for a, b in zip(rx, ry))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def logistic(t, alpha, N, I0):
    """Closed-form single-region SI solution."""
    e = np.exp(alpha * np.asarray(t))
    return N * I0 * e / (N - I0 + I0 * e)


def logistic_crossing(epsilon, alpha, N, I0):
    """Time at which the logistic reaches fraction epsilon of N."""
    return math.log(epsilon * (N - I0) / (I0 * (1.0 - epsilon))) / alpha
