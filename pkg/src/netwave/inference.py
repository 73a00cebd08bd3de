"""Outbreak source inference from arrival times vs. effective distance.

A spreading wave that is concentric in the effective-distance geometry
shows up as a straight line in (distance from true source, arrival
time). Every candidate source gets scored by the goodness (R^2) of that
line; the candidate whose tree straightens the arrivals best is the
inferred origin. Noisy arrival data can be smoothed first by averaging
over consecutive fixed-duration time windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .arrivals import ArrivalTable
from .effective import shortest_path_field
from .errors import (
    EmptyInput,
    NoScorableCandidate,
    TooFewCommonRegions,
    TooFewPoints,
)
from .regions import RegionGraph


@dataclass(frozen=True)
class FitResult:
    """Ordinary least squares t = slope * x + intercept diagnostics.

    slope is the reciprocal effective velocity (time per unit effective
    distance); r_squared is clamped to [0, 1]; rmse is the root mean
    squared residual.
    """

    slope: float
    intercept: float
    r_squared: float
    n_points: int
    rmse: float

    @property
    def ss_res(self) -> float:
        """Residual sum of squares (for weighted fits: scaled by n/sum w)."""
        return self.rmse ** 2 * self.n_points


def linear_fit(
    points: list[tuple[float, float]],
    weights: list[float] | None = None,
) -> FitResult:
    """OLS fit of arrival time against effective distance.

    With weights (nonnegative, same length as points) the fit minimizes
    the weighted squared residuals; r_squared and rmse use the same
    weights. Degenerate rules: if all times are equal (zero total
    variance), R^2 is defined as 0; if all distances are equal the best
    line is the flat one through the (weighted) mean time, also R^2 = 0.
    """
    if len(points) < 2:
        raise TooFewPoints(f"linear fit needs >= 2 points, got {len(points)}")
    x = np.array([p[0] for p in points])
    t = np.array([p[1] for p in points])
    if not (np.isfinite(x).all() and np.isfinite(t).all()):
        raise ValueError("linear fit requires finite coordinates")
    if weights is None:
        w = np.ones_like(x)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != x.shape:
            raise ValueError("weights must match points one-to-one")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive sum")

    wsum = w.sum()
    x_mean = float((w * x).sum() / wsum)
    t_mean = float((w * t).sum() / wsum)
    sxx = float((w * (x - x_mean) ** 2).sum())
    if sxx == 0.0:
        slope = 0.0
        intercept = t_mean
    else:
        slope = float((w * (x - x_mean) * (t - t_mean)).sum() / sxx)
        intercept = t_mean - slope * x_mean
    resid = t - (slope * x + intercept)
    ss_res = float((w * resid ** 2).sum())
    ss_tot = float((w * (t - t_mean) ** 2).sum())
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(
        slope=slope,
        intercept=intercept,
        r_squared=min(1.0, max(0.0, r2)),
        n_points=len(points),
        rmse=math.sqrt(ss_res / wsum),
    )


def _window_buckets(
    points: list[tuple[float, float]],
    window_duration: float,
) -> list[list[int]]:
    """Indices of the input points grouped into consecutive time windows."""
    if not points:
        raise EmptyInput("window_smooth needs at least one point")
    if window_duration <= 0:
        raise ValueError(f"window_duration must be > 0, got {window_duration}")
    times = [t for _, t in points]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("points must be sorted ascending by arrival time")
    t0 = times[0]
    buckets: list[list[int]] = []
    current = -1
    for k, t in enumerate(times):
        idx = int((t - t0) / window_duration)
        if idx != current:
            buckets.append([])
            current = idx
        buckets[-1].append(k)
    return buckets


def window_smooth(
    points: list[tuple[float, float]],
    window_duration: float,
) -> list[tuple[float, float]]:
    """Average (distance, time) points over consecutive time windows.

    Windows have the given fixed duration, do not overlap, and start at
    the earliest arrival; each nonempty window collapses to the mean of
    its points (empty windows contribute nothing). Input must be sorted
    ascending by time.
    """
    out = []
    for bucket in _window_buckets(points, window_duration):
        out.append((sum(points[k][0] for k in bucket) / len(bucket),
                    sum(points[k][1] for k in bucket) / len(bucket)))
    return out


def candidate_points(
    graph: RegionGraph,
    arrivals: ArrivalTable,
    candidate: str,
) -> list[tuple[float, float, str]]:
    """(effective distance, arrival time, region id) triples for a fit.

    A region qualifies when it has a finite effective distance from the
    candidate and a present arrival; triples come back sorted by arrival
    time (ties by distance, then region id, for determinism).
    """
    field = shortest_path_field(graph, candidate)
    pairs: list[tuple[float, float, str]] = []
    for rid, d in zip(field.region_ids, field.distance):
        t = arrivals.get(rid)
        if t is None or not math.isfinite(d):
            continue
        pairs.append((t, float(d), rid))
    pairs.sort()
    return [(d, t, rid) for t, d, rid in pairs]


def score_candidate(
    graph: RegionGraph,
    arrivals: ArrivalTable,
    candidate: str,
    window_duration: float | None = None,
    weight_by_log_population: bool = False,
) -> FitResult:
    """Goodness of the linear arrival-vs-distance law for one candidate.

    With window_duration set, points are window-averaged before the fit
    (raw mode otherwise; both are exposed because noisy event data wants
    smoothing while clean simulated data does not). Peripheral low-user
    regions can optionally be down-weighted by log(1 + population); the
    default fit treats all regions equally. When both options are on,
    window points are population-weighted means carrying the summed
    weight of their members.
    """
    triples = candidate_points(graph, arrivals, candidate)
    if len(triples) < 2:
        raise TooFewPoints(
            f"candidate {candidate!r}: only {len(triples)} qualifying regions")
    pts = [(d, t) for d, t, _ in triples]
    if not weight_by_log_population:
        if window_duration is not None:
            pts = window_smooth(pts, window_duration)
        return linear_fit(pts)

    weights = [math.log1p(graph.region(rid).population) for _, _, rid in triples]
    if window_duration is not None:
        merged_pts, merged_w = [], []
        for bucket in _window_buckets(pts, window_duration):
            wsum = sum(weights[k] for k in bucket)
            merged_pts.append((
                sum(weights[k] * pts[k][0] for k in bucket) / wsum,
                sum(weights[k] * pts[k][1] for k in bucket) / wsum,
            ))
            merged_w.append(wsum)
        pts, weights = merged_pts, merged_w
    return linear_fit(pts, weights=weights)


@dataclass(frozen=True)
class SourceRanking:
    """Candidates ordered by descending fit quality.

    Ties on R^2 break by smaller residual sum, then region id. Regions
    that could not be scored at all are listed in skipped.
    """

    ranking: tuple[tuple[str, FitResult], ...]
    skipped: tuple[str, ...] = ()

    @property
    def best(self) -> tuple[str, FitResult]:
        return self.ranking[0]

    def rank_of(self, region_id: str) -> int:
        """1-based rank of a candidate; raises if it was not scored."""
        for k, (rid, _) in enumerate(self.ranking):
            if rid == region_id:
                return k + 1
        raise KeyError(region_id)


def infer_source(
    graph: RegionGraph,
    arrivals: ArrivalTable,
    window_duration: float | None = None,
    weight_by_log_population: bool = False,
) -> SourceRanking:
    """Score every region as a candidate source and rank by R^2.

    Candidates are independent of each other (pure functions of the
    immutable graph and table), so they may be scored in parallel; this
    implementation maps over them sequentially.
    """
    scored: list[tuple[str, FitResult]] = []
    skipped: list[str] = []
    for rid in graph.ids:
        try:
            scored.append((rid, score_candidate(
                graph, arrivals, rid, window_duration,
                weight_by_log_population=weight_by_log_population)))
        except TooFewPoints:
            skipped.append(rid)
    if not scored:
        raise NoScorableCandidate("no candidate source produced a scorable fit")
    scored.sort(key=lambda item: (-item[1].r_squared, item[1].ss_res, item[0]))
    return SourceRanking(ranking=tuple(scored), skipped=tuple(skipped))


def compare_arrivals(a: ArrivalTable, b: ArrivalTable) -> tuple[float, int]:
    """Spearman rank correlation between two arrival tables.

    Computed over the regions present in both (>= 3 required), with
    average ranks for ties. Degenerate tables where one side is constant
    get rho = 0. Symmetric in its arguments.
    """
    common = sorted(set(a.entries) & set(b.entries))
    if len(common) < 3:
        raise TooFewCommonRegions(
            f"need >= 3 common regions, got {len(common)}")
    ta = np.array([a.entries[r] for r in common])
    tb = np.array([b.entries[r] for r in common])
    if np.all(ta == ta[0]) or np.all(tb == tb[0]):
        return 0.0, len(common)
    rho = float(stats.spearmanr(ta, tb).statistic)
    return rho, len(common)
