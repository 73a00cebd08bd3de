"""Command-line pipeline driver.

Subcommands wire the library end to end:

  build     region table + edge list      -> graph bundle JSON
  simulate  bundle + scenario JSON        -> trajectory.csv, arrivals.csv
  arrivals  bundle + event/coarse CSV     -> arrivals.csv
  infer     bundle + arrivals.csv         -> ranking.csv, scatter.csv
  export    bundle + source [+ arrivals]  -> layout.json, distances.csv,
                                             stage_histogram.csv
  compare   two arrivals.csv              -> comparison.json

Every command validates its inputs fully before writing anything, exits
nonzero on any domain error, and is deterministic: identical inputs give
byte-identical outputs. Alongside each delimited/JSON report the command
renders the matching matplotlib figure (disable with --no-figures).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import figures
from .arrivals import read_arrivals_csv, write_arrivals_csv
from .dynamics import SIParams, Trajectory, arrival_times, simulate
from .effective import (
    geographic_distance,
    radial_layout,
    shortest_path_field,
    stage_histogram,
)
from .errors import NetwaveError
from .inference import compare_arrivals, infer_source
from .ingest import arrivals_from_coarse, first_arrivals, read_coarse_csv, read_events_csv
from .regions import (
    build_graph,
    load_bundle,
    read_edge_csv,
    read_region_csv,
    save_bundle,
)
from .util import fmt9, round9

DEFAULT_EPSILON = 0.01
DEFAULT_WINDOW = 14.0
DEFAULT_THRESHOLD = 1.0
DEFAULT_STAGES = 4
DEFAULT_BIN_WIDTH = 0.5


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output-dir", default=".", help="directory for output files")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for synthetic generators (the built-in commands "
                        "are fully deterministic and do not consume it)")
    p.add_argument("--window-duration", type=float, default=None,
                   help="moving-window duration for smoothed fits "
                        f"(default: raw fit; {DEFAULT_WINDOW} suits day-unit data)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="infected-fraction threshold for arrival detection")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="cumulative-count threshold for coarse arrivals")
    p.add_argument("--undirected", action="store_true",
                   help="treat edge list weights as mutual (both directions)")
    p.add_argument("--no-figures", dest="figures", action="store_false",
                   help="skip PNG rendering, write only delimited/JSON output")


def _outdir(args) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ── build ────────────────────────────────────────────────────────────

def _cmd_build(args) -> int:
    regions = read_region_csv(args.regions)
    edges = read_edge_csv(args.edges)
    graph = build_graph(regions, edges, undirected=args.undirected)
    out = _outdir(args)
    save_bundle(graph, out / "graph.json")
    print(f"graph.json: {graph.n} regions, "
          f"{int((graph.flux > 0).sum())} directed edges")
    if graph.self_loop_count:
        print(f"warning: dropped {graph.self_loop_count} self-loop edges")
    if graph.sink_regions:
        print(f"warning: {len(graph.sink_regions)} regions with no out-flux: "
              f"{', '.join(graph.sink_regions)}")
    if graph.isolated_regions:
        print(f"warning: {len(graph.isolated_regions)} isolated regions: "
              f"{', '.join(graph.isolated_regions)}")
    return 0


# ── simulate ─────────────────────────────────────────────────────────

def _write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "region_id", "S", "I"])
        for k, t in enumerate(traj.times):
            for j, rid in enumerate(traj.region_ids):
                writer.writerow([fmt9(t), rid, fmt9(traj.S[k, j]), fmt9(traj.I[k, j])])


def _cmd_simulate(args) -> int:
    graph = load_bundle(args.graph)
    with open(args.scenario, encoding="utf-8") as fh:
        sc = json.load(fh)
    params = SIParams(alpha=float(sc["alpha"]), beta=float(sc.get("beta", 0.0)),
                      dt=float(sc["dt"]), horizon=float(sc["horizon"]))
    epsilon = float(sc.get("epsilon", args.epsilon))
    traj = simulate(graph, params, str(sc["seed_region"]),
                    float(sc["initial_infected"]))
    table = arrival_times(traj, epsilon)

    out = _outdir(args)
    _write_trajectory_csv(traj, out / "trajectory.csv")
    write_arrivals_csv(table, out / "arrivals.csv")
    if args.figures:
        figures.plot_trajectory(traj, out / "trajectory.png")
    print(f"trajectory.csv: {traj.n_samples} samples x {graph.n} regions")
    print(f"arrivals.csv: {len(table)} regions crossed epsilon={fmt9(epsilon)}")
    if traj.clamped_values:
        print(f"note: clamped {traj.clamped_values} slightly negative values")
    return 0


# ── arrivals (ingestion) ─────────────────────────────────────────────

def _cmd_arrivals(args) -> int:
    graph = load_bundle(args.graph)
    if (args.events is None) == (args.coarse is None):
        raise NetwaveError("pass exactly one of --events or --coarse")
    if args.events:
        events, skipped = read_events_csv(args.events)
        table = first_arrivals(events, graph.regions)
        note = f"{len(events)} events ({skipped} malformed rows skipped)"
    else:
        if args.bin_width is None:
            raise NetwaveError("--coarse requires --bin-width")
        series = read_coarse_csv(args.coarse, bin_width=args.bin_width)
        table = arrivals_from_coarse(series, threshold=args.threshold)
        note = f"{len(series)} coarse series, threshold {fmt9(args.threshold)}"
    out = _outdir(args)
    write_arrivals_csv(table, out / "arrivals.csv")
    print(f"arrivals.csv: {len(table)} regions from {note}")
    return 0


# ── infer ────────────────────────────────────────────────────────────

def _cmd_infer(args) -> int:
    graph = load_bundle(args.graph)
    table = read_arrivals_csv(args.arrivals)
    ranking = infer_source(graph, table, window_duration=args.window_duration,
                           weight_by_log_population=args.population_weights)
    best_id, best_fit = ranking.best

    field = shortest_path_field(graph, best_id)
    best_region = graph.region(best_id)
    scatter_rows = []
    for rid, d in zip(field.region_ids, field.distance):
        t = table.get(rid)
        if t is None or not math.isfinite(d):
            continue
        scatter_rows.append((rid, geographic_distance(best_region, graph.region(rid)),
                             float(d), t))

    out = _outdir(args)
    with open(out / "ranking.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["candidate", "slope", "intercept", "r_squared", "n_points"])
        for rid, fit in ranking.ranking:
            writer.writerow([rid, fmt9(fit.slope), fmt9(fit.intercept),
                             fmt9(fit.r_squared), fit.n_points])
    with open(out / "scatter.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region_id", "geographic_km", "effective_distance",
                         "arrival_time"])
        for row in scatter_rows:
            writer.writerow([row[0], fmt9(row[1]), fmt9(row[2]), fmt9(row[3])])
    if args.figures:
        figures.plot_wavefront(scatter_rows, out / "wavefront.png")
    print(f"ranking.csv: {len(ranking.ranking)} candidates scored, "
          f"{len(ranking.skipped)} skipped")
    print(f"best source: {best_id} (R^2 = {fmt9(best_fit.r_squared)}, "
          f"slope = {fmt9(best_fit.slope)})")
    return 0


# ── export ───────────────────────────────────────────────────────────

def _cmd_export(args) -> int:
    # Everything is computed and validated before the first file opens,
    # so a failing input leaves no partial output behind.
    graph = load_bundle(args.graph)
    field = shortest_path_field(graph, args.source)
    layout = radial_layout(field, graph)
    sh = None
    if args.arrivals:
        table = read_arrivals_csv(args.arrivals)
        sh = stage_histogram(field, table, stages=args.stages,
                             bin_width=args.bin_width or DEFAULT_BIN_WIDTH)

    out = _outdir(args)
    with open(out / "layout.json", "w", encoding="utf-8") as fh:
        json.dump(layout.to_json_dict(), fh, indent=1)
        fh.write("\n")
    with open(out / "effective_distances.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "effective_distance"])
        for rid, d in zip(field.region_ids, field.distance):
            writer.writerow([args.source, rid, fmt9(d)])
    if args.figures:
        figures.plot_radial_tree(layout, out / "radial_tree.png")
    print(f"layout.json: {len(layout.nodes)} reachable regions")

    if sh is not None:
        with open(out / "stage_histogram.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["stage", "stage_start", "stage_end",
                             "dist_bin_start", "dist_bin_end", "count"])
            for stage in sh.stages:
                for b, count in enumerate(stage.counts):
                    writer.writerow([
                        stage.index + 1, fmt9(stage.t_start), fmt9(stage.t_end),
                        fmt9(sh.bin_edges[b]), fmt9(sh.bin_edges[b + 1]), int(count),
                    ])
        if args.figures:
            figures.plot_stage_histogram(sh, out / "stage_histogram.png")
        print(f"stage_histogram.csv: {len(sh.stages)} stages"
              + (f", {len(sh.skipped_regions)} unreachable arrival regions skipped"
                 if sh.skipped_regions else ""))
    return 0


# ── compare ──────────────────────────────────────────────────────────

def _cmd_compare(args) -> int:
    a = read_arrivals_csv(args.arrivals_a)
    b = read_arrivals_csv(args.arrivals_b)
    rho, n_common = compare_arrivals(a, b)
    out = _outdir(args)
    with open(out / "comparison.json", "w", encoding="utf-8") as fh:
        json.dump({"rho": round9(rho), "common_regions": n_common}, fh, indent=1)
        fh.write("\n")
    if args.figures:
        figures.plot_comparison(a, b, rho, out / "comparison.png")
    print(f"comparison.json: rho = {fmt9(rho)} over {n_common} common regions")
    return 0


# ── parser ───────────────────────────────────────────────────────────

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netwave",
        description="Effective-distance geometry, SI spreading, and source "
                    "inference on weighted region graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="validate inputs and write a graph bundle")
    p.add_argument("regions", help="region CSV (id,name,lat,lon,population)")
    p.add_argument("edges", help="edge CSV (from,to,weight)")
    _common_flags(p)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("simulate", help="run the deterministic SI outbreak")
    p.add_argument("graph", help="graph bundle JSON from 'build'")
    p.add_argument("scenario", help="scenario JSON (alpha, beta, dt, horizon, "
                                    "seed_region, initial_infected, epsilon)")
    _common_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("arrivals", help="extract first arrivals from raw data")
    p.add_argument("graph", help="graph bundle JSON from 'build'")
    p.add_argument("--events", help="event CSV (timestamp,lat,lon[,region_id])")
    p.add_argument("--coarse", help="coarse CSV (region_id,bin_start,cumulative_count)")
    p.add_argument("--bin-width", type=float, default=None,
                   help="time width of the coarse bins")
    _common_flags(p)
    p.set_defaults(func=_cmd_arrivals)

    p = sub.add_parser("infer", help="rank candidate sources by linear-fit R^2")
    p.add_argument("graph", help="graph bundle JSON from 'build'")
    p.add_argument("arrivals", help="arrival CSV")
    p.add_argument("--population-weights", action="store_true",
                   help="down-weight low-population regions in the fits")
    _common_flags(p)
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("export", help="radial layout + per-source exports")
    p.add_argument("graph", help="graph bundle JSON from 'build'")
    p.add_argument("source", help="origin region id")
    p.add_argument("arrivals", nargs="?", default=None,
                   help="arrival CSV (enables the stage histogram)")
    p.add_argument("--stages", type=int, default=DEFAULT_STAGES,
                   help="number of progressive stages")
    p.add_argument("--bin-width", type=float, default=None,
                   help="effective-distance histogram bin width")
    _common_flags(p)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("compare", help="Spearman correlation of two arrival tables")
    p.add_argument("arrivals_a", help="first arrival CSV")
    p.add_argument("arrivals_b", help="second arrival CSV")
    _common_flags(p)
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except NetwaveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
