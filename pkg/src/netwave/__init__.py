"""netwave: hidden-geometry analysis of spreading on weighted region graphs.

Build a region graph from flux data, embed it with effective distances,
simulate meta-population SI outbreaks, extract first-arrival tables from
simulations or observations, and infer the most likely outbreak source
from the linearity of arrival time vs. effective distance.
"""

from .arrivals import ArrivalTable, read_arrivals_csv, write_arrivals_csv
from .dynamics import SIParams, SimState, Trajectory, arrival_times, derivative, simulate
from .effective import (
    EffectiveDistanceField,
    RadialLayout,
    StageHistogram,
    all_pairs_effective,
    edge_length,
    geographic_distance,
    haversine_km,
    radial_layout,
    shortest_path_field,
    stage_histogram,
)
from .errors import NetwaveError
from .inference import (
    FitResult,
    SourceRanking,
    compare_arrivals,
    infer_source,
    linear_fit,
    score_candidate,
    window_smooth,
)
from .ingest import (
    CoarseSeries,
    GeoEvent,
    arrivals_from_coarse,
    assign_region,
    first_arrivals,
)
from .regions import (
    Region,
    RegionGraph,
    build_flux,
    build_graph,
    derive_coupling,
    derive_transitions,
    graph_from_flux,
    load_bundle,
    load_regions,
    save_bundle,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalTable",
    "CoarseSeries",
    "EffectiveDistanceField",
    "FitResult",
    "GeoEvent",
    "NetwaveError",
    "RadialLayout",
    "Region",
    "RegionGraph",
    "SIParams",
    "SimState",
    "SourceRanking",
    "StageHistogram",
    "Trajectory",
    "all_pairs_effective",
    "arrival_times",
    "arrivals_from_coarse",
    "assign_region",
    "build_flux",
    "build_graph",
    "compare_arrivals",
    "derivative",
    "derive_coupling",
    "derive_transitions",
    "edge_length",
    "first_arrivals",
    "geographic_distance",
    "graph_from_flux",
    "haversine_km",
    "infer_source",
    "linear_fit",
    "load_bundle",
    "load_regions",
    "radial_layout",
    "read_arrivals_csv",
    "save_bundle",
    "score_candidate",
    "shortest_path_field",
    "simulate",
    "stage_histogram",
    "window_smooth",
    "write_arrivals_csv",
]
