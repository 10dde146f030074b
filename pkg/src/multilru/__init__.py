"""Spatial multi-LRU edge-cache simulator.

Synthetic spatial traffic with temporal locality, a toroidal station
lattice with disk coverage, the single-/multi-LRU cache policies, the
popularity upper bound and the cacheability limit, and a sweep engine
that writes deterministic metrics CSVs.
"""

from .baselines import PopConfig, cacheability_limit, find_optimal_dtpop, pop_upper_bound
from .coverage import (
    CoverageSet,
    NetworkConfig,
    Station,
    build_lattice,
    covering_stations,
    estimate_pm,
    mean_coverage_number,
    radius_for_target_nbs,
    station_order,
)
from .engine import ExperimentConfig, MetricsRow, run_once, run_sweep, write_csv
from .policies import POLICIES, LruCache, PolicyOutcome, multi_lru_all, multi_lru_one, single_lru
from .traffic import (
    Content,
    PopularityShape,
    Request,
    ShapeKind,
    TrafficConfig,
    ccsr,
    generate,
    make_shape,
    mean_catalogue_size,
    mean_total_requests,
    place_requests,
    sample_lifespan,
    sample_pareto,
    sample_volume,
    shape_cdf,
    shape_pdf,
    shape_quantile,
    volume_beta_from_mean,
)

__version__ = "0.1.0"

__all__ = [
    "CoverageSet", "NetworkConfig", "Station", "build_lattice", "covering_stations",
    "estimate_pm", "mean_coverage_number", "radius_for_target_nbs", "station_order",
    "POLICIES", "LruCache", "PolicyOutcome", "single_lru", "multi_lru_one", "multi_lru_all",
    "PopConfig", "pop_upper_bound", "find_optimal_dtpop", "cacheability_limit",
    "ExperimentConfig", "MetricsRow", "run_once", "run_sweep", "write_csv",
    "Content", "PopularityShape", "Request", "ShapeKind", "TrafficConfig",
    "ccsr", "generate", "make_shape", "mean_catalogue_size", "mean_total_requests",
    "place_requests", "sample_lifespan", "sample_pareto", "sample_volume",
    "shape_cdf", "shape_pdf", "shape_quantile", "volume_beta_from_mean",
]
