"""Drive traces through policies over the coverage model and collect metrics.

A run streams the trace in time order, resolves each request's covering
stations, applies the policy, and accrues metrics once past warm-up.
The trace contains every request of contents arriving within the
horizon, including the stragglers that land after it, so the total
matches the closed-form predictor exactly in expectation.

Sweeps that share a traffic configuration and seed are executed in one
pass: the trace and the per-request station ordering are computed once
and all (radius, policy, K) variants consume them in lockstep. Rows
come back in deterministic (config, seed) order regardless of thread
count.
"""

import heapq
import math
import os
import tempfile
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .baselines import PopBoundTracker, PopConfig
from .coverage import CoverageSet, NetworkConfig, station_order
from .policies import POLICIES, LruCache
from .traffic import TrafficConfig, ccsr, generate_contents, mean_catalogue_size, merge_requests

POLICY_NAMES = tuple(POLICIES) + ("pop-bound", "cacheability")
METRIC_RULES = ("covered-only", "all-requests")


@dataclass
class ExperimentConfig:
    traffic: TrafficConfig
    network: NetworkConfig
    policy: str
    k: int
    seeds: tuple
    pop: Optional[PopConfig] = None
    warmup_fraction: float = 0.2
    metric_rule: str = "covered-only"

    def __post_init__(self):
        if self.policy not in POLICY_NAMES:
            raise ValueError(f"unknown policy {self.policy!r}; expected one of {POLICY_NAMES}")
        if self.metric_rule not in METRIC_RULES:
            raise ValueError(f"unknown metric_rule {self.metric_rule!r}")
        if not 0 <= self.warmup_fraction <= 0.9:
            raise ValueError("warmup_fraction must lie in [0, 0.9]")
        self.seeds = tuple(self.seeds)
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.policy == "pop-bound" and self.pop is None:
            raise ValueError("pop-bound needs a pop config")
        if self.traffic.window != self.network.window:
            raise ValueError(
                f"traffic window {self.traffic.window} does not match the "
                f"network window {self.network.window}"
            )


@dataclass
class MetricsRow:
    policy: str
    seed: int
    nbs_target: float
    radius: float
    k: int
    rho: float
    volume_mean: float
    lifespan_mean: float
    shape_mix: tuple
    requests_total: int
    requests_measured: int
    covered_fraction: float
    hits: int
    hit_prob: float
    catalogue_mean_empirical: float
    catalogue_mean_analytic: float
    runtime_seconds: float


CSV_FIELDS = (
    "policy", "seed", "nbs_target", "radius", "K", "rho", "volume_mean",
    "lifespan_mean", "shape_mix", "requests_total", "requests_measured",
    "covered_fraction", "hits", "hit_prob", "catalogue_mean_empirical",
    "catalogue_mean_analytic",
)


class _CatalogueTracker:
    """Time-average of the active multi-request catalogue at daily ticks."""

    def __init__(self, warmup_time: float, horizon: float):
        self.ticks = list(range(math.ceil(warmup_time), math.floor(horizon) + 1))
        self._idx = 0
        self._pending = deque()  # (t_start, t_end) in arrival order, volume >= 2 only
        self._ends = []  # heap of end times of started contents
        self._total = 0

    def register(self, content):
        if content.volume >= 2:
            self._pending.append((content.t_arrival, content.t_arrival + content.lifespan))

    def advance(self, t: float):
        while self._idx < len(self.ticks) and self.ticks[self._idx] < t:
            n = self.ticks[self._idx]
            while self._pending and self._pending[0][0] <= n:
                heapq.heappush(self._ends, self._pending.popleft()[1])
            while self._ends and self._ends[0] <= n:
                heapq.heappop(self._ends)
            self._total += len(self._ends)
            self._idx += 1

    def finish(self) -> float:
        self.advance(float("inf"))
        return self._total / len(self.ticks) if self.ticks else float("nan")


class _Consumer:
    """One (policy, K, radius) variant fed request-by-request."""

    def __init__(self, index, seed_pos, config: ExperimentConfig):
        self.index = index
        self.seed_pos = seed_pos
        self.config = config
        self.radius = config.network.radius
        self.warmup_time = config.warmup_fraction * config.traffic.horizon
        self.hits = 0
        self.measured = 0
        self.covered_in_window = 0
        self.total_in_window = 0
        if config.policy in POLICIES:
            self._fn = POLICIES[config.policy]
            self._caches = [LruCache(config.k) for _ in range(config.network.n_stations)]
        else:
            self._fn = None
            self._caches = None

    def observe(self, request, cov: Optional[CoverageSet], m: int, first: bool, pop_rank):
        cfg = self.config
        if cfg.policy == "pop-bound":
            hit = m >= 1 and pop_rank is not None and pop_rank <= m * cfg.k
        elif cfg.policy == "cacheability":
            hit = m >= 1 and not first
        else:
            hit = self._fn(request, cov, self._caches).hit
        if request.time < self.warmup_time:
            return
        self.total_in_window += 1
        if m >= 1:
            self.covered_in_window += 1
        if m >= 1 or cfg.metric_rule == "all-requests":
            self.measured += 1
            self.hits += hit

    def row(self, seed, requests_total, catalogue_empirical, elapsed) -> MetricsRow:
        cfg = self.config
        t = cfg.traffic
        return MetricsRow(
            policy=cfg.policy,
            seed=seed,
            nbs_target=cfg.network.target_nbs,
            radius=cfg.network.radius,
            k=cfg.k,
            rho=ccsr(cfg.k, t.lambda_c, t.lifespan_mean),
            volume_mean=t.volume_mean,
            lifespan_mean=t.lifespan_mean,
            shape_mix=t.shape_mix,
            requests_total=requests_total,
            requests_measured=self.measured,
            covered_fraction=(self.covered_in_window / self.total_in_window if self.total_in_window else 0.0),
            hits=self.hits,
            hit_prob=(self.hits / self.measured if self.measured else 0.0),
            catalogue_mean_empirical=catalogue_empirical,
            catalogue_mean_analytic=mean_catalogue_size(t),
            runtime_seconds=elapsed,
        )


def _traffic_key(t: TrafficConfig):
    return (t.lambda_c, t.horizon, t.volume_beta, t.volume_min, t.lifespan_mean,
            t.lifespan_bounds, t.shape_mix, t.epsilon, t.window)


def _geometry_key(n: NetworkConfig):
    return (n.grid, n.spacing, n.wrap)


def _run_group(task):
    """Execute all consumers sharing one (traffic, geometry, seed) trace."""
    seed, members = task
    started = time.perf_counter()
    base_cfg = members[0][2]
    traffic = replace(base_cfg.traffic, master_seed=seed)
    geometry = base_cfg.network

    consumers = [_Consumer(idx, seed_pos, cfg) for idx, seed_pos, cfg in members]
    by_radius = {}
    for c in consumers:
        by_radius.setdefault(c.radius, []).append(c)
    radii = sorted(by_radius)
    needs_ids = {
        r: any(cc.config.policy in POLICIES for cc in group) for r, group in by_radius.items()
    }

    pop_trackers = {}
    for c in consumers:
        if c.config.policy == "pop-bound":
            key = (c.config.pop.dt_ev, c.config.pop.dt_pop)
            pop_trackers.setdefault(key, PopBoundTracker(*key))
            c._pop_key = key

    catalogues = {}
    for c in consumers:
        w = c.warmup_time
        catalogues.setdefault(w, _CatalogueTracker(w, traffic.horizon))

    seen = set()
    requests_total = 0

    def tapped(contents):
        for content in contents:
            for tracker in catalogues.values():
                tracker.register(content)
            yield content

    for request in merge_requests(tapped(generate_contents(traffic))):
        requests_total += 1
        t = request.time
        for tracker in catalogues.values():
            tracker.advance(t)
        cid = request.content_id
        first = cid not in seen
        if first:
            seen.add(cid)
        ranks = {key: tr.observe(t, cid) for key, tr in pop_trackers.items()}
        order = dist = None
        for radius in radii:
            if order is None:
                order, dist = station_order((request.x, request.y), geometry)
            m = int(np.searchsorted(dist, radius, side="right"))
            cov = CoverageSet([int(s) for s in order[:m]]) if needs_ids[radius] else None
            for c in by_radius[radius]:
                rank = ranks.get(getattr(c, "_pop_key", None))
                c.observe(request, cov, m, first, rank)

    catalogue_means = {w: tr.finish() for w, tr in catalogues.items()}
    elapsed = time.perf_counter() - started
    return [
        (c.index, c.seed_pos, c.row(seed, requests_total, catalogue_means[c.warmup_time], elapsed))
        for c in consumers
    ]


def _group_tasks(configs: Sequence[ExperimentConfig]):
    groups = {}
    for idx, cfg in enumerate(configs):
        for seed_pos, seed in enumerate(cfg.seeds):
            key = (_traffic_key(cfg.traffic), _geometry_key(cfg.network), seed)
            groups.setdefault(key, (seed, []))[1].append((idx, seed_pos, cfg))
    return list(groups.values())


def run_once(config: ExperimentConfig, seed: int) -> MetricsRow:
    """Run a single configuration on one master seed."""
    results = _run_group((seed, [(0, 0, config)]))
    return results[0][2]


def run_sweep(configs: Sequence[ExperimentConfig], threads: int = 1) -> List[MetricsRow]:
    """Run every (config, seed) pair; rows sorted by (config order, seed order)."""
    if not configs:
        raise ValueError("empty sweep")
    tasks = _group_tasks(configs)
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_group, tasks))
    else:
        chunks = [_run_group(t) for t in tasks]
    tagged = [item for chunk in chunks for item in chunk]
    tagged.sort(key=lambda item: (item[0], item[1]))
    return [row for _, _, row in tagged]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, tuple):
        return ":".join(f"{v:.6g}" for v in value)
    return f"{float(value):.6g}"


def rows_to_csv(rows: Sequence[MetricsRow], timings: bool = False) -> str:
    """Render rows in the CSV schema; timings are off by default so the
    output is byte-identical across reruns and thread counts."""
    fields = CSV_FIELDS + (("runtime_seconds",) if timings else ())
    lines = [",".join(fields)]
    for row in rows:
        values = [row.policy, row.seed, row.nbs_target, row.radius, row.k, row.rho,
                  row.volume_mean, row.lifespan_mean, row.shape_mix, row.requests_total,
                  row.requests_measured, row.covered_fraction, row.hits, row.hit_prob,
                  row.catalogue_mean_empirical, row.catalogue_mean_analytic]
        if timings:
            values.append(row.runtime_seconds)
        lines.append(",".join(_fmt(v) for v in values))
    return "\n".join(lines) + "\n"


def write_csv(rows: Sequence[MetricsRow], path: str, timings: bool = False) -> None:
    """Atomic CSV write: temp file in the target directory, then rename."""
    payload = rows_to_csv(rows, timings=timings)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
