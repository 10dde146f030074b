"""Non-LRU comparison curves: the periodic-update popularity bound and
the cacheability limit.

The popularity bound models the best any centralized policy with
periodic cache refreshes could do: at each boundary t_n = n * dt_ev it
freezes a ranking of contents by request count over [t_n - dt_pop, t_n),
and a request covered by m stations hits iff its content ranks within
the m * K most popular. The cacheability limit is the ceiling for every
policy without prefetching: the fraction of measured requests that are
not the first request of their content.
"""

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple


@dataclass
class PopConfig:
    dt_ev: float  # cache-update period (days)
    dt_pop: float  # popularity-estimation window (days)
    k: int

    def __post_init__(self):
        if self.dt_ev <= 0 or self.dt_pop <= 0:
            raise ValueError("dt_ev and dt_pop must be positive")
        if self.k < 0:
            raise ValueError("k must be nonnegative")


class PopularityRanking:
    """Frozen 1-based ranking of contents seen in an estimation window.

    Order: higher request count first, then more recent last request,
    then smaller id.
    """

    def __init__(self, window: Iterable[tuple]):
        counts = {}
        last = {}
        for t, cid in window:  # window arrives in time order
            counts[cid] = counts.get(cid, 0) + 1
            last[cid] = t
        ordered = sorted(counts, key=lambda c: (-counts[c], -last[c], c))
        self._rank = {cid: i + 1 for i, cid in enumerate(ordered)}

    def __len__(self):
        return len(self._rank)

    def rank(self, content_id) -> Optional[int]:
        return self._rank.get(content_id)


class PopBoundTracker:
    """Request-by-request driver for the popularity bound.

    observe() must be called in time order for every request (warm-up
    and uncovered ones included: estimation sees all traffic); it
    returns the content's rank under the ranking frozen at the most
    recent boundary, or None when unranked.
    """

    def __init__(self, dt_ev: float, dt_pop: float):
        if dt_ev <= 0 or dt_pop <= 0:
            raise ValueError("dt_ev and dt_pop must be positive")
        self.dt_ev = dt_ev
        self.dt_pop = dt_pop
        self._window = deque()
        self._next_boundary = dt_ev
        self._ranking = PopularityRanking(())

    def observe(self, t: float, content_id) -> Optional[int]:
        while self._next_boundary <= t:
            nb = self._next_boundary
            while self._window and self._window[0][0] < nb - self.dt_pop:
                self._window.popleft()
            self._ranking = PopularityRanking(self._window)
            self._next_boundary = nb + self.dt_ev
        rank = self._ranking.rank(content_id)
        self._window.append((t, content_id))
        return rank


def _is_measured(t, m, warmup_time, metric_rule):
    if t < warmup_time:
        return False
    return m >= 1 if metric_rule == "covered-only" else True


def pop_upper_bound(
    trace: Iterable,
    coverage_fn: Callable,
    pop_config: PopConfig,
    warmup_time: float = 0.0,
    metric_rule: str = "covered-only",
) -> float:
    """Monte Carlo value of the periodic-update bound on one trace.

    coverage_fn maps a request to its coverage cardinality m.
    """
    tracker = PopBoundTracker(pop_config.dt_ev, pop_config.dt_pop)
    hits = 0
    measured = 0
    for req in trace:
        m = coverage_fn(req)
        rank = tracker.observe(req.time, req.content_id)
        if _is_measured(req.time, m, warmup_time, metric_rule):
            measured += 1
            if m >= 1 and rank is not None and rank <= m * pop_config.k:
                hits += 1
    if measured == 0:
        raise ValueError("no measured requests in the trace")
    return hits / measured


def find_optimal_dtpop(
    trace: List,
    coverage_fn: Callable,
    dt_ev: float,
    k: int,
    candidates: List[float],
    warmup_time: float = 0.0,
    metric_rule: str = "covered-only",
) -> Tuple[float, float, List[Tuple[float, float]]]:
    """Grow dt_pop through the candidates until the bound starts decreasing.

    Returns (best dt_pop, its bound, the evaluated (dt_pop, bound) curve).
    The trace is replayed once per evaluated candidate, so pass a list.
    """
    if not candidates or sorted(candidates) != list(candidates):
        raise ValueError("candidates must be a nonempty ascending list")
    curve = []
    for dt_pop in candidates:
        bound = pop_upper_bound(trace, coverage_fn, PopConfig(dt_ev, dt_pop, k), warmup_time, metric_rule)
        if curve and bound < curve[-1][1]:
            curve.append((dt_pop, bound))
            break
        curve.append((dt_pop, bound))
    best = max(curve, key=lambda cb: cb[1])
    return best[0], best[1], curve


def cacheability_limit(
    trace: Iterable,
    coverage_fn: Optional[Callable] = None,
    warmup_time: float = 0.0,
    metric_rule: str = "covered-only",
) -> float:
    """Fraction of measured requests that are repeats of an earlier request.

    First requests are identified over the whole trace, warm-up and
    uncovered requests included; without a coverage_fn every request
    counts as covered.
    """
    seen = set()
    hits = 0
    measured = 0
    for req in trace:
        m = coverage_fn(req) if coverage_fn is not None else 1
        first = req.content_id not in seen
        if first:
            seen.add(req.content_id)
        if _is_measured(req.time, m, warmup_time, metric_rule):
            measured += 1
            if m >= 1 and not first:
                hits += 1
    if measured == 0:
        raise ValueError("no measured requests in the trace")
    return hits / measured
