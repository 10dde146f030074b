"""Popularity-ranking upper bound and the cacheability limit."""

import numpy as np
import pytest

from multilru.baselines import (
    PopConfig,
    PopularityRanking,
    cacheability_limit,
    find_optimal_dtpop,
    pop_upper_bound,
)
from multilru.traffic import Request


def req(t, cid):
    return Request(time=t, content_id=cid, x=0.0, y=0.0)


def all_covered(_):
    return 1


def make_trace(pairs):
    return [req(t, cid) for t, cid in pairs]


# ---------------------------------------------------------------------------
# PopConfig / ranking


def test_pop_config_validation():
    with pytest.raises(ValueError):
        PopConfig(dt_ev=0.0, dt_pop=1.0, k=1)
    with pytest.raises(ValueError):
        PopConfig(dt_ev=1.0, dt_pop=-2.0, k=1)
    with pytest.raises(ValueError):
        PopConfig(dt_ev=1.0, dt_pop=1.0, k=-1)


def test_ranking_orders_by_count_then_recency_then_id():
    window = [(0.1, "b"), (0.2, "a"), (0.3, "a"), (0.4, "c"), (0.5, "b"), (0.6, "d")]
    ranking = PopularityRanking(window)
    # a and b tie at 2; b was requested more recently
    assert ranking.rank("b") == 1
    assert ranking.rank("a") == 2
    # c and d tie at 1; d is fresher
    assert ranking.rank("d") == 3
    assert ranking.rank("c") == 4
    assert ranking.rank("zzz") is None
    assert len(ranking) == 4


def test_ranking_id_breaks_exact_ties():
    window = [(0.1, 5), (0.1, 2)]
    ranking = PopularityRanking(window)
    assert ranking.rank(2) == 1
    assert ranking.rank(5) == 2


# ---------------------------------------------------------------------------
# pop_upper_bound


def test_first_request_never_hits():
    trace = make_trace([(0.5, "a"), (1.5, "b"), (2.5, "c")])
    bound = pop_upper_bound(trace, all_covered, PopConfig(1.0, 10.0, 5))
    assert bound == 0.0


def test_k_zero_bound_is_zero():
    trace = make_trace([(0.5, "a"), (1.5, "a"), (2.5, "a")])
    assert pop_upper_bound(trace, all_covered, PopConfig(1.0, 10.0, 0)) == 0.0


def test_huge_window_huge_k_hits_iff_seen_before_boundary():
    # dt_ev=1, dt_pop=horizon: ranking at t_n holds everything seen so far
    trace = make_trace([(0.2, "a"), (0.6, "a"), (1.2, "a"), (1.4, "b"), (2.5, "b")])
    bound = pop_upper_bound(trace, all_covered, PopConfig(1.0, 100.0, 99))
    # hits: a@1.2 (a seen before t=1), b@2.5 (b seen before t=2); a@0.6
    # misses because the t=0 ranking is empty
    assert bound == pytest.approx(2.0 / 5.0)


def test_rank_threshold_uses_coverage_cardinality():
    # two contents, K=1: rank 2 hits only where m=2
    trace = make_trace([(0.1, "a"), (0.2, "a"), (0.3, "b"), (1.2, "b"), (1.4, "b")])
    # window [0,1): a count 2 -> rank 1, b count 1 -> rank 2
    m_by_time = {1.2: 1, 1.4: 2}
    bound = pop_upper_bound(trace, lambda r: m_by_time.get(r.time, 1),
                            PopConfig(1.0, 1.0, 1))
    # measured: all 5;  b@1.2 rank 2 > 1*1 miss;  b@1.4 rank 2 <= 2*1 hit
    assert bound == pytest.approx(1.0 / 5.0)


def test_stale_window_drops_old_requests():
    # dt_pop=1: by t_n=2 the ranking only sees [1, 2)
    trace = make_trace([(0.5, "a"), (2.5, "a")])
    assert pop_upper_bound(trace, all_covered, PopConfig(1.0, 1.0, 5)) == 0.0
    # with dt_pop=2 the window [0.5, 2.5) retains "a"
    assert pop_upper_bound(trace, all_covered, PopConfig(1.0, 2.0, 5)) == pytest.approx(0.5)


def test_bound_monotone_in_k():
    rng = np.random.default_rng(8)
    trace = make_trace(sorted((float(t), int(c)) for t, c in
                              zip(rng.random(800) * 20.0, rng.integers(0, 25, 800))))
    prev = -1.0
    for k in (0, 1, 2, 4, 8):
        b = pop_upper_bound(trace, all_covered, PopConfig(1.0, 3.0, k))
        assert b >= prev
        prev = b


def test_bound_below_cacheability():
    rng = np.random.default_rng(9)
    trace = make_trace(sorted((float(t), int(c)) for t, c in
                              zip(rng.random(800) * 20.0, rng.integers(0, 25, 800))))
    bound = pop_upper_bound(trace, all_covered, PopConfig(1.0, 5.0, 3))
    limit = cacheability_limit(trace, all_covered)
    assert bound <= limit


def test_warmup_requests_feed_ranking_but_not_measurement():
    trace = make_trace([(0.2, "a"), (1.5, "a"), (2.5, "a")])
    bound = pop_upper_bound(trace, all_covered, PopConfig(1.0, 10.0, 5), warmup_time=1.0)
    assert bound == pytest.approx(1.0)  # both measured requests hit


def test_no_measured_requests_raises():
    trace = make_trace([(0.2, "a")])
    with pytest.raises(ValueError):
        pop_upper_bound(trace, all_covered, PopConfig(1.0, 1.0, 1), warmup_time=5.0)


# ---------------------------------------------------------------------------
# find_optimal_dtpop


def test_monotone_curve_returns_last_candidate():
    # each repeat needs a strictly wider window: bounds 1/6 < 2/6 < 3/6
    trace = make_trace([(0.5, "a"), (0.8, "c"), (1.5, "a"),
                        (2.5, "b"), (5.5, "b"), (8.5, "c")])
    best, bound, curve = find_optimal_dtpop(trace, all_covered, 1.0, 5, [1.0, 4.0, 8.0])
    assert best == 8.0
    assert [b for _, b in curve] == pytest.approx([1 / 6, 2 / 6, 3 / 6])
    assert bound == max(b for _, b in curve)


def test_single_candidate_returned():
    trace = make_trace([(0.5, "a"), (1.5, "a")])
    best, bound, curve = find_optimal_dtpop(trace, all_covered, 1.0, 5, [2.0])
    assert best == 2.0 and len(curve) == 1


def test_stops_at_first_decrease():
    # K=1: the wide window lets stale-but-heavy "b" outrank fresh "a",
    # so the bound drops from 1/6 to 0 and the rule stops before 8.0
    trace = make_trace([
        (0.1, "b"), (0.2, "b"), (0.3, "b"),
        (1.5, "a"), (1.6, "a"),
        (2.5, "a"),
    ])
    best, bound, curve = find_optimal_dtpop(trace, all_covered, 1.0, 1, [1.0, 3.0, 8.0])
    assert [b for _, b in curve] == pytest.approx([1 / 6, 0.0])
    assert len(curve) == 2  # 8.0 never evaluated
    assert best == 1.0 and bound == pytest.approx(1 / 6)


def test_candidates_must_ascend():
    trace = make_trace([(0.5, "a"), (1.5, "a")])
    with pytest.raises(ValueError):
        find_optimal_dtpop(trace, all_covered, 1.0, 5, [3.0, 1.0])
    with pytest.raises(ValueError):
        find_optimal_dtpop(trace, all_covered, 1.0, 5, [])


# ---------------------------------------------------------------------------
# cacheability_limit


def test_all_singletons_limit_zero():
    trace = make_trace([(0.1, "a"), (0.2, "b"), (0.3, "c")])
    assert cacheability_limit(trace) == 0.0


def test_one_content_r_times():
    r = 7
    trace = make_trace([(0.1 * i, "a") for i in range(r)])
    assert cacheability_limit(trace) == pytest.approx((r - 1) / r)


def test_warmup_first_requests_still_count_as_seen():
    trace = make_trace([(0.1, "a"), (5.0, "a")])
    # "a" debuts during warm-up; its measured repeat is a hit
    assert cacheability_limit(trace, warmup_time=1.0) == pytest.approx(1.0)


def test_uncovered_repeat_is_not_a_hit():
    trace = make_trace([(0.1, "a"), (0.2, "a"), (0.3, "a")])
    m_by_time = {0.1: 1, 0.2: 0, 0.3: 1}
    fn = lambda r: m_by_time[r.time]
    # covered-only: the m=0 request drops from the denominator
    assert cacheability_limit(trace, fn) == pytest.approx(1.0 / 2.0)
    # all-requests: it stays in the denominator as a miss
    assert cacheability_limit(trace, fn, metric_rule="all-requests") == pytest.approx(1.0 / 3.0)
