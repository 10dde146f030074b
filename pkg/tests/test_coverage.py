"""Lattice geometry, disk coverage queries, and the p_m estimator."""

import math

import numpy as np
import pytest

from multilru.coverage import (
    NetworkConfig,
    build_lattice,
    covering_stations,
    estimate_pm,
    mean_coverage_number,
    radius_for_target_nbs,
    station_order,
)


def net(radius=None, target_nbs=None, grid=(4, 5), spacing=1.0, wrap=True):
    return NetworkConfig(grid=grid, spacing=spacing, radius=radius,
                         target_nbs=target_nbs, wrap=wrap)


def toroidal_dist(p, q, window):
    dx = abs(p[0] - q[0])
    dy = abs(p[1] - q[1])
    dx = min(dx, window[0] - dx)
    dy = min(dy, window[1] - dy)
    return math.hypot(dx, dy)


# ---------------------------------------------------------------------------
# Lattice


def test_single_station_lattice():
    stations = build_lattice(net(radius=0.4, grid=(1, 1)))
    assert len(stations) == 1
    assert stations[0].position == (0.5, 0.5)


def test_twenty_station_lattice():
    stations = build_lattice(net(radius=0.4))
    assert len(stations) == 20
    assert [s.id for s in stations] == list(range(20))


def test_neighbor_spacing():
    config = net(radius=0.4, spacing=2.0)
    stations = build_lattice(config)
    # horizontal neighbors in row-major order
    for left, right in zip(stations, stations[1:]):
        if right.id % config.grid[1] != 0:
            d = math.dist(left.position, right.position)
            assert d == pytest.approx(2.0)


def test_window_dimensions():
    config = net(radius=0.4, grid=(4, 5), spacing=1.0)
    assert config.window == (5.0, 4.0)
    assert config.n_stations == 20


# ---------------------------------------------------------------------------
# Coverage queries


def test_station_position_is_covered_at_zero_distance():
    config = net(radius=0.3)
    stations = build_lattice(config)
    cov = covering_stations(stations[7].position, stations, config)
    assert 7 in cov.station_ids
    assert cov.station_ids[0] == 7


def test_coverage_hole_at_cell_corner():
    config = net(radius=0.45)  # < d/2
    stations = build_lattice(config)
    cov = covering_stations((1.0, 1.0), stations, config)
    assert cov.m == 0


def test_radius_d_covers_five_stations():
    # self plus the four axial neighbors at exactly d
    config = net(radius=1.0)
    stations = build_lattice(config)
    cov = covering_stations(stations[6].position, stations, config)
    assert cov.m == 5
    assert cov.station_ids[0] == 6


def test_tie_break_by_id():
    config = net(radius=1.0)
    stations = build_lattice(config)
    cov = covering_stations(stations[6].position, stations, config)
    # the four distance-1 neighbors come after the center, ids ascending
    assert cov.station_ids[1:] == sorted(cov.station_ids[1:])


def test_nearest_station_matches_brute_force():
    config = net(radius=1.9)
    stations = build_lattice(config)
    rng = np.random.default_rng(4)
    for _ in range(300):
        p = (rng.random() * 5.0, rng.random() * 4.0)
        order, dist = station_order(p, config)
        best = min(stations, key=lambda s: (toroidal_dist(p, s.position, (5.0, 4.0)), s.id))
        assert order[0] == best.id
        assert dist[0] == pytest.approx(toroidal_dist(p, best.position, (5.0, 4.0)))
        assert np.all(np.diff(dist) >= -1e-12)


# ---------------------------------------------------------------------------
# Radius and mean coverage


def test_radius_for_pi_neighbors_is_spacing():
    config = net(radius=0.4, spacing=1.5)
    assert radius_for_target_nbs(math.pi, config) == pytest.approx(1.5)


def test_mean_coverage_number_roundtrip():
    config = net(target_nbs=2.4)
    assert mean_coverage_number(config) == pytest.approx(2.4, rel=1e-12)
    assert config.radius == pytest.approx(math.sqrt(2.4 / math.pi))


def test_infeasible_radius_rejected():
    with pytest.raises(ValueError):
        net(radius=2.0)  # min(4,5)*1/2 = 2 exactly
    with pytest.raises(ValueError):
        net(target_nbs=math.pi * 4.0)


def test_exactly_one_of_radius_or_target():
    with pytest.raises(ValueError):
        net()
    with pytest.raises(ValueError):
        net(radius=0.5, target_nbs=2.4)


def test_empirical_mean_coverage_at_paper_point():
    # wrap makes pi R^2/d^2 exact; 10^6 points, 0.5% tolerance
    config = net(target_nbs=2.4)
    stations = build_lattice(config)
    rng = np.random.default_rng(9)
    pts = rng.random((10**6, 2)) * np.array([5.0, 4.0])
    xy = np.array([s.position for s in stations])
    dx = np.abs(pts[:, None, 0] - xy[None, :, 0])
    dy = np.abs(pts[:, None, 1] - xy[None, :, 1])
    dx = np.minimum(dx, 5.0 - dx)
    dy = np.minimum(dy, 4.0 - dy)
    m = ((dx**2 + dy**2) <= config.radius**2).sum(axis=1)
    assert m.mean() == pytest.approx(2.4, rel=0.005)


def test_no_wrap_loses_boundary_coverage():
    rng = np.random.default_rng(10)
    pts = rng.random((200000, 2)) * np.array([5.0, 4.0])
    means = {}
    for wrap in (True, False):
        config = net(target_nbs=2.4, wrap=wrap)
        stations = build_lattice(config)
        xy = np.array([s.position for s in stations])
        dx = np.abs(pts[:, None, 0] - xy[None, :, 0])
        dy = np.abs(pts[:, None, 1] - xy[None, :, 1])
        if wrap:
            dx = np.minimum(dx, 5.0 - dx)
            dy = np.minimum(dy, 4.0 - dy)
        means[wrap] = ((dx**2 + dy**2) <= config.radius**2).sum(axis=1).mean()
    assert means[False] < means[True]


# ---------------------------------------------------------------------------
# p_m estimator


def test_pm_disjoint_disks():
    config = net(radius=0.45)
    p = estimate_pm(config, 50000, np.random.default_rng(2))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert len(p) <= 2 or np.all(p[2:] == 0.0)


def test_pm_mean_within_3_sigma():
    config = net(target_nbs=2.4)
    n = 200000
    p = estimate_pm(config, n, np.random.default_rng(3))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    ms = np.arange(len(p))
    mean = (ms * p).sum()
    var = ((ms - mean) ** 2 * p).sum()
    assert abs(mean - 2.4) < 3 * math.sqrt(var / n)


def test_pm_rejects_empty_sample():
    with pytest.raises(ValueError):
        estimate_pm(net(radius=0.5), 0, np.random.default_rng(0))
