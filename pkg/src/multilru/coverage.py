"""Square-lattice station deployment with Boolean disk coverage.

Stations sit on a rows x cols lattice with spacing d, anchored at
(d/2, d/2); the window is cols*d wide and rows*d high. A station covers
exactly the disk of radius R_b around itself. With toroidal wrap (the
default) the mean coverage number is exactly pi R_b^2 / d^2, free of
boundary effects.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np


@dataclass
class NetworkConfig:
    grid: tuple  # (rows, cols)
    spacing: float
    radius: Optional[float] = None  # exactly one of radius / target_nbs
    target_nbs: Optional[float] = None
    wrap: bool = True

    def __post_init__(self):
        rows, cols = self.grid
        if rows < 1 or cols < 1:
            raise ValueError("grid needs at least one station")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if (self.radius is None) == (self.target_nbs is None):
            raise ValueError("give exactly one of radius or target_nbs")
        if self.radius is None:
            self.radius = radius_for_target_nbs(self.target_nbs, self)
        else:
            if self.radius <= 0:
                raise ValueError("radius must be positive")
            self.target_nbs = math.pi * self.radius ** 2 / self.spacing ** 2
        if self.wrap and self.radius >= min(rows, cols) * self.spacing / 2:
            # a disk reaching past half the window would wrap onto itself
            raise ValueError(
                f"radius {self.radius:.4g} infeasible: must stay below "
                f"min(rows, cols) * spacing / 2 = {min(rows, cols) * self.spacing / 2:.4g} with wrap"
            )
        self._xy = _lattice_xy(self.grid, self.spacing)

    @property
    def n_stations(self) -> int:
        return self.grid[0] * self.grid[1]

    @property
    def window(self) -> Tuple[float, float]:
        rows, cols = self.grid
        return (cols * self.spacing, rows * self.spacing)


@dataclass
class Station:
    id: int
    position: tuple


@dataclass
class CoverageSet:
    station_ids: list  # sorted by (distance asc, id asc)

    @property
    def m(self) -> int:
        return len(self.station_ids)


def _lattice_xy(grid, spacing) -> np.ndarray:
    rows, cols = grid
    ids = np.arange(rows * cols)
    # row-major: id = row * cols + col
    x = (ids % cols + 0.5) * spacing
    y = (ids // cols + 0.5) * spacing
    return np.column_stack([x, y])


def build_lattice(config: NetworkConfig) -> List[Station]:
    return [Station(i, (float(x), float(y))) for i, (x, y) in enumerate(config._xy)]


def radius_for_target_nbs(target_nbs: float, config: NetworkConfig) -> float:
    """Invert nbs = pi R^2 / d^2, exact under toroidal wrap."""
    if target_nbs <= 0:
        raise ValueError("target_nbs must be positive")
    r = config.spacing * math.sqrt(target_nbs / math.pi)
    rows, cols = config.grid
    if config.wrap and r >= min(rows, cols) * config.spacing / 2:
        raise ValueError(f"target_nbs {target_nbs:.4g} needs radius {r:.4g}, infeasible with wrap")
    return r


def mean_coverage_number(config: NetworkConfig) -> float:
    return math.pi * config.radius ** 2 / config.spacing ** 2


def station_order(point, config: NetworkConfig) -> Tuple[np.ndarray, np.ndarray]:
    """All stations sorted by (distance to point, id); returns (ids, distances).

    The radius-independent part of a coverage query: slicing the prefix
    with distance <= R_b gives the covering set for any R_b.
    """
    xy = config._xy
    dx = np.abs(xy[:, 0] - point[0])
    dy = np.abs(xy[:, 1] - point[1])
    if config.wrap:
        w, h = config.window
        dx = np.minimum(dx, w - dx)
        dy = np.minimum(dy, h - dy)
    d2 = dx * dx + dy * dy
    ids = np.arange(len(xy))
    order = np.lexsort((ids, d2))  # distance first, id breaks ties
    return order, np.sqrt(d2[order])


def covering_stations(point, stations: List[Station], config: NetworkConfig) -> CoverageSet:
    order, dist = station_order(point, config)
    m = int(np.searchsorted(dist, config.radius, side="right"))
    return CoverageSet(station_ids=[int(s) for s in order[:m]])


def estimate_pm(config: NetworkConfig, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo histogram of the coverage number over uniform points."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    w, h = config.window
    xy = config._xy
    counts = np.zeros(config.n_stations + 1, dtype=np.int64)
    chunk = 200_000
    done = 0
    while done < n_samples:
        n = min(chunk, n_samples - done)
        pts = rng.random((n, 2)) * np.array([w, h])
        dx = np.abs(pts[:, 0:1] - xy[:, 0])
        dy = np.abs(pts[:, 1:2] - xy[:, 1])
        if config.wrap:
            dx = np.minimum(dx, w - dx)
            dy = np.minimum(dy, h - dy)
        m = ((dx * dx + dy * dy) <= config.radius ** 2).sum(axis=1)
        counts += np.bincount(m, minlength=config.n_stations + 1)
        done += n
    p = counts / n_samples
    return p[: int(np.max(np.nonzero(p)[0])) + 1] if p.any() else p[:1]
