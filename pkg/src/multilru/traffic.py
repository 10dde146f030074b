"""Synthetic spatial request traffic with temporal locality.

Contents arrive as a homogeneous Poisson process on [0, horizon]. Each
content draws a truncated-Pareto lifespan, a rounded-Pareto request
volume and a popularity shape; its requests are placed inside the
lifespan window by inverse-CDF sampling of the shape, and every request
gets an independent uniform position in a rectangular window.

All per-content randomness comes from a substream keyed by
(master_seed, role, content id), so any content can be regenerated in
isolation and the whole trace is reproducible content by content.
"""

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import zeta

# substream roles under one master seed
_ROLE_ARRIVALS = 0
_ROLE_CONTENT = 1


class ShapeKind(Enum):
    UNIFORM = "uniform"
    LOGISTIC = "logistic"
    GOMPERTZ = "gompertz"
    NEGEXP = "negexp"


# order of shape_mix entries
SHAPE_ORDER = (ShapeKind.UNIFORM, ShapeKind.LOGISTIC, ShapeKind.GOMPERTZ, ShapeKind.NEGEXP)


# ---------------------------------------------------------------------------
# Pareto marks


def sample_pareto(beta: float, x_min: float, u: float) -> float:
    """Inverse-CDF Pareto draw; u is the tail coordinate in (0, 1], u=1 -> x_min."""
    if beta <= 0 or x_min <= 0:
        raise ValueError("sample_pareto needs beta > 0 and x_min > 0")
    if u <= 0 or u > 1:
        raise ValueError("sample_pareto needs u in (0, 1]")
    return x_min * u ** (-1.0 / beta)


def volume_beta_from_mean(volume_mean: float, volume_min: float) -> float:
    if volume_mean <= volume_min or volume_min <= 0:
        raise ValueError("volume_mean must exceed volume_min > 0")
    return volume_mean / (volume_mean - volume_min)


def volume_mean_from_beta(volume_beta: float, volume_min: float) -> float:
    if volume_beta <= 1:
        raise ValueError("volume_beta must exceed 1 for a finite mean")
    return volume_beta * volume_min / (volume_beta - 1)


def sample_volume(beta: float, volume_min: float, rng: np.random.Generator) -> int:
    # 1 - random() lies in (0, 1], which keeps the draw finite
    raw = sample_pareto(beta, volume_min, 1.0 - rng.random())
    return int(math.floor(raw + 0.5))  # round half up


def discretized_volume_mean(beta: float, volume_min: float = 0.5) -> float:
    """Exact mean of the rounded volume, E[round-half-up(Pareto)].

    Sums the tail probabilities P(V >= k) = min(1, (volume_min/(k-1/2))^beta)
    via the Hurwitz zeta function. This is what the generator actually
    produces, a little above the continuous mean beta*V_min/(beta-1).
    """
    if beta <= 1:
        raise ValueError("discretized mean is finite only for beta > 1")
    # k0 = first integer k with k - 1/2 > volume_min; below that P(V >= k) = 1
    k0 = int(math.floor(volume_min + 0.5)) + 1
    return (k0 - 1) + volume_min ** beta * float(zeta(beta, k0 - 0.5))


def prob_volume_above_one(beta: float, volume_min: float = 0.5) -> float:
    """P(V > 1) for the rounded volume, i.e. the raw Pareto tail beyond 1.5."""
    if volume_min >= 1.5:
        return 1.0
    return (volume_min / 1.5) ** beta


# ---------------------------------------------------------------------------
# Truncated-Pareto lifespans


def truncated_pareto_mean(beta: float, lo: float, hi: float) -> float:
    """Mean of Pareto(beta, lo) conditioned on [lo, hi]; beta 0 and 1 by limits."""
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    if abs(beta) < 1e-9:
        return (hi - lo) / math.log(hi / lo)
    if abs(beta - 1.0) < 1e-9:
        return lo * hi * math.log(hi / lo) / (hi - lo)
    return (beta / (1.0 - beta)) * (hi ** (1 - beta) - lo ** (1 - beta)) / (lo ** -beta - hi ** -beta)


def lifespan_beta_from_mean(lifespan_mean: float, tau_min: float, tau_max: float) -> float:
    """Root of truncated_pareto_mean(beta) = lifespan_mean, bisected on [-5, 5].

    The truncated mean is strictly decreasing in beta, so the root is
    unique when the target lies in the attainable range.
    """
    if not tau_min < lifespan_mean < tau_max:
        raise ValueError("lifespan_mean must lie strictly inside the bounds")
    lo_b, hi_b = -5.0, 5.0
    if not truncated_pareto_mean(hi_b, tau_min, tau_max) < lifespan_mean < truncated_pareto_mean(lo_b, tau_min, tau_max):
        raise ValueError("target mean outside the attainable range for beta in [-5, 5]")
    for _ in range(200):
        mid = 0.5 * (lo_b + hi_b)
        if truncated_pareto_mean(mid, tau_min, tau_max) > lifespan_mean:
            lo_b = mid
        else:
            hi_b = mid
    beta = 0.5 * (lo_b + hi_b)
    if abs(truncated_pareto_mean(beta, tau_min, tau_max) - lifespan_mean) >= 1e-6:
        raise ValueError("bisection failed to reach the requested residual")
    return beta


def truncated_pareto_quantile(beta: float, lo: float, hi: float, u: float) -> float:
    # beta == 0 degenerates to log-uniform
    if abs(beta) < 1e-9:
        return lo * (hi / lo) ** u
    a, b = lo ** -beta, hi ** -beta
    return (a - u * (a - b)) ** (-1.0 / beta)


def sample_lifespan(beta_t: float, tau_min: float, tau_max: float, rng: np.random.Generator) -> float:
    if not 0 < tau_min < tau_max:
        raise ValueError("need 0 < tau_min < tau_max")
    return truncated_pareto_quantile(beta_t, tau_min, tau_max, rng.random())


# ---------------------------------------------------------------------------
# Popularity shapes

# Raw curves, truncate-normalized onto the lifespan window:
#   negexp   F(x) = 1 - exp(-lam x)            with F(tau) = 1 - eps
#   logistic F(x) = 1/(1 + exp(-lam(x-tau/2))) with F(0) = eps/2, F(tau) = 1 - eps/2
#   gompertz F(x) = exp(-b exp(-lam x))        with F(0) = eps/2, F(tau) = 1 - eps/2


@dataclass
class PopularityShape:
    kind: ShapeKind
    rate: float  # lambda of the raw curve; 0 for uniform
    center: float  # inflection offset for the logistic, else 0
    curve_scale: float  # gompertz b, else 0
    support: tuple  # (t_start, t_end)
    epsilon: float


def make_shape(kind: ShapeKind, t_start: float, lifespan: float, epsilon: float) -> PopularityShape:
    if lifespan <= 0 or not 0 < epsilon < 1:
        raise ValueError("need lifespan > 0 and epsilon in (0, 1)")
    rate = 0.0
    center = 0.0
    scale = 0.0
    if kind is ShapeKind.NEGEXP:
        rate = math.log(1.0 / epsilon) / lifespan
    elif kind is ShapeKind.LOGISTIC:
        rate = (2.0 / lifespan) * math.log(2.0 / epsilon - 1.0)
        center = lifespan / 2.0
    elif kind is ShapeKind.GOMPERTZ:
        scale = math.log(2.0 / epsilon)
        rate = math.log(scale / (-math.log(1.0 - epsilon / 2.0))) / lifespan
    elif kind is not ShapeKind.UNIFORM:
        raise ValueError(f"unknown shape kind: {kind!r}")
    return PopularityShape(kind, rate, center, scale, (t_start, t_start + lifespan), epsilon)


def _raw_cdf(shape: PopularityShape, x: float) -> float:
    if shape.kind is ShapeKind.UNIFORM:
        tau = shape.support[1] - shape.support[0]
        return x / tau
    if shape.kind is ShapeKind.NEGEXP:
        return 1.0 - math.exp(-shape.rate * x)
    if shape.kind is ShapeKind.LOGISTIC:
        return 1.0 / (1.0 + math.exp(-shape.rate * (x - shape.center)))
    return math.exp(-shape.curve_scale * math.exp(-shape.rate * x))


def shape_cdf(shape: PopularityShape, s: float) -> float:
    t0, t1 = shape.support
    if s <= t0:
        return 0.0
    if s >= t1:
        return 1.0
    x = s - t0
    if shape.kind is ShapeKind.UNIFORM:
        return _raw_cdf(shape, x)
    lo = 0.0 if shape.kind is ShapeKind.NEGEXP else shape.epsilon / 2.0
    return (_raw_cdf(shape, x) - lo) / (1.0 - shape.epsilon)


def shape_quantile(shape: PopularityShape, p: float) -> float:
    """Closed-form inverse of the truncated-normalized cdf."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    t0, t1 = shape.support
    eps = shape.epsilon
    if shape.kind is ShapeKind.UNIFORM:
        return t0 + p * (t1 - t0)
    if shape.kind is ShapeKind.NEGEXP:
        x = -math.log(1.0 - p * (1.0 - eps)) / shape.rate
    else:
        q = eps / 2.0 + p * (1.0 - eps)
        if shape.kind is ShapeKind.LOGISTIC:
            x = shape.center + math.log(q / (1.0 - q)) / shape.rate
        else:
            x = -math.log(-math.log(q) / shape.curve_scale) / shape.rate
    # clamp float dust at the endpoints
    return min(max(t0 + x, t0), t1)


def shape_pdf(shape: PopularityShape, s: float) -> float:
    t0, t1 = shape.support
    if s < t0 or s >= t1:
        return 0.0
    x = s - t0
    if shape.kind is ShapeKind.UNIFORM:
        return 1.0 / (t1 - t0)
    if shape.kind is ShapeKind.NEGEXP:
        raw = shape.rate * math.exp(-shape.rate * x)
    elif shape.kind is ShapeKind.LOGISTIC:
        e = math.exp(-shape.rate * (x - shape.center))
        raw = shape.rate * e / (1.0 + e) ** 2
    else:
        inner = shape.curve_scale * math.exp(-shape.rate * x)
        raw = shape.rate * inner * math.exp(-inner)
    return raw / (1.0 - shape.epsilon)


# ---------------------------------------------------------------------------
# Config and content stream


@dataclass
class TrafficConfig:
    lambda_c: float
    horizon: float
    lifespan_mean: float
    lifespan_bounds: tuple
    shape_mix: tuple  # (a_uniform, a_logistic, a_gompertz, a_negexp)
    window: tuple  # (width, height)
    master_seed: int
    volume_mean: Optional[float] = None  # exactly one of volume_mean / volume_beta
    volume_beta: Optional[float] = None
    volume_min: float = 0.5
    epsilon: float = 0.02
    max_expected_requests: float = 2e7

    def __post_init__(self):
        if self.lambda_c < 0 or self.horizon < 0:
            raise ValueError("lambda_c and horizon must be nonnegative")
        if self.volume_mean is None and self.volume_beta is None:
            raise ValueError("give exactly one of volume_mean or volume_beta")
        if self.volume_mean is not None and self.volume_beta is not None:
            # both allowed only when consistent, so replace() round-trips
            if abs(self.volume_beta - volume_beta_from_mean(self.volume_mean, self.volume_min)) > 1e-9:
                raise ValueError("volume_mean and volume_beta disagree; give exactly one")
        elif self.volume_mean is not None:
            self.volume_beta = volume_beta_from_mean(self.volume_mean, self.volume_min)
        else:
            self.volume_mean = volume_mean_from_beta(self.volume_beta, self.volume_min)
        lo, hi = self.lifespan_bounds
        if not 0 < lo < hi:
            raise ValueError("lifespan_bounds must satisfy 0 < tau_min < tau_max")
        if not lo < self.lifespan_mean < hi:
            raise ValueError("lifespan_mean must lie strictly between the bounds")
        mix = tuple(float(a) for a in self.shape_mix)
        if len(mix) != 4 or any(a < 0 for a in mix):
            raise ValueError("shape_mix needs 4 nonnegative entries (uniform, logistic, gompertz, negexp)")
        if abs(sum(mix) - 1.0) > 1e-12:
            raise ValueError("shape_mix must sum to 1 within 1e-12")
        self.shape_mix = mix
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if len(self.window) != 2 or self.window[0] <= 0 or self.window[1] <= 0:
            raise ValueError("window must be a positive (width, height)")
        self.lifespan_beta = lifespan_beta_from_mean(self.lifespan_mean, lo, hi)
        self._mix_edges = np.cumsum(self.shape_mix)


@dataclass
class Content:
    id: int
    t_arrival: float
    lifespan: float
    volume: int
    shape: ShapeKind
    request_times: Optional[np.ndarray] = None
    positions: Optional[np.ndarray] = None  # (volume, 2), one row per request


class Request(NamedTuple):
    time: float
    content_id: int
    x: float
    y: float


def place_requests(content: Content, shape: PopularityShape, rng: np.random.Generator) -> np.ndarray:
    """First request exactly at the arrival, the other v-1 via shape quantiles."""
    v = content.volume
    times = np.empty(v)
    times[0] = content.t_arrival
    if v > 1:
        draws = rng.random(v - 1)
        extra = np.array([shape_quantile(shape, u) for u in draws])
        times[1:] = np.sort(extra)
    return times


def _build_content(config: TrafficConfig, cid: int, t_arrival: float) -> Content:
    # draw order is a compatibility contract: lifespan, volume, shape
    # kind, request offsets, positions
    rng = np.random.default_rng(np.random.SeedSequence((config.master_seed, _ROLE_CONTENT, cid)))
    tau = sample_lifespan(config.lifespan_beta, *config.lifespan_bounds, rng)
    v = sample_volume(config.volume_beta, config.volume_min, rng)
    kind = SHAPE_ORDER[int(np.searchsorted(config._mix_edges, rng.random(), side="right"))]
    content = Content(cid, t_arrival, tau, v, kind)
    shape = make_shape(kind, t_arrival, tau, config.epsilon)
    content.request_times = place_requests(content, shape, rng)
    content.positions = rng.random((v, 2)) * np.asarray(config.window)
    return content


def generate_contents(config: TrafficConfig) -> Iterator[Content]:
    """Contents in arrival order; arrival times are a PPP on [0, horizon]."""
    expected = config.lambda_c * config.horizon * discretized_volume_mean(config.volume_beta, config.volume_min)
    if expected > config.max_expected_requests:
        raise ValueError(
            f"expected request count {expected:.3g} exceeds the cap "
            f"{config.max_expected_requests:.3g}; raise max_expected_requests to proceed"
        )
    rng = np.random.default_rng(np.random.SeedSequence((config.master_seed, _ROLE_ARRIVALS)))
    n = rng.poisson(config.lambda_c * config.horizon)
    arrivals = np.sort(rng.random(n)) * config.horizon
    for cid, t in enumerate(arrivals):
        yield _build_content(config, cid, float(t))


def merge_requests(contents: Iterator[Content]) -> Iterator[Request]:
    """k-way merge of per-content request lists into one time-ordered stream.

    Memory stays proportional to the number of concurrently active
    contents, never the total request count.
    """
    heap = []  # (time, content_id, index)
    stash = {}

    def emit(entry):
        t, cid, idx = entry
        times, pos = stash[cid]
        if idx + 1 < len(times):
            heapq.heappush(heap, (float(times[idx + 1]), cid, idx + 1))
        else:
            del stash[cid]
        return Request(t, cid, float(pos[idx, 0]), float(pos[idx, 1]))

    for content in contents:
        # first request time equals the arrival, so everything already
        # due precedes this content in the merged order
        while heap and heap[0][0] <= content.t_arrival:
            yield emit(heapq.heappop(heap))
        stash[content.id] = (content.request_times, content.positions)
        heapq.heappush(heap, (float(content.request_times[0]), content.id, 0))
    while heap:
        yield emit(heapq.heappop(heap))


def generate(config: TrafficConfig) -> Iterator[Request]:
    """The full request stream, nondecreasing in time."""
    return merge_requests(generate_contents(config))


# ---------------------------------------------------------------------------
# Closed-form predictors


def mean_catalogue_size(config: TrafficConfig) -> float:
    """Expected number of simultaneously active multi-request contents."""
    return config.lambda_c * prob_volume_above_one(config.volume_beta, config.volume_min) * config.lifespan_mean


def mean_total_requests(config: TrafficConfig, s: Optional[float] = None, discretized: bool = True) -> float:
    """Expected request count over [0, s] (defaults to the horizon).

    With discretized=True (default) uses the exact mean of the rounded
    volume, which is what the generator emits; discretized=False gives
    the continuous-calibration value s * lambda_c * E[V].
    """
    if s is None:
        s = config.horizon
    ev = discretized_volume_mean(config.volume_beta, config.volume_min) if discretized else config.volume_mean
    return s * config.lambda_c * ev


def ccsr(k: int, lambda_c: float, lifespan_mean: float) -> float:
    """Cache-to-mean-catalogue-size ratio K / (lambda_c E[T])."""
    if lambda_c <= 0 or lifespan_mean <= 0:
        raise ValueError("need lambda_c > 0 and lifespan_mean > 0")
    return k / (lambda_c * lifespan_mean)
