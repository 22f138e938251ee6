"""Evaluation metrics over serve outcomes.

All ratios return ``None`` (an explicit empty marker) instead of 0 when the
denominator is empty, so zero-request windows never skew averages.  Counters
conserve: own hits + neighbor hits + server misses = requests, globally and
per cache.
"""

from __future__ import annotations

import logging

logger = logging.getLogger(__name__)


class MetricsAccumulator:
    """Running totals of requests, hit sources and delay, per cache and global."""

    def __init__(self, n_caches: int):
        self.n_caches = n_caches
        self.requests = [0] * n_caches
        self.own_hits = [0] * n_caches
        self.neighbor_hits = [0] * n_caches
        self.server_misses = [0] * n_caches
        self.delay_sum = [0.0] * n_caches
        self.reward_sum = [0.0] * n_caches
        self.steps = 0

    def add_outcome(self, outcome, rewards=None):
        for i in range(self.n_caches):
            self.requests[i] += outcome.requests[i]
            self.own_hits[i] += outcome.own_hits[i]
            self.neighbor_hits[i] += outcome.neighbor_hits[i]
            self.server_misses[i] += outcome.server_misses[i]
            self.delay_sum[i] += outcome.delay_sum[i]
            if rewards is not None:
                self.reward_sum[i] += rewards[i]
        self.steps += 1

    def merge(self, other: "MetricsAccumulator"):
        for i in range(self.n_caches):
            self.requests[i] += other.requests[i]
            self.own_hits[i] += other.own_hits[i]
            self.neighbor_hits[i] += other.neighbor_hits[i]
            self.server_misses[i] += other.server_misses[i]
            self.delay_sum[i] += other.delay_sum[i]
            self.reward_sum[i] += other.reward_sum[i]
        self.steps += other.steps

    @property
    def total_requests(self) -> int:
        return sum(self.requests)


def hit_ratio(acc: MetricsAccumulator) -> float | None:
    """Fraction of requests served without the central server."""
    total = acc.total_requests
    if total == 0:
        return None
    return (sum(acc.own_hits) + sum(acc.neighbor_hits)) / total


def individual_hit_ratio(acc: MetricsAccumulator, i: int) -> float | None:
    """Fraction of cache i's own requests served from its own storage."""
    if acc.requests[i] == 0:
        return None
    return acc.own_hits[i] / acc.requests[i]


def individual_hit_ratio_mean(acc: MetricsAccumulator) -> float | None:
    vals = [individual_hit_ratio(acc, i) for i in range(acc.n_caches)]
    vals = [v for v in vals if v is not None]
    if not vals:
        return None
    return sum(vals) / len(vals)


def normalized_delay(acc: MetricsAccumulator) -> float | None:
    """Mean per-request delay relative to the server delay of 1.0."""
    total = acc.total_requests
    if total == 0:
        return None
    return sum(acc.delay_sum) / total


def shared_link_rate(acc: MetricsAccumulator) -> float | None:
    """Server load: fraction of requests escalated over the shared link."""
    total = acc.total_requests
    if total == 0:
        return None
    return sum(acc.server_misses) / total


def mean_reward(acc: MetricsAccumulator) -> float | None:
    if acc.steps == 0:
        return None
    return sum(acc.reward_sum) / (acc.steps * acc.n_caches)


def effectiveness(scheme_hit_ratio: float, bound_hit_ratio: float) -> float:
    """Ratio of a scheme's hit ratio to the optimistic upper bound's."""
    if bound_hit_ratio <= 0:
        raise ZeroDivisionError("upper bound hit ratio must be positive")
    ratio = scheme_hit_ratio / bound_hit_ratio
    if ratio > 1.0:
        logger.warning(
            "effectiveness %.4f > 1: the bound is not optimistic for this instance",
            ratio)
    return ratio


class RunMetrics:
    """Per-run collector: a burned-in summary plus an exact window time series.

    The first ``burn_in`` steps are excluded from the summary accumulator but
    still appear in the time series.  Windows partition [0, horizon) exactly;
    the final window may be shorter.
    """

    def __init__(self, n_caches: int, horizon: int, burn_in: int = 0,
                 window: int = 1000):
        if burn_in < 0 or burn_in > horizon:
            raise ValueError("burn_in must lie in [0, horizon]")
        if window < 1:
            raise ValueError("window must be >= 1")
        self.horizon = horizon
        self.burn_in = burn_in
        self.window = window
        self.summary = MetricsAccumulator(n_caches)
        self._win = MetricsAccumulator(n_caches)
        self._win_start = 0
        self.series: list[dict] = []

    def on_outcome(self, t: int, outcome, rewards=None):
        self._win.add_outcome(outcome, rewards)
        if t >= self.burn_in:
            self.summary.add_outcome(outcome, rewards)
        if t + 1 == self.horizon or (t + 1) % self.window == 0:
            self.series.append({
                "window_start": self._win_start,
                "window_end": t + 1,
                "hit_ratio": hit_ratio(self._win),
                "individual_hit_ratio_mean": individual_hit_ratio_mean(self._win),
                "normalized_delay": normalized_delay(self._win),
                "shared_link_rate": shared_link_rate(self._win),
            })
            self._win = MetricsAccumulator(self._win.n_caches)
            self._win_start = t + 1

    def summary_row(self) -> dict:
        acc = self.summary
        return {
            "requests": acc.total_requests,
            "hit_ratio": hit_ratio(acc),
            "individual_hit_ratio_mean": individual_hit_ratio_mean(acc),
            "normalized_delay": normalized_delay(acc),
            "shared_link_rate": shared_link_rate(acc),
            "mean_reward": mean_reward(acc),
        }
