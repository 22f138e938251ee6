"""Request workload generators: IRM/Zipf and shot-noise (SNM) streams.

Both generators materialize a :class:`Trace` -- the full, immutable request
stream for one run -- rather than sampling inside the simulation loop.  All
policies evaluated on one (config, seed) cell consume the identical trace, and
the trace can be exported/imported as CSV (``step,cache_id,content_id``) for
replay through the engine without the generator.

IRM: every cache draws i.i.d. content ids each step from a Zipf(beta) pmf over
a fixed library.  No temporal or spatial correlation.

SNM: each content n contributes an inhomogeneous Poisson request process with
release time tau_n, total expected volume V_n and exponentially decaying
intensity V/l * exp(-(t - tau)/l).  Caches are partitioned into groups; each
group draws its own (volume share, release time) realization per content, so
requests are correlated within a group and approximately independent across
groups.  Events are sampled exactly via the inverse profile CDF, so per-step
counts are Poisson with mean equal to the intensity integral over the step.

Determinism: IRM streams are keyed by (seed, cache, step-block); SNM streams
by (seed, group).  Identical seeds reproduce bit-identical traces.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import STREAM_GROUP, STREAM_SPAWN, STREAM_WORKLOAD, bulk_rng

IRM_BLOCK = 1024  # steps per IRM sampling block; fixes the stream layout


class WorkloadError(ValueError):
    pass


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SnmParams:
    lifetime_range: tuple[float, float] = (10.0, 1000.0)
    volume_scale: float = 200.0
    content_arrival_rate: float = 0.3
    group_size: int = 4
    rank_cycle: int = 20
    tau_jitter: float = 1000.0

    def validate(self):
        lo, hi = self.lifetime_range
        if not (0 < lo <= hi):
            raise WorkloadError("lifetime_range must satisfy 0 < min <= max")
        if self.volume_scale <= 0:
            raise WorkloadError("volume_scale must be > 0")
        if self.content_arrival_rate < 0:
            raise WorkloadError("content_arrival_rate must be >= 0")
        if self.group_size < 1:
            raise WorkloadError("group_size must be >= 1")
        if self.rank_cycle < 1:
            raise WorkloadError("rank_cycle must be >= 1")
        if self.tau_jitter < 0:
            raise WorkloadError("tau_jitter must be >= 0")


@dataclass(frozen=True)
class WorkloadSpec:
    library_size: int = 100
    model: str = "irm"  # "irm" | "snm"
    zipf_beta: float = 0.6
    requests_per_cache_per_step: int = 1
    request_draw: str = "fixed"  # "fixed" | "poisson"
    snm: SnmParams = field(default_factory=SnmParams)

    def validate(self):
        if self.library_size < 1:
            raise WorkloadError("library_size must be >= 1")
        if self.model not in ("irm", "snm"):
            raise WorkloadError(f"unknown workload model {self.model!r}")
        if self.zipf_beta < 0:
            raise WorkloadError("zipf_beta must be >= 0")
        if self.requests_per_cache_per_step < 1:
            raise WorkloadError("requests_per_cache_per_step must be >= 1")
        if self.request_draw not in ("fixed", "poisson"):
            raise WorkloadError(f"unknown request_draw {self.request_draw!r}")
        self.snm.validate()


def zipf_pmf(n: int, beta: float) -> np.ndarray:
    """Probability vector p_k proportional to (k+1)**-beta for ids 0..n-1.

    Entries sum to 1 within 1e-12 and are non-increasing.
    """
    if n < 1:
        raise WorkloadError("library size must be >= 1")
    if beta < 0:
        raise WorkloadError("beta must be >= 0")
    ranks = np.arange(1, n + 1, dtype=np.float64)
    weights = ranks ** (-float(beta))
    return weights / weights.sum()


@dataclass(frozen=True)
class SNMContent:
    """One content's popularity profile: release time, volume, lifetime."""

    content_id: int
    arrival: float
    volume: float
    lifetime: float


def shot_intensity(c: SNMContent, t: float) -> float:
    """Instantaneous request intensity of a content at time t (0 before release)."""
    if t < c.arrival:
        return 0.0
    return (c.volume / c.lifetime) * math.exp(-(t - c.arrival) / c.lifetime)


def expected_requests(c: SNMContent, t0: float, t1: float) -> float:
    """Integral of the intensity over [t0, t1); equals the volume over [tau, inf)."""
    if t1 <= c.arrival:
        return 0.0
    t0 = max(t0, c.arrival)
    a = math.exp(-(t0 - c.arrival) / c.lifetime)
    b = math.exp(-(t1 - c.arrival) / c.lifetime)
    return c.volume * (a - b)


class Trace:
    """Immutable request stream: parallel arrays sorted by (step, cache)."""

    def __init__(self, steps, caches, contents, horizon: int, library_size: int):
        self.steps = np.asarray(steps, dtype=np.int64)
        self.caches = np.asarray(caches, dtype=np.int32)
        self.contents = np.asarray(contents, dtype=np.int64)
        if not (len(self.steps) == len(self.caches) == len(self.contents)):
            raise WorkloadError("trace arrays must have equal length")
        self.horizon = int(horizon)
        self.library_size = int(library_size)
        if len(self.steps):
            order = np.lexsort((self.caches, self.steps))
            self.steps = self.steps[order]
            self.caches = self.caches[order]
            self.contents = self.contents[order]
            if self.steps[0] < 0 or self.steps[-1] >= horizon:
                raise WorkloadError("trace step outside [0, horizon)")
        # Row range of each step, so batch(t) is a slice.
        self._bounds = np.searchsorted(self.steps, np.arange(horizon + 1))

    def __len__(self):
        return len(self.steps)

    def batch(self, t: int, n_caches: int) -> list[list[int]]:
        """Requests at step t as one list of content ids per cache."""
        lo, hi = self._bounds[t], self._bounds[t + 1]
        out = [[] for _ in range(n_caches)]
        for k in range(lo, hi):
            out[self.caches[k]].append(int(self.contents[k]))
        return out

    def iter_batches(self, n_caches: int):
        """Yield the per-step batch for every step in [0, horizon) in order."""
        steps = self.steps.tolist()
        caches = self.caches.tolist()
        contents = self.contents.tolist()
        k = 0
        n = len(steps)
        for t in range(self.horizon):
            out = [[] for _ in range(n_caches)]
            while k < n and steps[k] == t:
                out[caches[k]].append(contents[k])
                k += 1
            yield out

    def sha256(self) -> str:
        h = hashlib.sha256()
        h.update(f"trace:v1:{self.horizon}:{self.library_size}:".encode())
        h.update(self.steps.tobytes())
        h.update(self.caches.tobytes())
        h.update(self.contents.tobytes())
        return h.hexdigest()

    def slice_steps(self, start: int, stop: int) -> "Trace":
        lo, hi = self._bounds[start], self._bounds[stop]
        return Trace(
            self.steps[lo:hi] - start,
            self.caches[lo:hi],
            self.contents[lo:hi],
            stop - start,
            self.library_size,
        )

    def cache_slice(self, cache_id: int, remap_to: int = 0) -> "Trace":
        """Requests of one cache only, with its id remapped (single-cache replay)."""
        mask = self.caches == cache_id
        return Trace(
            self.steps[mask],
            np.full(int(mask.sum()), remap_to, dtype=np.int32),
            self.contents[mask],
            self.horizon,
            self.library_size,
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("step,cache_id,content_id\n")
            for t, c, n in zip(self.steps, self.caches, self.contents):
                f.write(f"{t},{c},{n}\n")

    @classmethod
    def load(cls, path, horizon: int | None = None, n_caches: int | None = None,
             library_size: int | None = None) -> "Trace":
        steps, caches, contents = [], [], []
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or (lineno == 1 and line == "step,cache_id,content_id"):
                    continue
                parts = line.split(",")
                if len(parts) != 3:
                    raise TraceFormatError(f"{path}:{lineno}: expected 3 fields")
                try:
                    t, c, n = int(parts[0]), int(parts[1]), int(parts[2])
                except ValueError:
                    raise TraceFormatError(f"{path}:{lineno}: non-integer field") from None
                if t < 0 or c < 0 or n < 0:
                    raise TraceFormatError(f"{path}:{lineno}: negative value")
                if n_caches is not None and c >= n_caches:
                    raise TraceFormatError(f"{path}:{lineno}: cache id {c} out of range")
                steps.append(t)
                caches.append(c)
                contents.append(n)
        if horizon is None:
            horizon = (max(steps) + 1) if steps else 0
        if library_size is None:
            library_size = (max(contents) + 1) if contents else 1
        return cls(steps, caches, contents, horizon, library_size)


def _irm_block(spec, cdf, cache, seed, block_start, block_len):
    """Arrays (steps, contents) for one cache over [block_start, block_start+len)."""
    rng = bulk_rng(seed, STREAM_WORKLOAD, cache, block_start)
    r = spec.requests_per_cache_per_step
    if spec.request_draw == "fixed":
        counts = np.full(block_len, r, dtype=np.int64)
    else:
        counts = rng.poisson(r, size=block_len)
    total = int(counts.sum())
    ids = np.searchsorted(cdf, rng.random(total), side="right")
    steps = np.repeat(np.arange(block_start, block_start + block_len), counts)
    return steps, ids


def build_irm_trace(spec: WorkloadSpec, n_caches: int, seed: int, horizon: int) -> Trace:
    """IRM trace: independent Zipf draws per cache per step.

    Sampling is blocked in IRM_BLOCK-step chunks per cache, each chunk from its
    own counter-based stream, so any block is reproducible in isolation.
    """
    spec.validate()
    cdf = np.cumsum(zipf_pmf(spec.library_size, spec.zipf_beta))
    cdf[-1] = 1.0
    steps_out, caches_out, contents_out = [], [], []
    for cache in range(n_caches):
        for block_start in range(0, horizon, IRM_BLOCK):
            block_len = min(IRM_BLOCK, horizon - block_start)
            steps, ids = _irm_block(spec, cdf, cache, seed, block_start, block_len)
            steps_out.append(steps)
            caches_out.append(np.full(len(ids), cache, dtype=np.int32))
            contents_out.append(ids)
    return Trace(
        np.concatenate(steps_out) if steps_out else [],
        np.concatenate(caches_out) if caches_out else [],
        np.concatenate(contents_out) if contents_out else [],
        horizon,
        spec.library_size,
    )


def irm_batch(spec: WorkloadSpec, n_caches: int, seed: int, t: int) -> list[list[int]]:
    """Requests of a single IRM step, identical to the full-trace output at t."""
    spec.validate()
    cdf = np.cumsum(zipf_pmf(spec.library_size, spec.zipf_beta))
    cdf[-1] = 1.0
    block_start = (t // IRM_BLOCK) * IRM_BLOCK
    out = []
    for cache in range(n_caches):
        steps, ids = _irm_block(spec, cdf, cache, seed, block_start, IRM_BLOCK)
        out.append([int(n) for n, s in zip(ids, steps) if s == t])
    return out


def make_groups(n_caches: int, group_size: int, grid_shape=None) -> list[tuple[int, ...]]:
    """Cache groups for spatially correlated demand.

    On grids with group_size 4 the groups are contiguous 2x2 blocks; otherwise
    caches are chunked consecutively.  Arbitrary assignments can be passed
    straight to the SNM builder instead.
    """
    if grid_shape is not None and group_size == 4:
        from .topology import tile_blocks

        rows, cols = grid_shape
        return tile_blocks(rows, cols, 2)
    return [
        tuple(range(lo, min(lo + group_size, n_caches)))
        for lo in range(0, n_caches, group_size)
    ]


def spawn_contents(spec: WorkloadSpec, n_groups: int, seed: int, horizon: int):
    """Realize the SNM catalog and the per-group (volume, release) profiles.

    Catalog: ``library_size`` initial contents released at t=0 plus a Poisson
    arrival process (``content_arrival_rate`` per step) over (0, horizon).
    Lifetimes are uniform over ``lifetime_range``.  Within each lifetime decile
    contents are ranked cyclically by arrival order and volumes fall off as
    volume_scale / rank, so among similar-lifetime contents the more popular
    one carries the larger volume, and the aggregate request rate stays
    stationary over long horizons.

    Each group receives an equal volume share and its own jittered release
    time, which correlates requests within a group and decorrelates them
    across groups.

    Returns (catalog, per_group) where per_group[g][k] is the group-local
    profile of catalog[k].
    """
    spec.validate()
    p = spec.snm
    rng = bulk_rng(seed, STREAM_SPAWN)
    n_initial = spec.library_size
    n_new = int(rng.poisson(p.content_arrival_rate * horizon)) if horizon > 0 else 0
    arrivals = np.concatenate([
        np.zeros(n_initial),
        np.sort(rng.random(n_new)) * horizon,
    ])
    lo, hi = p.lifetime_range
    lifetimes = rng.uniform(lo, hi, size=len(arrivals)) if hi > lo else np.full(len(arrivals), lo)
    if hi > lo:
        deciles = np.minimum(((lifetimes - lo) / (hi - lo) * 10).astype(int), 9)
    else:
        deciles = np.zeros(len(arrivals), dtype=int)
    catalog = []
    decile_counts = [0] * 10
    for cid in range(len(arrivals)):
        d = int(deciles[cid])
        rank = decile_counts[d] % p.rank_cycle + 1
        decile_counts[d] += 1
        catalog.append(
            SNMContent(cid, float(arrivals[cid]), p.volume_scale / rank, float(lifetimes[cid]))
        )
    per_group = []
    for g in range(n_groups):
        grng = bulk_rng(seed, STREAM_SPAWN, g + 1)
        jitters = grng.random(len(catalog)) * p.tau_jitter
        per_group.append([
            SNMContent(c.content_id, c.arrival + float(jitters[k]), c.volume / n_groups, c.lifetime)
            for k, c in enumerate(catalog)
        ])
    return catalog, per_group


def build_snm_trace(spec: WorkloadSpec, groups: list[tuple[int, ...]], seed: int,
                    horizon: int) -> Trace:
    """SNM trace over explicit cache groups.

    Exact inhomogeneous Poisson sampling per (group, content): the event count
    over [tau, horizon) is Poisson with mean equal to the intensity integral,
    and event times follow the truncated exponential profile.  Each event is
    served to a uniformly random member of its group.
    """
    spec.validate()
    if any(len(g) == 0 for g in groups):
        raise WorkloadError("empty cache group")
    catalog, per_group = spawn_contents(spec, len(groups), seed, horizon)
    steps_out, caches_out, contents_out = [], [], []
    for g, members in enumerate(groups):
        rng = bulk_rng(seed, STREAM_GROUP, g)
        profiles = per_group[g]
        means = np.array([expected_requests(c, 0.0, float(horizon)) for c in profiles])
        counts = rng.poisson(means)
        total = int(counts.sum())
        if total == 0:
            continue
        u = rng.random(total)
        picks = rng.integers(0, len(members), size=total)
        times = np.empty(total)
        pos = 0
        for k, c in enumerate(profiles):
            cnt = int(counts[k])
            if cnt == 0:
                continue
            # Inverse CDF of the exponential profile truncated to [tau, horizon).
            span = -math.expm1(-(horizon - c.arrival) / c.lifetime)
            times[pos:pos + cnt] = c.arrival - c.lifetime * np.log1p(-u[pos:pos + cnt] * span)
            contents_out.append(np.full(cnt, c.content_id, dtype=np.int64))
            pos += cnt
        member_arr = np.asarray(members, dtype=np.int32)
        steps_out.append(np.minimum(times, horizon - 1e-9).astype(np.int64))
        caches_out.append(member_arr[picks])
    if not steps_out:
        return Trace([], [], [], horizon, spec.library_size)
    return Trace(
        np.concatenate(steps_out),
        np.concatenate(caches_out),
        np.concatenate(contents_out),
        horizon,
        max(spec.library_size, len(catalog)),
    )


def build_trace(spec: WorkloadSpec, n_caches: int, seed: int, horizon: int,
                groups=None, grid_shape=None) -> Trace:
    """Materialize the request trace for one (spec, seed, horizon) cell."""
    if spec.model == "irm":
        return build_irm_trace(spec, n_caches, seed, horizon)
    if groups is None:
        groups = make_groups(n_caches, spec.snm.group_size, grid_shape)
    return build_snm_trace(spec, groups, seed, horizon)
