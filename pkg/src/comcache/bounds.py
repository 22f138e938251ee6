"""Influence-optimistic upper bound on the achievable hit ratio.

The network is partitioned into small blocks (2x2 on grids) by severing the
links that cross block boundaries.  Each endpoint of a severed link gains the
other endpoint's full capacity, which is optimistic: it assumes a cache could
use its removed neighbor's storage entirely.  Each block is then evaluated
independently on the recorded request trace with an omniscient sliding-window
placer: per window it stores the most requested contents up to the block's
pooled inflated capacity, serving any member's request from anywhere in the
block at no bandwidth cost.  Every relaxation only helps, so the resulting
hit ratio dominates what any online scheme can achieve on the same trace.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .topology import Topology
from .workload import Trace


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]
    removed_links: tuple[tuple[int, int], ...]
    inflated_capacities: tuple[int, ...]

    def block_of(self) -> list[int]:
        out = [-1] * sum(len(b) for b in self.blocks)
        for b, members in enumerate(self.blocks):
            for i in members:
                out[i] = b
        return out


def partition_blocks(topo: Topology, blocks) -> Partition:
    """Partition into explicit blocks; links crossing blocks are removed and
    their capacities folded into both endpoints."""
    blocks = tuple(tuple(sorted(b)) for b in blocks)
    seen: set[int] = set()
    for b in blocks:
        for i in b:
            if i in seen:
                raise ValueError(f"node {i} appears in two blocks")
            seen.add(i)
    if seen != set(range(topo.node_count)):
        raise ValueError("blocks must cover every node exactly once")
    block_of = {}
    for b, members in enumerate(blocks):
        for i in members:
            block_of[i] = b
    removed = []
    inflated = list(topo.capacities)
    for ln in topo.links:
        if block_of[ln.a] != block_of[ln.b]:
            removed.append((min(ln.a, ln.b), max(ln.a, ln.b)))
            inflated[ln.a] += topo.capacities[ln.b]
            inflated[ln.b] += topo.capacities[ln.a]
    return Partition(blocks, tuple(removed), tuple(inflated))


def partition_grid(topo: Topology) -> Partition:
    """Row-major 2x2 block tiling of a grid topology.

    Odd dimensions tile best-effort with smaller edge blocks.
    """
    if topo.grid_shape is None:
        raise ValueError("partition_grid needs a grid topology; "
                         "use partition_blocks for explicit partitions")
    from .topology import tile_blocks

    rows, cols = topo.grid_shape
    return partition_blocks(topo, tile_blocks(rows, cols, 2))


def greedy_window_hits(counts: Counter, capacity: int) -> int:
    """Hits of the best pooled placement: top-`capacity` contents by count.

    With pooled intra-block serving the marginal gain of a content is exactly
    its request count, so the greedy choice is optimal for a single window.
    """
    if capacity >= len(counts):
        return sum(counts.values())
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:capacity]
    return sum(c for _, c in top)


def exact_window_hits(counts: Counter, capacity: int) -> int:
    """Brute-force check of the window placement (small footprints only)."""
    contents = sorted(counts)
    if capacity >= len(contents):
        return sum(counts.values())
    if len(contents) > 22:
        raise ValueError("exact search is limited to small content footprints")
    best = 0
    for subset in combinations(contents, capacity):
        best = max(best, sum(counts[c] for c in subset))
    return best


def oub_hit_ratio(partition: Partition, trace: Trace, window: int = 1000,
                  start: int = 0, stop: int | None = None):
    """Upper-bound hit ratio on a recorded trace, plus per-(block, window) detail.

    Returns ``(overall, detail)`` where overall is request-weighted across all
    blocks and windows (None if the range holds no requests) and detail rows
    are ``(block_id, window_start, hit_ratio_or_None)``.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if stop is None:
        stop = trace.horizon
    if not (0 <= start <= stop <= trace.horizon):
        raise ValueError("invalid step range")
    block_of = partition.block_of()
    if len(block_of) <= int(trace.caches.max(initial=0)):
        raise ValueError("trace cache ids exceed the partitioned network")
    pooled = [sum(partition.inflated_capacities[i] for i in b) for b in partition.blocks]
    lo_all = np.searchsorted(trace.steps, start)
    hi_all = np.searchsorted(trace.steps, stop)
    steps = trace.steps[lo_all:hi_all]
    caches = trace.caches[lo_all:hi_all]
    contents = trace.contents[lo_all:hi_all]
    total_hits = 0
    total_requests = 0
    detail = []
    for w0 in range(start, stop, window):
        w1 = min(w0 + window, stop)
        lo = np.searchsorted(steps, w0)
        hi = np.searchsorted(steps, w1)
        per_block: list[Counter] = [Counter() for _ in partition.blocks]
        for k in range(lo, hi):
            per_block[block_of[caches[k]]][int(contents[k])] += 1
        for b, counts in enumerate(per_block):
            n = sum(counts.values())
            if n == 0:
                detail.append((b, w0, None))
                continue
            hits = greedy_window_hits(counts, pooled[b])
            detail.append((b, w0, hits / n))
            total_hits += hits
            total_requests += n
    overall = total_hits / total_requests if total_requests else None
    return overall, detail
