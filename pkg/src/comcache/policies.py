"""Baseline placement policies: LRU and windowed LFU.

Both are per-cache and neighbor-blind; any neighbor benefit they show comes
from the engine's serving layer, not from coordination.  The learning
policies (independent and neighborhood Q-learning) live in ``marl``.
"""

from __future__ import annotations

from collections import deque

from .engine import AgentView, Policy


def take_full_pool(view: AgentView) -> frozenset | None:
    """The forced action when everything fits: keep cached plus requested."""
    pool = view.contents.union(view.requests)
    if len(pool) <= view.capacity:
        return frozenset(pool)
    return None


class LRUPolicy(Policy):
    """Least-recently-used: requested files are inserted, the stalest cached
    file is discarded when over capacity."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.clock = 0
        self.recency: dict[int, int] = {}

    def decide(self, view: AgentView) -> frozenset:
        for content in view.requests:
            self.clock += 1
            self.recency[content] = self.clock
        pool = view.contents.union(view.requests)
        m = min(self.capacity, len(pool))
        # Recency ticks are unique, so this order is total.
        keep = sorted(pool, key=lambda c: -self.recency.get(c, 0))[:m]
        result = frozenset(keep)
        self.recency = {c: self.recency[c] for c in result}
        return result

    def state_dict(self):
        return {"clock": self.clock, "recency": dict(self.recency)}

    def load_state_dict(self, state):
        self.clock = state["clock"]
        self.recency = dict(state["recency"])


class LFUPolicy(Policy):
    """Windowed least-frequently-used.

    Keeps the highest-count contents of cached+requested over the trailing
    ``window`` steps (exact ring buffer); ties break by most recent access,
    then lowest id.  An access older than the window never influences a
    decision, which is what eventually evicts stale-popular files.
    """

    def __init__(self, capacity: int, window: int = 10**6):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.capacity = capacity
        self.window = window
        self.counts: dict[int, int] = {}
        self.history: deque[tuple[int, tuple[int, ...]]] = deque()
        self.clock = 0
        self.last_access: dict[int, int] = {}

    def _ingest(self, t: int, requests: list[int]):
        if requests:
            self.history.append((t, tuple(requests)))
            for c in requests:
                self.counts[c] = self.counts.get(c, 0) + 1
                self.clock += 1
                self.last_access[c] = self.clock
        horizon_edge = t - self.window
        while self.history and self.history[0][0] <= horizon_edge:
            _, old = self.history.popleft()
            for c in old:
                left = self.counts[c] - 1
                if left:
                    self.counts[c] = left
                else:
                    del self.counts[c]

    def decide(self, view: AgentView) -> frozenset:
        self._ingest(view.t, view.requests)
        pool = view.contents.union(view.requests)
        m = min(self.capacity, len(pool))
        keep = sorted(
            pool,
            key=lambda c: (-self.counts.get(c, 0), -self.last_access.get(c, 0), c),
        )[:m]
        return frozenset(keep)

    def state_dict(self):
        return {
            "counts": dict(self.counts),
            "history": list(self.history),
            "clock": self.clock,
            "last_access": dict(self.last_access),
        }

    def load_state_dict(self, state):
        self.counts = dict(state["counts"])
        self.history = deque(tuple(x) for x in state["history"])
        self.clock = state["clock"]
        self.last_access = dict(state["last_access"])


def build_policies(name: str, topo, seed: int, params: dict | None = None,
                   stream_ids=None) -> list[Policy]:
    """One policy instance per cache.

    ``stream_ids`` overrides the per-agent RNG stream ids of the learning
    policies (default: the cache id), which lets a single-cache replay of one
    cache's trace slice reproduce that cache's decision stream exactly.
    """
    from . import marl

    params = dict(params or {})
    k = topo.node_count
    if stream_ids is None:
        stream_ids = list(range(k))
    if name == "lru":
        return [LRUPolicy(topo.capacities[i]) for i in range(k)]
    if name == "lfu":
        window = int(params.get("window", 10**6))
        return [LFUPolicy(topo.capacities[i], window) for i in range(k)]
    if name in ("iql", "comcache"):
        return marl.build_learners(name, topo, seed, params, stream_ids)
    raise ValueError(f"unknown policy {name!r}")
