"""Per-step simulation core.

Each step runs the same pipeline: ingest the request batch, serve it under the
priority local cache -> neighbor cache -> central server, compute per-agent
rewards, let every policy observe and then decide, and finally apply the
placement actions.  Serving never mutates cache contents; placement is
entirely the policy's job, and the chosen action becomes the cache content of
the next step.

Serving rules:

* requests are processed in ascending cache id, then batch position (bandwidth
  contention needs a defined order);
* a local copy serves at delay 0;
* otherwise the cheapest usable neighbor holding the content serves at the
  link cost, consuming one unit of the undirected link budget per step;
* otherwise the server serves at delay 1.0 (always possible).

Every local miss is also counted as "demand" against each usable neighbor,
which forms the denominator of the cooperation reward term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .topology import Topology

LOCAL = 0
NEIGHBOR = 1
SERVER = 2


class PolicyFault(RuntimeError):
    """A policy emitted an illegal placement action."""

    def __init__(self, agent: int, message: str):
        super().__init__(f"agent {agent}: {message}")
        self.agent = agent


@dataclass(frozen=True)
class RewardWeights:
    """Linear combination of hit, delay and cooperation objectives.

    ``free_local_links`` zeroes the neighbor-transfer component inside the
    reward only (metrics keep true delays), modelling the variant where
    cache-to-cache communication is treated as free.
    """

    w_hit: float = 1.0
    w_delay: float = 0.5
    w_coop: float = 0.5
    free_local_links: bool = False

    def validate(self):
        if self.w_hit < 0 or self.w_delay < 0 or self.w_coop < 0:
            raise ValueError("reward weights must be >= 0")
        if self.w_hit == self.w_delay == self.w_coop == 0:
            raise ValueError("at least one reward weight must be positive")


class CacheNode:
    """One capacity-limited cache; contents are a set of ids, |contents| <= capacity."""

    __slots__ = ("id", "capacity", "contents")

    def __init__(self, node_id: int, capacity: int):
        self.id = node_id
        self.capacity = capacity
        self.contents: set[int] = set()


@dataclass
class ServeOutcome:
    """Counters from serving one step's batch (per cache, plus link usage)."""

    requests: list[int]
    own_hits: list[int]
    neighbor_hits: list[int]
    server_misses: list[int]
    delay_sum: list[float]
    neighbor_delay_sum: list[float]
    served_for_neighbors: list[int]
    neighbor_demand: list[int]
    link_units: list[int]
    request_log: list[tuple] | None = None  # (cache, content, source, delay)


def serve(batch: list[list[int]], caches: list[CacheNode], topo: Topology,
          record_requests: bool = False) -> ServeOutcome:
    k = topo.node_count
    out = ServeOutcome(
        requests=[0] * k,
        own_hits=[0] * k,
        neighbor_hits=[0] * k,
        server_misses=[0] * k,
        delay_sum=[0.0] * k,
        neighbor_delay_sum=[0.0] * k,
        served_for_neighbors=[0] * k,
        neighbor_demand=[0] * k,
        link_units=[0] * len(topo.links),
        request_log=[] if record_requests else None,
    )
    budgets = [ln.bandwidth for ln in topo.links]
    contents = [c.contents for c in caches]
    for i in range(k):
        reqs = batch[i]
        if not reqs:
            continue
        out.requests[i] += len(reqs)
        own = contents[i]
        order = topo.serve_order(i)
        for content in reqs:
            if content in own:
                out.own_hits[i] += 1
                if out.request_log is not None:
                    out.request_log.append((i, content, LOCAL, 0.0))
                continue
            for j in order:
                out.neighbor_demand[j] += 1
            source, delay = SERVER, 1.0
            for j in order:
                if content in contents[j]:
                    lid = topo.link_id(i, j)
                    if budgets[lid] >= 1:
                        budgets[lid] -= 1
                        out.link_units[lid] += 1
                        cost = topo.links[lid].cost
                        out.neighbor_hits[i] += 1
                        out.delay_sum[i] += cost
                        out.neighbor_delay_sum[i] += cost
                        out.served_for_neighbors[j] += 1
                        source, delay = NEIGHBOR, cost
                        break
            if source == SERVER:
                out.server_misses[i] += 1
                out.delay_sum[i] += 1.0
            if out.request_log is not None:
                out.request_log.append((i, content, source, delay))
    return out


def reward(outcome: ServeOutcome, i: int, weights: RewardWeights) -> float:
    """Per-agent step reward: w_hit*H - w_delay*D + w_coop*C.

    H = fraction of own requests served without the server, D = mean delay of
    own requests, C = fraction of the neighbor demand reaching this cache that
    it actually served.  Bounded in [-w_delay, w_hit + w_coop].
    """
    n = outcome.requests[i]
    hits = outcome.own_hits[i] + outcome.neighbor_hits[i]
    h = hits / n if n else 0.0
    d_sum = outcome.delay_sum[i]
    if weights.free_local_links:
        d_sum -= outcome.neighbor_delay_sum[i]
    d = d_sum / n if n else 0.0
    c = outcome.served_for_neighbors[i] / max(1, outcome.neighbor_demand[i])
    return weights.w_hit * h - weights.w_delay * d + weights.w_coop * c


def apply_actions(actions, caches: list[CacheNode], batch: list[list[int]]):
    """Install each agent's chosen placement; next step's cache content.

    Legality: the action must be a subset of current contents plus this step's
    requests, and must fit the capacity.  No transfer cost applies -- every
    member of that pool is already materialized at the node.
    """
    pools = []
    for i, cache in enumerate(caches):
        a = actions[i]
        pool = cache.contents.union(batch[i])
        if not a <= pool:
            raise PolicyFault(i, f"action contains ids outside cached+requested pool: "
                                 f"{sorted(set(a) - pool)[:5]}")
        if len(a) > cache.capacity:
            raise PolicyFault(i, f"action size {len(a)} exceeds capacity {cache.capacity}")
        pools.append(a)
    for cache, a in zip(caches, pools):
        cache.contents = set(a)


@dataclass(slots=True)
class AgentView:
    """What one agent is allowed to see when it observes/decides at step t."""

    t: int
    cache_id: int
    capacity: int
    contents: set
    requests: list[int]
    reward: float
    neighbor_ids: tuple[int, ...]
    neighbor_contents: list[set]
    neighbor_requests: list[list[int]]
    prev_neighbor_actions: list[frozenset] | None


class Policy:
    """Placement policy interface: observe the step, then emit a legal action."""

    def observe(self, view: AgentView):
        pass

    def decide(self, view: AgentView) -> frozenset:
        raise NotImplementedError

    def state_dict(self) -> dict:
        return {}

    def load_state_dict(self, state: dict):
        pass


@dataclass
class StepRecord:
    t: int
    counters: tuple  # per cache: (requests, own, neighbor, server, delay_sum)
    rewards: tuple
    actions: tuple  # per cache frozenset


class Simulation:
    """One sequential run of a policy set over a trace."""

    def __init__(self, topo: Topology, policies: list[Policy], weights: RewardWeights,
                 trace, record_steps: bool = False):
        if len(policies) != topo.node_count:
            raise ValueError("one policy per cache required")
        weights.validate()
        self.topo = topo
        self.policies = policies
        self.weights = weights
        self.trace = trace
        self.caches = [CacheNode(i, topo.capacities[i]) for i in range(topo.node_count)]
        self.record_steps = record_steps
        self.records: list[StepRecord] = []
        self.prev_actions: list[frozenset] | None = None
        self._usable = [topo.usable_neighbors(i) for i in range(topo.node_count)]

    def step(self, t: int, on_outcome=None, batch=None) -> ServeOutcome:
        ncaches = self.topo.node_count
        if batch is None:
            batch = self.trace.batch(t, ncaches)
        outcome = serve(batch, self.caches, self.topo)
        rewards = [reward(outcome, i, self.weights) for i in range(ncaches)]
        views = []
        for i in range(ncaches):
            nbrs = self._usable[i]
            views.append(AgentView(
                t=t,
                cache_id=i,
                capacity=self.caches[i].capacity,
                contents=self.caches[i].contents,
                requests=batch[i],
                reward=rewards[i],
                neighbor_ids=nbrs,
                neighbor_contents=[self.caches[j].contents for j in nbrs],
                neighbor_requests=[batch[j] for j in nbrs],
                prev_neighbor_actions=(
                    None if self.prev_actions is None
                    else [self.prev_actions[j] for j in nbrs]),
            ))
        # Simultaneous-move semantics: every agent observes the shared snapshot
        # before any action is installed.
        for i in range(ncaches):
            self.policies[i].observe(views[i])
        actions = [self.policies[i].decide(views[i]) for i in range(ncaches)]
        apply_actions(actions, self.caches, batch)
        self.prev_actions = actions
        if on_outcome is not None:
            on_outcome(t, outcome, rewards)
        if self.record_steps:
            self.records.append(StepRecord(
                t=t,
                counters=tuple(
                    (outcome.requests[i], outcome.own_hits[i], outcome.neighbor_hits[i],
                     outcome.server_misses[i], outcome.delay_sum[i])
                    for i in range(ncaches)),
                rewards=tuple(rewards),
                actions=tuple(actions),
            ))
        return outcome

    def run(self, on_outcome=None):
        for t, batch in enumerate(self.trace.iter_batches(self.topo.node_count)):
            self.step(t, on_outcome, batch)
