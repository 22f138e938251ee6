"""Neighborhood joint-action Q-learning for cache placement.

Each agent keeps a sparse Q-table over joint keys ``(state_part, own_action,
neighbor_action)`` where ``state_part`` covers its own state plus its usable
one-hop neighbors' states.  Alongside the Q-table it counts how often every
neighbor joint action was observed in each state part; the normalized counts
form an empirical distribution over neighbor behavior, and the learner's value
of a state is the best response against that distribution:

    value(s) = max over own a of  sum over a_N of  Q(s, a, a_N) * prob(s, a_N)

The Q-update mixes the observed reward with the discounted best-response value
of the successor state; the decision rule is epsilon-greedy over the same
best-response scores.  Independent Q-learning is the special case with an
empty neighbor scope: the distribution collapses to a point mass and the
update reduces to the classic single-agent rule.

Two state/action codecs are provided:

* ``exact``: keys carry the literal content-id sets (sorted cached set, sorted
  requested set, exact action subsets).  Faithful and injective, but keys
  rarely repeat outside small libraries, so it only learns on tiny instances.
* ``relative`` (default): keys describe the decision relative to the agent's
  own decayed popularity estimates -- how the newly requested content ranks
  against the cached set, how many neighbors already hold or also want it, and
  how many neighbors' actions kept it.  Labels generalize across content ids,
  which lets the tabular learner converge within desk-scale horizons.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import combinations

from .engine import AgentView, Policy
from .rng import (
    _MASK64,
    SLOT_EXPLORE,
    SLOT_TIEBREAK,
    SLOT_UNIFORM_ACTION,
    STREAM_POLICY,
    splitmix64,
)


class ActionSpaceError(RuntimeError):
    pass


@dataclass(frozen=True)
class LearnerConfig:
    gamma: float = 0.9
    alpha0: float = 0.5
    omega: float = 0.85
    eps0: float = 0.2
    eps_decay: float = 1.0 - 1e-5
    eps_min: float = 0.01
    codec: str = "relative"  # "relative" | "exact"
    state_q_cap: int = 8
    action_cap: int = 10**5
    pop_decay: float = 0.99
    redundancy_discount: float = 0.5  # eviction preference for neighbor-covered contents
    neighbor_demand_weight: float = 0.5  # weight of observed neighbor requests
    # in the popularity estimate (neighborhood learner only; independent
    # learners never see neighbor requests)

    def validate(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")
        if not (0.0 < self.alpha0 <= 1.0):
            raise ValueError("alpha0 must lie in (0, 1]")
        if not (0.5 < self.omega <= 1.0):
            raise ValueError("omega must lie in (0.5, 1]")
        if not (0.0 <= self.eps_min <= self.eps0 <= 1.0):
            raise ValueError("need 0 <= eps_min <= eps0 <= 1")
        if not (0.0 < self.eps_decay <= 1.0):
            raise ValueError("eps_decay must lie in (0, 1]")
        if self.codec not in ("relative", "exact"):
            raise ValueError(f"unknown codec {self.codec!r}")
        if self.state_q_cap < 1:
            raise ValueError("state_q_cap must be >= 1")
        if not (0.0 < self.pop_decay < 1.0):
            raise ValueError("pop_decay must lie in (0, 1)")
        if not (0.0 <= self.redundancy_discount <= 1.0):
            raise ValueError("redundancy_discount must lie in [0, 1]")
        if self.neighbor_demand_weight < 0.0:
            raise ValueError("neighbor_demand_weight must be >= 0")

    def epsilon(self, t: int) -> float:
        return max(self.eps_min, self.eps0 * self.eps_decay**t)

    def alpha(self, visits: int) -> float:
        return self.alpha0 / (1.0 + visits) ** self.omega


def enumerate_actions(phi, q, capacity: int, cap: int = 10**5) -> list[frozenset]:
    """All placement actions: subsets of cached+requested of the legal size.

    Deterministic lexicographic order over sorted content ids.  Raises
    ActionSpaceError when the count exceeds ``cap``; shrink the capacity or
    the per-step request cap in that case.
    """
    pool = sorted(set(phi) | set(q))
    m = min(capacity, len(pool))
    n_actions = math.comb(len(pool), m)
    if n_actions > cap:
        raise ActionSpaceError(
            f"C({len(pool)}, {m}) = {n_actions} actions exceeds cap {cap}; "
            "reduce capacity or the per-step request cap")
    return [frozenset(c) for c in combinations(pool, m)]


class NeighborActionCounts:
    """Observation counts of neighbor joint actions, per joint-state part.

    Stored as state -> [total, {neighbor_action: count}] so one state lookup
    serves a whole step.
    """

    def __init__(self):
        self._by_state: dict = {}

    def increment(self, state_key, action_key, n: int = 1):
        entry = self._by_state.get(state_key)
        if entry is None:
            entry = [0, {}]
            self._by_state[state_key] = entry
        entry[0] += n
        per = entry[1]
        per[action_key] = per.get(action_key, 0) + n

    def entry(self, state_key):
        return self._by_state.get(state_key)

    def support(self, state_key) -> dict:
        entry = self._by_state.get(state_key)
        return entry[1] if entry else {}

    def total(self, state_key) -> int:
        entry = self._by_state.get(state_key)
        return entry[0] if entry else 0

    def prob(self, state_key, action_key, prior_support: int | None = None) -> float:
        """Empirical probability of a neighbor joint action in a state.

        Unseen states fall back to a uniform prior over the currently
        enumerable neighbor joint actions, whose count the caller supplies.
        """
        entry = self._by_state.get(state_key)
        if entry is None or entry[0] == 0:
            if not prior_support:
                raise ValueError("unseen state: prior support size required")
            return 1.0 / prior_support
        return entry[1].get(action_key, 0) / entry[0]

    def state_dict(self):
        return {"counts": {k: dict(v[1]) for k, v in self._by_state.items()}}

    def load_state_dict(self, state):
        self._by_state = {
            k: [sum(v.values()), dict(v)] for k, v in state["counts"].items()
        }


def best_response_value(qtable: dict, counts: NeighborActionCounts, state_key,
                        own_actions) -> float:
    """Max over own actions of the count-weighted expected Q against neighbors.

    ``qtable`` maps state_key -> {(own_action, neighbor_action): q}.  The sum
    runs over neighbor actions actually observed for this state.  For a
    never-visited state every Q entry under it is still at the default 0
    (entries are only written after a visit), so the uniform-prior expectation
    is exactly 0 and we can return it without enumerating the prior support.
    """
    entry = counts.entry(state_key)
    own_actions = list(own_actions)
    if entry is None or not own_actions:
        return 0.0
    q_state = qtable.get(state_key)
    if not q_state:
        return 0.0
    total, support = entry
    best = -math.inf
    for a in own_actions:
        acc = 0.0
        for a_n, f in support.items():
            q = q_state.get((a, a_n))
            if q is not None:
                acc += q * f
        best = max(best, acc / total)
    return best


def q_update(q_old: float, reward: float, next_value: float, alpha: float,
             gamma: float) -> float:
    """One tabular update: (1-alpha)*old + alpha*(reward + gamma*next_value)."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    if not (math.isfinite(q_old) and math.isfinite(reward) and math.isfinite(next_value)):
        raise ValueError("non-finite input to q_update")
    return (1.0 - alpha) * q_old + alpha * (reward + gamma * next_value)


class Draws:
    """Per-(agent, step) source of the decision randomness slots.

    Hashes (seed, stream, step) once; each slot costs one more mixing round.
    Draw values equal ``rng.uniform``/``rng.rand_below`` with the same key.
    """

    __slots__ = ("_h",)

    def __init__(self, seed: int, stream: int, step: int):
        h = splitmix64(seed & _MASK64)
        h = splitmix64(h ^ (stream & _MASK64))
        self._h = splitmix64(h ^ (step & _MASK64))

    def uniform(self, slot: int) -> float:
        return (splitmix64(self._h ^ slot) >> 11) * (1.0 / (1 << 53))

    def below(self, n: int, slot: int) -> int:
        return splitmix64(self._h ^ slot) % n


def select_action(qtable: dict, counts: NeighborActionCounts, state_key,
                  menu: list, epsilon: float, draws: Draws) -> int:
    """Epsilon-greedy index into the action menu.

    With probability epsilon a uniformly random action; otherwise the argmax
    of the count-weighted expected Q, ties broken uniformly at random.
    ``menu`` holds (action_label, realized_action) pairs.
    """
    if not menu:
        raise ValueError("no legal action")
    if len(menu) == 1:
        return 0
    if epsilon > 0.0 and draws.uniform(SLOT_EXPLORE) < epsilon:
        return draws.below(len(menu), SLOT_UNIFORM_ACTION)
    entry = counts.entry(state_key)
    q_state = qtable.get(state_key) if entry is not None else None
    best_score = -math.inf
    best_idx: list[int] = []
    for idx, (label, _action) in enumerate(menu):
        acc = 0.0
        if q_state:
            total, support = entry
            for a_n, f in support.items():
                q = q_state.get((label, a_n))
                if q is not None:
                    acc += q * f
            acc /= total
        if acc > best_score:
            best_score = acc
            best_idx = [idx]
        elif acc == best_score:
            best_idx.append(idx)
    if len(best_idx) == 1:
        return best_idx[0]
    return best_idx[draws.below(len(best_idx), SLOT_TIEBREAK)]


class PopularityEstimator:
    """Per-cache exponentially decayed request counts.

    Values are stored in epoch-start units and rescaled every EPOCH steps, so
    both reads and bumps are table lookups instead of exp() calls.  Within one
    step all stored values share the same scale, which is all the codec needs
    for ranking; ``value`` applies the scale for absolute reads.
    """

    EPOCH = 1024
    PRUNE_BELOW = 1e-4

    def __init__(self, decay: float):
        self.decay = decay
        self.epoch_start = 0
        self.values: dict[int, float] = {}
        self._pow = [decay**d for d in range(self.EPOCH + 1)]
        self._inv_pow = [decay**-d for d in range(self.EPOCH + 1)]

    def _roll(self, t: int):
        while t - self.epoch_start >= self.EPOCH:
            shrink = self._pow[self.EPOCH]
            floor = self.PRUNE_BELOW
            self.values = {
                c: v * shrink for c, v in self.values.items() if v * shrink >= floor
            }
            self.epoch_start += self.EPOCH

    def ingest(self, t: int, requests, weight: float = 1.0):
        self._roll(t)
        bump = self._inv_pow[t - self.epoch_start] * weight
        values = self.values
        for c in requests:
            values[c] = values.get(c, 0.0) + bump

    def raw(self, c: int) -> float:
        """Epoch-unit value; valid for comparisons within the current step."""
        return self.values.get(c, 0.0)

    def value(self, c: int, t: int) -> float:
        self._roll(t)
        return self.values.get(c, 0.0) * self._pow[t - self.epoch_start]

    def state_dict(self):
        return {"decay": self.decay, "values": dict(self.values),
                "epoch_start": self.epoch_start}

    def load_state_dict(self, state):
        self.decay = state["decay"]
        self._pow = [self.decay**d for d in range(self.EPOCH + 1)]
        self._inv_pow = [self.decay**-d for d in range(self.EPOCH + 1)]
        self.values = {int(k): float(v) for k, v in state["values"].items()}
        self.epoch_start = state["epoch_start"]


@dataclass(slots=True)
class DecisionContext:
    state_key: tuple
    menu: list  # (label, payload) pairs; realize(payload) yields the action set
    marker: int | None  # content id that neighbor-action labels refer to
    realize: object  # callable payload -> frozenset


def _cap_requests(requests, cap: int) -> list[int]:
    """Distinct requested ids, most frequent first (ties by id), capped."""
    if not requests:
        return []
    freq: dict[int, int] = {}
    for c in requests:
        freq[c] = freq.get(c, 0) + 1
    distinct = sorted(freq, key=lambda c: (-freq[c], c))
    return distinct[:cap]


def _top_up(action: set, required: int, requests, freq_order) -> frozenset:
    """Extend an action to the required size from the remaining requested ids."""
    if len(action) >= required:
        return frozenset(action)
    extra = [c for c in freq_order if c not in action]
    for c in extra:
        action.add(c)
        if len(action) == required:
            break
    return frozenset(action)


class ExactCodec:
    """Literal joint keys: sorted content-id tuples for states and actions."""

    def __init__(self, cfg: LearnerConfig):
        self.cfg = cfg

    def context(self, view: AgentView, use_neighbors: bool) -> DecisionContext:
        q_ids = _cap_requests(view.requests, self.cfg.state_q_cap)
        own_state = (tuple(sorted(view.contents)), tuple(sorted(q_ids)))
        if use_neighbors:
            nbr_state = tuple(
                (tuple(sorted(view.neighbor_contents[k])),
                 tuple(sorted(_cap_requests(view.neighbor_requests[k], self.cfg.state_q_cap))))
                for k in range(len(view.neighbor_ids)))
        else:
            nbr_state = ()
        state_key = (own_state, nbr_state)
        full_pool = view.contents.union(view.requests)
        required = min(view.capacity, len(full_pool))
        actions = enumerate_actions(view.contents, q_ids, view.capacity, self.cfg.action_cap)
        freq_order = _cap_requests(view.requests, len(full_pool))
        menu = []
        seen = set()
        for a in actions:
            realized = _top_up(set(a), required, view.requests, freq_order)
            label = tuple(sorted(realized))
            if label not in seen:
                seen.add(label)
                menu.append((label, realized))
        return DecisionContext(state_key=state_key, menu=menu, marker=None,
                               realize=_identity)

    def neighbor_action_label(self, marker, prev_neighbor_actions) -> tuple:
        return tuple(tuple(sorted(a)) for a in prev_neighbor_actions)


def _identity(payload):
    return payload


class RelativeCodec:
    """Popularity-relative keys that generalize across content ids.

    Own state: (count of newly requested contents, how the best newcomer's
    decayed popularity ranks against the cached set, whether the cache has
    free space).  Neighbor state: (how many usable neighbors hold the best
    newcomer, how many also requested it).  Own actions: admit the top k
    newcomers beyond the forced fill, evicting the least valuable incumbents.
    Neighbor action label: how many neighbors' executed placements kept the
    newcomer this agent keyed on.
    """

    BUCKET_NONE = 0
    BUCKET_FREE = 1
    BUCKET_BELOW = 2
    BUCKET_LOW = 3
    BUCKET_MID = 4
    BUCKET_HIGH = 5

    def __init__(self, cfg: LearnerConfig, estimator: PopularityEstimator,
                 redundancy_aware: bool):
        self.cfg = cfg
        self.estimator = estimator
        self.redundancy_aware = redundancy_aware

    def context(self, view: AgentView, use_neighbors: bool) -> DecisionContext:
        est = self.estimator
        est.ingest(view.t, view.requests)
        if self.redundancy_aware:
            w = self.cfg.neighbor_demand_weight
            if w > 0.0:
                for q in view.neighbor_requests:
                    if q:
                        est.ingest(view.t, q, w)
        raw = est.values
        contents = view.contents
        requests = view.requests
        if not requests:
            new_sorted = []
        elif len(requests) == 1:
            c = requests[0]
            new_sorted = [] if c in contents else [c]
        else:
            new_ids = [c for c in _cap_requests(requests, self.cfg.state_q_cap)
                       if c not in contents]
            if self.redundancy_aware and len(new_ids) > 1 and view.neighbor_contents:
                # Bursts admit in coverage-aware order: a newcomer a neighbor
                # already holds is reachable over the link, so the uncovered
                # one gets the slot first.
                disc = self.cfg.redundancy_discount

                def admit_key(c):
                    v = raw.get(c, 0.0)
                    for phi in view.neighbor_contents:
                        if c in phi:
                            return (-v * disc, c)
                    return (-v, c)

                new_ids.sort(key=admit_key)
            else:
                new_ids.sort(key=lambda c: (-raw.get(c, 0.0), c))
            new_sorted = new_ids
        free = view.capacity - len(contents)
        marker = new_sorted[0] if new_sorted else None

        if marker is None:
            bucket = self.BUCKET_NONE
        elif free > 0:
            bucket = self.BUCKET_FREE
        else:
            phi_vals = [raw.get(c, 0.0) for c in contents]
            phi_vals.sort()
            v = raw.get(marker, 0.0)
            n = len(phi_vals)
            if v < phi_vals[0]:
                bucket = self.BUCKET_BELOW
            elif v >= phi_vals[(2 * n) // 3]:
                bucket = self.BUCKET_HIGH
            elif v >= phi_vals[n // 3]:
                bucket = self.BUCKET_MID
            else:
                bucket = self.BUCKET_LOW

        if use_neighbors and marker is not None:
            cover = 0
            for phi in view.neighbor_contents:
                if marker in phi:
                    cover += 1
            cover = 2 if cover > 2 else cover
            # Co-request descriptor: 0 none, 1 some but this agent has the
            # lowest id among co-requesters, 2 a lower-id neighbor also wants
            # it.  The id comparison gives learnable, deterministic symmetry
            # breaking when a whole group requests the same content at once.
            coreq = 0
            me = view.cache_id
            for j, q in zip(view.neighbor_ids, view.neighbor_requests):
                if marker in q:
                    coreq = 2 if j < me else max(coreq, 1)
                    if coreq == 2:
                        break
        else:
            cover = coreq = 0
        # Flat layout of ([own state], [neighbor states]): counts of newcomers,
        # rank bucket of the best newcomer, free space, neighbor coverage.
        state_key = (min(len(new_sorted), 2), bucket, 1 if free > 0 else 0,
                     cover, coreq)
        menu, realize = self._menu(view, new_sorted, free, raw)
        return DecisionContext(state_key=state_key, menu=menu, marker=marker,
                               realize=realize)

    def _evict_victims(self, view: AgentView, raw: dict, n: int) -> list[int]:
        """The n least-valuable cached contents, least valuable first.

        A content already held by a lower-id usable neighbor is discounted:
        that neighbor keeps its copy (it applies no discount), this agent
        yields.  The asymmetry gives stable de-duplication instead of the
        oscillation a symmetric rule produces when every holder evicts the
        same duplicate simultaneously.
        """
        contents = view.contents
        covered = None
        if self.redundancy_aware and view.neighbor_contents:
            me = view.cache_id
            for j, phi in zip(view.neighbor_ids, view.neighbor_contents):
                if j < me:
                    overlap = contents & phi
                    if overlap:
                        covered = overlap if covered is None else covered | overlap
        if covered:
            disc = self.cfg.redundancy_discount
            key = lambda c: (raw.get(c, 0.0) * disc if c in covered
                             else raw.get(c, 0.0), c)
        else:
            key = lambda c: (raw.get(c, 0.0), c)
        if n == 1:
            return [min(contents, key=key)]
        return heapq.nsmallest(n, contents, key=key)

    def _menu(self, view: AgentView, new_sorted, free, raw):
        contents = view.contents
        requests = view.requests
        if len(requests) == 1 and not new_sorted:
            return [(0, frozenset(contents))], _identity
        full_pool = contents.union(requests)
        required = min(view.capacity, len(full_pool))
        if len(full_pool) <= view.capacity:
            return [(0, frozenset(full_pool))], _identity
        # Forced admissions fill the free space; the learnable choice is how
        # many newcomers to admit beyond that, evicting the weakest incumbents.
        # Extra admissions are capped by the evictable incumbents.
        forced = min(free, len(new_sorted))
        max_extra = min(len(new_sorted) - forced, len(contents))
        extras = sorted({o for o in (0, 1, 2, max_extra) if 0 <= o <= max_extra})
        victims = self._evict_victims(view, raw, extras[-1]) if extras[-1] else []
        # When the state cap hid some requested ids the pool may fall short of
        # the required size; top up from the full request order.
        fallback = (
            _cap_requests(requests, len(full_pool))
            if len(contents) + forced < required else new_sorted)

        def realize(o: int) -> frozenset:
            keep = set(contents)
            for victim in victims[:o]:
                keep.discard(victim)
            keep.update(new_sorted[: forced + o])
            return _top_up(keep, required, requests, fallback)

        # Distinct admit counts always realize distinct sets (victims come
        # from the cache, admissions from outside it), so labels need no
        # realized-set deduplication.
        menu = [(o if o <= 2 else 3, o) for o in extras]
        return menu, realize

    def neighbor_action_label(self, marker, prev_neighbor_actions) -> int:
        if marker is None:
            return 0
        return min(2, sum(1 for a in prev_neighbor_actions if marker in a))


class JointQLearner(Policy):
    """One agent's learner; IQL is the same machinery with an empty scope."""

    def __init__(self, cfg: LearnerConfig, capacity: int, seed: int, stream_id: int,
                 use_neighbors: bool):
        cfg.validate()
        self.cfg = cfg
        self.capacity = capacity
        self.seed = seed
        self.stream = (STREAM_POLICY << 32) | stream_id
        self.use_neighbors = use_neighbors
        self.q: dict = {}
        self.visits: dict = {}
        self.counts = NeighborActionCounts()
        self.estimator = PopularityEstimator(cfg.pop_decay)
        if cfg.codec == "exact":
            self.codec = ExactCodec(cfg)
        else:
            self.codec = RelativeCodec(cfg, self.estimator, redundancy_aware=use_neighbors)
        self.pending = None  # (state_key, action_label, reward) awaiting the successor
        self._ctx: DecisionContext | None = None

    def observe(self, view: AgentView):
        ctx = self.codec.context(view, self.use_neighbors)
        if self.pending is not None and view.prev_neighbor_actions is None:
            # Restored from a checkpoint into a fresh run: the executed
            # neighbor actions that would complete this pair are gone.
            self.pending = None
        if self.pending is not None:
            prev_state, prev_label, prev_reward, prev_marker = self.pending
            a_n = self.codec.neighbor_action_label(
                prev_marker,
                view.prev_neighbor_actions if self.use_neighbors else [])
            self.counts.increment(prev_state, a_n)
            next_value = best_response_value(
                self.q, self.counts, ctx.state_key, [label for label, _ in ctx.menu])
            inner = (prev_label, a_n)
            q_state = self.q.get(prev_state)
            if q_state is None:
                q_state = {}
                self.q[prev_state] = q_state
            key = (prev_state, prev_label, a_n)
            visits = self.visits.get(key, 0)
            q_state[inner] = q_update(
                q_state.get(inner, 0.0), prev_reward, next_value,
                self.cfg.alpha(visits), self.cfg.gamma)
            self.visits[key] = visits + 1
        self._ctx = ctx

    def decide(self, view: AgentView) -> frozenset:
        ctx = self._ctx
        if ctx is None:
            raise RuntimeError("decide() called before observe()")
        draws = Draws(self.seed, self.stream, view.t)
        idx = select_action(
            self.q, self.counts, ctx.state_key, ctx.menu,
            self.cfg.epsilon(view.t), draws)
        label, payload = ctx.menu[idx]
        self.pending = (ctx.state_key, label, view.reward, ctx.marker)
        self._ctx = None
        return ctx.realize(payload)

    def greedy_action(self, view: AgentView) -> frozenset:
        """Greedy readout: the learned action with exploration switched off."""
        ctx = self.codec.context(view, self.use_neighbors)
        idx = select_action(self.q, self.counts, ctx.state_key, ctx.menu, 0.0,
                            Draws(self.seed, self.stream, view.t))
        return ctx.realize(ctx.menu[idx][1])

    def state_dict(self):
        return {
            "q": {state: dict(inner) for state, inner in self.q.items()},
            "visits": dict(self.visits),
            "counts": self.counts.state_dict(),
            "estimator": self.estimator.state_dict(),
            "pending": self.pending,
            "use_neighbors": self.use_neighbors,
            "codec": self.cfg.codec,
        }

    def load_state_dict(self, state):
        if state["codec"] != self.cfg.codec or state["use_neighbors"] != self.use_neighbors:
            raise ValueError("checkpoint does not match learner configuration")
        self.q = {s: dict(inner) for s, inner in state["q"].items()}
        self.visits = dict(state["visits"])
        self.counts.load_state_dict(state["counts"])
        self.estimator.load_state_dict(state["estimator"])
        self.pending = state["pending"]

    def top_entries(self, k: int = 100) -> list[tuple]:
        """Largest |Q| entries as (state_key, action_key, q, visits) rows."""
        flat = [
            (state, inner_key, q)
            for state, inner in self.q.items()
            for inner_key, q in inner.items()
        ]
        flat.sort(key=lambda kv: -abs(kv[2]))
        return [
            (state, inner_key, q,
             self.visits.get((state, inner_key[0], inner_key[1]), 0))
            for state, inner_key, q in flat[:k]
        ]


def build_learners(name: str, topo, seed: int, params: dict, stream_ids) -> list[JointQLearner]:
    cfg_fields = {f for f in LearnerConfig.__dataclass_fields__}
    cfg = LearnerConfig(**{k: v for k, v in params.items() if k in cfg_fields})
    unknown = set(params) - cfg_fields
    if unknown:
        raise ValueError(f"unknown learner parameters: {sorted(unknown)}")
    use_neighbors = name == "comcache"
    return [
        JointQLearner(cfg, topo.capacities[i], seed, stream_ids[i], use_neighbors)
        for i in range(topo.node_count)
    ]
