import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comcache.engine import AgentView, RewardWeights, Simulation
from comcache.marl import (
    ActionSpaceError,
    Draws,
    JointQLearner,
    LearnerConfig,
    NeighborActionCounts,
    PopularityEstimator,
    best_response_value,
    enumerate_actions,
    q_update,
    select_action,
)
from comcache.policies import build_policies
from comcache.topology import build, build_grid
from comcache.workload import WorkloadSpec, build_irm_trace


class TestEnumerateActions:
    def test_choose_two_of_three(self):
        actions = enumerate_actions({1, 2}, {3}, 2)
        assert actions == [frozenset(s) for s in ({1, 2}, {1, 3}, {2, 3})]

    def test_undersized_pool_single_action(self):
        assert enumerate_actions({1}, {2}, 5) == [frozenset({1, 2})]

    def test_six_choose_three_lexicographic(self):
        actions = enumerate_actions({0, 1, 2}, {3, 4, 5}, 3)
        # Brute-force oracle.
        expected = [frozenset(c) for c in itertools.combinations(range(6), 3)]
        assert len(actions) == math.comb(6, 3) == 20
        assert actions == expected

    def test_explosion_guard(self):
        with pytest.raises(ActionSpaceError):
            enumerate_actions(set(range(30)), set(range(30, 45)), 20, cap=10**5)

    @given(
        phi=st.sets(st.integers(0, 30), max_size=6),
        q=st.sets(st.integers(0, 30), max_size=4),
        m=st.integers(1, 8),
    )
    @settings(max_examples=80, deadline=None)
    def test_all_actions_legal_and_complete(self, phi, q, m):
        actions = enumerate_actions(phi, q, m)
        pool = phi | q
        want = min(m, len(pool))
        assert len(actions) == math.comb(len(pool), want)
        for a in actions:
            assert a <= pool
            assert len(a) == want


class TestNeighborActionProb:
    def test_single_observation(self):
        counts = NeighborActionCounts()
        counts.increment("s", "x")
        assert counts.prob("s", "x") == 1.0

    def test_three_to_one(self):
        counts = NeighborActionCounts()
        counts.increment("s", "x", 3)
        counts.increment("s", "y", 1)
        assert counts.prob("s", "x") == pytest.approx(0.75, abs=1e-12)
        assert counts.prob("s", "y") == pytest.approx(0.25, abs=1e-12)

    def test_unseen_state_uniform_prior(self):
        counts = NeighborActionCounts()
        assert counts.prob("fresh", "whatever", prior_support=4) == pytest.approx(0.25)
        with pytest.raises(ValueError):
            counts.prob("fresh", "whatever")

    @given(st.lists(st.tuples(st.integers(0, 5), st.integers(1, 9)), min_size=1))
    @settings(max_examples=50, deadline=None)
    def test_probabilities_sum_to_one(self, events):
        counts = NeighborActionCounts()
        for action, n in events:
            counts.increment("s", action, n)
        total = sum(counts.prob("s", a) for a in counts.support("s"))
        assert abs(total - 1.0) <= 1e-12


class TestBestResponseValue:
    def test_empty_table_zero(self):
        counts = NeighborActionCounts()
        assert best_response_value({}, counts, "s", ["a1", "a2"]) == 0.0

    def test_singleton(self):
        counts = NeighborActionCounts()
        counts.increment("s", "x")
        q = {"s": {("a1", "x"): 2.0}}
        assert best_response_value(q, counts, "s", ["a1"]) == pytest.approx(2.0)

    def test_worked_two_action_example(self):
        # Q rows a1: {x: 1.0, y: 3.0}, a2: {x: 2.0, y: 2.0}; P(x)=0.75, P(y)=0.25
        # -> expected values 1.5 vs 2.0, best response 2.0.
        counts = NeighborActionCounts()
        counts.increment("s", "x", 3)
        counts.increment("s", "y", 1)
        q = {"s": {("a1", "x"): 1.0, ("a1", "y"): 3.0,
                   ("a2", "x"): 2.0, ("a2", "y"): 2.0}}
        value = best_response_value(q, counts, "s", ["a1", "a2"])
        assert value == pytest.approx(2.0, abs=1e-12)
        # Exhaustive oracle over own actions.
        oracle = max(
            q["s"][(a, "x")] * 0.75 + q["s"][(a, "y")] * 0.25 for a in ("a1", "a2"))
        assert value == pytest.approx(oracle, abs=1e-12)

    def test_dominates_each_action_and_bounded_by_max(self):
        counts = NeighborActionCounts()
        counts.increment("s", "x", 2)
        counts.increment("s", "y", 5)
        q = {"s": {(a, an): float((hash((a, an)) % 17) - 8)
                   for a in "abc" for an in "xy"}}
        total = counts.total("s")
        value = best_response_value(q, counts, "s", list("abc"))
        for a in "abc":
            expect = sum(q["s"][(a, an)] * f for an, f in counts.support("s").items()) / total
        # The max dominates every individual action's expectation...
            assert value >= expect - 1e-12
        # ...and never exceeds the unrestricted maximum entry.
        assert value <= max(q["s"].values()) + 1e-12


class TestQUpdate:
    def test_worked_example(self):
        assert q_update(0.0, 1.0, 0.0, alpha=0.5, gamma=0.9) == pytest.approx(0.5, abs=1e-12)

    def test_full_overwrite_at_alpha_one(self):
        assert q_update(5.0, 1.0, 2.0, alpha=1.0, gamma=0.9) == pytest.approx(
            1.0 + 0.9 * 2.0, abs=1e-12)

    def test_fixed_point_geometric_series(self):
        # Iterating with constant reward and next_value = current Q converges
        # to r / (1 - gamma).
        r, gamma = 1.0, 0.9
        q = 0.0
        for _ in range(6000):
            q = q_update(q, r, q, alpha=0.3, gamma=gamma)
        assert q == pytest.approx(r / (1 - gamma), rel=1e-6)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            q_update(float("nan"), 0.0, 0.0, 0.5, 0.9)
        with pytest.raises(ValueError):
            q_update(0.0, float("inf"), 0.0, 0.5, 0.9)

    @given(st.lists(st.floats(-0.5, 1.5), min_size=1, max_size=300))
    @settings(max_examples=40, deadline=None)
    def test_bounded_by_reward_range(self, rewards):
        # Rewards within [-w_delay, w_hit + w_coop] keep |Q| below the
        # geometric bound at default weights.
        gamma = 0.9
        bound = 1.5 / (1 - gamma)
        q = 0.0
        values = [q]
        for i, r in enumerate(rewards):
            theta = max(values)  # any reachable best-response value
            q = q_update(q, r, theta, alpha=0.5 / (1 + i) ** 0.85, gamma=gamma)
            values.append(q)
            assert abs(q) <= bound + 1e-9


class FakeDraws:
    def __init__(self, u=0.99, pick=0):
        self.u = u
        self.pick = pick

    def uniform(self, slot):
        return self.u

    def below(self, n, slot):
        return self.pick % n


class TestSelectAction:
    def setup_method(self):
        self.counts = NeighborActionCounts()
        self.counts.increment("s", "x", 3)
        self.counts.increment("s", "y", 1)
        self.q = {"s": {("a1", "x"): 1.0, ("a1", "y"): 3.0,
                        ("a2", "x"): 2.0, ("a2", "y"): 2.0}}
        self.menu = [("a1", frozenset({1})), ("a2", frozenset({2}))]

    def test_greedy_picks_best_expected_value(self):
        idx = select_action(self.q, self.counts, "s", self.menu, 0.0, FakeDraws())
        assert self.menu[idx][0] == "a2"

    def test_pure_exploration_uniform(self):
        counts = {}
        for pick in range(7):
            idx = select_action(self.q, self.counts, "s", self.menu, 1.0,
                                FakeDraws(u=0.0, pick=pick))
            counts[idx] = counts.get(idx, 0) + 1
        assert set(counts) == {0, 1}

    def test_cold_start_random_tie_break(self):
        counts = NeighborActionCounts()
        seen = set()
        for pick in range(5):
            idx = select_action({}, counts, "fresh", self.menu, 0.0,
                                FakeDraws(pick=pick))
            seen.add(idx)
        assert seen == {0, 1}

    def test_single_action_needs_no_draws(self):
        class Boom:
            def uniform(self, slot):
                raise AssertionError("should not draw")

            def below(self, n, slot):
                raise AssertionError("should not draw")

        idx = select_action({}, NeighborActionCounts(), "s",
                            [("only", frozenset())], 1.0, Boom())
        assert idx == 0

    def test_empty_menu_rejected(self):
        with pytest.raises(ValueError):
            select_action({}, NeighborActionCounts(), "s", [], 0.0, FakeDraws())


class TestDraws:
    def test_matches_stateless_functions(self):
        from comcache.rng import rand_below, uniform

        d = Draws(seed=42, stream=7, step=1000)
        assert d.uniform(0) == uniform(42, 7, 1000, 0)
        assert d.below(13, 1) == rand_below(13, 42, 7, 1000, 1)

    def test_slots_independent(self):
        d = Draws(seed=1, stream=2, step=3)
        assert d.uniform(0) != d.uniform(1)


class TestLearnerConfig:
    def test_defaults_valid(self):
        LearnerConfig().validate()

    def test_epsilon_schedule(self):
        cfg = LearnerConfig(eps0=0.2, eps_decay=1 - 1e-5, eps_min=0.01)
        assert cfg.epsilon(0) == pytest.approx(0.2)
        assert cfg.epsilon(10**7) == pytest.approx(0.01)
        assert 0 < cfg.epsilon(200_000) <= 0.2

    def test_alpha_schedule_decreases_to_zero(self):
        cfg = LearnerConfig()
        assert cfg.alpha(0) == pytest.approx(0.5)
        values = [cfg.alpha(v) for v in (0, 1, 10, 100, 10**6)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-4

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            LearnerConfig(gamma=1.0).validate()
        with pytest.raises(ValueError):
            LearnerConfig(omega=0.5).validate()
        with pytest.raises(ValueError):
            LearnerConfig(codec="magic").validate()


class TestPopularityEstimator:
    def test_decay_matches_closed_form(self):
        est = PopularityEstimator(0.99)
        est.ingest(0, [7])
        assert est.value(7, 0) == pytest.approx(1.0)
        assert est.value(7, 100) == pytest.approx(0.99**100, rel=1e-9)

    def test_accumulates_across_epochs(self):
        est = PopularityEstimator(0.99)
        est.ingest(0, [1])
        est.ingest(5000, [1])
        assert est.value(1, 5000) == pytest.approx(1.0 + 0.99**5000, rel=1e-9)

    def test_prunes_stale_entries(self):
        est = PopularityEstimator(0.9)
        est.ingest(0, list(range(50)))
        est.ingest(4000, [99])
        assert 99 in est.values
        assert 0 not in est.values


def make_view(t, contents, requests, capacity=2, nbr_contents=(), nbr_requests=(),
              prev_actions=None):
    nbr_contents = [set(x) for x in nbr_contents]
    return AgentView(
        t=t, cache_id=0, capacity=capacity, contents=set(contents),
        requests=list(requests), reward=0.0,
        neighbor_ids=tuple(range(len(nbr_contents))),
        neighbor_contents=nbr_contents,
        neighbor_requests=[list(x) for x in nbr_requests] or [[] for _ in nbr_contents],
        prev_neighbor_actions=prev_actions,
    )


class TestRelativeCodecMenus:
    def make(self, use_neighbors=True):
        cfg = LearnerConfig()
        learner = JointQLearner(cfg, capacity=2, seed=0, stream_id=0,
                                use_neighbors=use_neighbors)
        return learner

    def test_forced_action_when_everything_fits(self):
        learner = self.make()
        ctx = learner.codec.context(make_view(0, {1}, [1]), True)
        assert len(ctx.menu) == 1
        assert ctx.realize(ctx.menu[0][1]) == frozenset({1})

    def test_admit_or_reject_menu(self):
        learner = self.make()
        view = make_view(0, {1, 2}, [3])
        ctx = learner.codec.context(view, True)
        realized = {ctx.realize(p) for _, p in ctx.menu}
        assert frozenset({1, 2}) in realized  # reject
        assert len(realized) == 2
        admit = next(a for a in realized if 3 in a)
        assert len(admit) == 2 and 3 in admit

    def test_actions_always_legal(self):
        learner = self.make()
        for t, (phi, reqs) in enumerate([
            (set(), [5]), ({5}, [5, 6]), ({5, 6}, [7, 8, 9]), ({5, 6}, []),
        ]):
            view = make_view(t + 1, phi, reqs)
            ctx = learner.codec.context(view, True)
            pool = phi | set(reqs)
            want = min(2, len(pool))
            for _, payload in ctx.menu:
                action = ctx.realize(payload)
                assert action <= pool
                assert len(action) == want

    def test_neighbor_action_label_counts_marker_keeps(self):
        learner = self.make()
        codec = learner.codec
        acts = [frozenset({3, 4}), frozenset({5}), frozenset({3})]
        assert codec.neighbor_action_label(3, acts) == 2
        assert codec.neighbor_action_label(9, acts) == 0
        assert codec.neighbor_action_label(None, acts) == 0


class TestScopingCollapse:
    def test_isolated_comcache_matches_iql_trajectory(self):
        # With zero-bandwidth links the usable neighbor set is empty and the
        # joint learner must reproduce independent Q-learning bit for bit.
        topo = build_grid(2, 2, 3, 0, 0.2)
        spec = WorkloadSpec(library_size=30)
        trace = build_irm_trace(spec, 4, seed=2, horizon=600)

        def run(name, w_coop):
            policies = build_policies(name, topo, seed=9)
            sim = Simulation(topo, policies, RewardWeights(w_coop=w_coop), trace,
                             record_steps=True)
            sim.run()
            return [(r.counters, r.rewards, r.actions) for r in sim.records]

        # w_coop is irrelevant without neighbor traffic: rewards coincide.
        assert run("comcache", 0.5) == run("iql", 0.0)

    def test_exact_codec_collapse(self):
        topo = build([3, 3], [(0, 1, 0, 0.2)])
        spec = WorkloadSpec(library_size=6)
        trace = build_irm_trace(spec, 2, seed=4, horizon=400)

        def run(name):
            policies = build_policies(name, topo, seed=1, params={"codec": "exact"})
            sim = Simulation(topo, policies, RewardWeights(w_coop=0.0), trace,
                             record_steps=True)
            sim.run()
            return [(r.counters, r.rewards, r.actions) for r in sim.records]

        assert run("comcache") == run("iql")


class TestExactCodecKeys:
    def test_round_trip_and_injectivity(self):
        cfg = LearnerConfig(codec="exact")
        learner = JointQLearner(cfg, capacity=3, seed=0, stream_id=0,
                                use_neighbors=True)
        seen = {}
        import random

        rnd = random.Random(7)
        for t in range(300):
            phi = set(rnd.sample(range(12), rnd.randint(0, 3)))
            q = [rnd.randrange(12) for _ in range(rnd.randint(0, 3))]
            nbr_phi = [set(rnd.sample(range(12), rnd.randint(0, 2)))]
            nbr_q = [[rnd.randrange(12) for _ in range(rnd.randint(0, 2))]]
            view = make_view(t, phi, q, capacity=3, nbr_contents=nbr_phi,
                             nbr_requests=nbr_q)
            ctx = learner.codec.context(view, True)
            own, nbrs = ctx.state_key
            # Decoding the key recovers the exact sets.
            assert set(own[0]) == phi
            assert set(own[1]) == set(q)
            assert set(nbrs[0][0]) == nbr_phi[0]
            assert set(nbrs[0][1]) == set(nbr_q[0])
            fingerprint = (frozenset(phi), frozenset(q), frozenset(nbr_phi[0]),
                           frozenset(nbr_q[0]))
            if ctx.state_key in seen:
                assert seen[ctx.state_key] == fingerprint
            seen[ctx.state_key] = fingerprint


class TestLearnerBookkeeping:
    def test_visit_counts_match_observations(self):
        topo = build_grid(2, 2, 3, 1, 0.2)
        spec = WorkloadSpec(library_size=25)
        trace = build_irm_trace(spec, 4, seed=3, horizon=500)
        policies = build_policies("comcache", topo, seed=0)
        sim = Simulation(topo, policies, RewardWeights(), trace)
        sim.run()
        learner = policies[0]
        # Per-state neighbor-action counts equal the number of updates whose
        # old state part equals that state.
        for state, entry in learner.counts._by_state.items():
            total, support = entry
            assert total == sum(support.values())
            visited = sum(
                learner.visits.get((state, inner[0], inner[1]), 0)
                for inner in learner.q.get(state, {}))
            assert visited == total

    def test_checkpoint_roundtrip_resumes_identically(self):
        topo = build_grid(2, 2, 3, 1, 0.2)
        spec = WorkloadSpec(library_size=25)
        trace = build_irm_trace(spec, 4, seed=3, horizon=400)

        policies = build_policies("comcache", topo, seed=0)
        sim = Simulation(topo, policies, RewardWeights(), trace, record_steps=True)
        sim.run()
        full_records = [(r.counters, r.actions) for r in sim.records]

        # Run half, snapshot everything, restore into fresh learners, continue
        # at the same absolute steps: the tail must match the straight run.
        p1 = build_policies("comcache", topo, seed=0)
        sim1 = Simulation(topo, p1, RewardWeights(), trace)
        for t in range(200):
            sim1.step(t)
        states = [p.state_dict() for p in p1]

        p2 = build_policies("comcache", topo, seed=0)
        for p, s in zip(p2, states):
            p.load_state_dict(s)
        sim2 = Simulation(topo, p2, RewardWeights(), trace, record_steps=True)
        for c2, c1 in zip(sim2.caches, sim1.caches):
            c2.contents = set(c1.contents)
        sim2.prev_actions = sim1.prev_actions
        for t in range(200, 400):
            sim2.step(t)
        resumed = [(r.counters, r.actions) for r in sim2.records]
        assert resumed == full_records[200:]
