import pytest

from comcache.config import ConfigError, canonical_json, config_from_dict, parse_config

MINIMAL = """
[topology]
rows = 4
cols = 4
capacity = 10

[workload]
library_size = 100

[run]
policies = ["lru"]
"""


class TestDefaults:
    def test_minimal_config_fills_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.workload.zipf_beta == 0.6
        assert cfg.topology.links[0].bandwidth == 1  # bw = capacity / 10
        assert cfg.seeds == [0]
        assert cfg.horizon == 200_000
        assert cfg.burn_in_fraction == 0.1
        assert cfg.policies[0].type == "lru"

    def test_capacity_defaults_to_ten_percent_of_library(self):
        cfg = parse_config("[workload]\nlibrary_size = 200\n")
        assert cfg.topology.capacities[0] == 20

    def test_iql_defaults_selfish(self):
        cfg = parse_config(MINIMAL.replace('["lru"]', '["iql", "comcache"]'))
        by_name = {p.name: p for p in cfg.policies}
        assert by_name["iql"].weights.w_coop == 0.0
        assert by_name["comcache"].weights.w_coop == 0.5


class TestValidation:
    def test_trivial_capacity_rejected(self):
        text = MINIMAL.replace("capacity = 10", "capacity = 100")
        with pytest.raises(ConfigError, match="trivial"):
            parse_config(text)

    def test_misspelled_key_hard_error(self):
        with pytest.raises(ConfigError, match="polcy"):
            parse_config(MINIMAL + "\n[polcy]\nx = 1\n")

    def test_misspelled_nested_key(self):
        with pytest.raises(ConfigError, match="snm.lifetime_mim"):
            parse_config(MINIMAL + "\n[workload.snm]\nlifetime_mim = 5.0\n")

    def test_unknown_workload_key(self):
        with pytest.raises(ConfigError, match="workload.zips"):
            parse_config("[workload]\nzips = 2\n")

    def test_parse_error_reports_position(self):
        with pytest.raises(ConfigError, match="line"):
            parse_config("[workload\nlibrary_size = 100\n")

    def test_unknown_policy_type(self):
        with pytest.raises(ConfigError, match="belady"):
            parse_config(MINIMAL + "\n[policy.lru]\ntype = \"belady\"\n")

    def test_policy_table_without_listing(self):
        with pytest.raises(ConfigError, match="run.policies"):
            parse_config(MINIMAL + "\n[policy.lfu]\nwindow = 10\n")

    def test_trace_model_needs_path(self):
        bad = MINIMAL.replace('library_size = 100',
                              'library_size = 100\nmodel = "trace"')
        with pytest.raises(ConfigError, match="trace_path"):
            parse_config(bad)

    def test_empty_seed_list_rejected(self):
        bad = MINIMAL.replace('policies = ["lru"]',
                              'policies = ["lru"]\nseeds = []')
        with pytest.raises(ConfigError, match="seeds"):
            parse_config(bad)

    def test_groups_must_cover_all_caches(self):
        bad = MINIMAL + '\n[workload.snm]\ngroups = [[0, 1]]\n'
        with pytest.raises(ConfigError, match="groups"):
            parse_config(bad)


class TestPolicyTables:
    def test_per_policy_overrides(self):
        text = MINIMAL.replace('["lru"]', '["lfu", "hot", "comcache"]') + """
[policy.lfu]
window = 500

[policy.hot]
type = "comcache"
w_coop = 1.0
pop_decay = 0.95

[policy.comcache]
eps0 = 0.1
"""
        cfg = parse_config(text)
        by_name = {p.name: p for p in cfg.policies}
        assert by_name["lfu"].window == 500
        assert by_name["hot"].type == "comcache"
        assert by_name["hot"].weights.w_coop == 1.0
        assert by_name["hot"].learner.pop_decay == 0.95
        assert by_name["comcache"].learner.eps0 == 0.1

    def test_reward_table_applies_to_all(self):
        text = MINIMAL.replace('["lru"]', '["comcache", "iql"]') + """
[reward]
w_delay = 0.25
"""
        cfg = parse_config(text)
        assert all(p.weights.w_delay == 0.25 for p in cfg.policies)


class TestResolved:
    def test_resolved_is_stable_and_hashable(self):
        a = parse_config(MINIMAL)
        b = parse_config(MINIMAL)
        assert canonical_json(a.resolved) == canonical_json(b.resolved)
        assert a.config_hash() == b.config_hash()

    def test_resolved_roundtrips_through_from_dict(self):
        cfg = parse_config(MINIMAL)
        again = config_from_dict(cfg.raw)
        assert again.config_hash() == cfg.config_hash()

    def test_hash_changes_with_content(self):
        a = parse_config(MINIMAL)
        b = parse_config(MINIMAL.replace("capacity = 10", "capacity = 20"))
        assert a.config_hash() != b.config_hash()


class TestExplicitTopology:
    def test_nodes_links_form(self):
        text = """
[topology]
nodes = [{id = 0, capacity = 3}, {id = 1, capacity = 5}]
links = [{a = 0, b = 1, bw = 2, cost = 0.3}]

[workload]
library_size = 50
"""
        cfg = parse_config(text)
        assert cfg.topology.capacities == (3, 5)
        assert cfg.topology.link(0, 1).bandwidth == 2

    def test_grid_and_explicit_conflict(self):
        text = """
[topology]
rows = 2
nodes = [{id = 0, capacity = 3}]
"""
        with pytest.raises(ConfigError, match="not both"):
            parse_config(text)
