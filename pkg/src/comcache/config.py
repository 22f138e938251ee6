"""Experiment configuration: TOML grammar, strict validation, defaults.

The config is TOML with the tables below; unknown keys anywhere are hard
errors so typos never silently fall back to defaults.  Every run emits the
fully resolved configuration (all defaults materialized) next to its results,
and each result row carries the config hash, so any number is reproducible
from the output alone.

    [topology]            grid (rows, cols) or explicit nodes/links
    [workload]            irm | snm | trace, library size, Zipf exponent
    [workload.snm]        shot-noise parameters
    [run]                 horizon, seeds, burn-in, policies, emission cadence
    [reward]              hit/delay/cooperation weights (run-wide defaults)
    [learner]             Q-learning schedule and codec (run-wide defaults)
    [policy.<name>]       per-policy type and parameter overrides
    [bound]               optimistic upper-bound evaluation on the run's trace

Defaults follow the standard small-network setup: Zipf exponent 0.6, library
100, cache capacity 10% of the library, link bandwidth a tenth of the
capacity, local link cost 0.2, horizon 2e5 with a 10% burn-in, seed list [0].
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .engine import RewardWeights
from .marl import LearnerConfig
from .topology import Topology, TopologyError, build, build_grid
from .workload import SnmParams, WorkloadError, WorkloadSpec

POLICY_TYPES = ("lru", "lfu", "iql", "comcache")


class ConfigError(ValueError):
    pass


_LEARNER_KEYS = set(LearnerConfig.__dataclass_fields__)
_REWARD_KEYS = {"w_hit", "w_delay", "w_coop", "free_local_links"}

def _flat(keys) -> dict:
    return {k: None for k in keys}


_SCHEMA = {
    "topology": _flat({"rows", "cols", "capacity", "bw", "link_cost", "nodes", "links"}),
    "workload": {
        **_flat({"model", "library_size", "zipf_beta",
                 "requests_per_cache_per_step", "request_draw", "trace_path"}),
        "snm": _flat({"lifetime_min", "lifetime_max", "volume_scale",
                      "content_arrival_rate", "group_size", "rank_cycle",
                      "tau_jitter", "groups"}),
    },
    "run": _flat({"horizon", "burn_in_fraction", "seeds", "emit_every",
                  "policies", "record_trace", "record_steps", "checkpoint"}),
    "reward": _flat(_REWARD_KEYS),
    "learner": _flat(_LEARNER_KEYS),
    "policy": None,  # free-form sub-table names, validated per policy
    "bound": _flat({"enabled", "window"}),
}

_POLICY_KEYS = {"type", "window"} | _LEARNER_KEYS | _REWARD_KEYS


@dataclass
class PolicyConfig:
    name: str
    type: str
    weights: RewardWeights
    learner: LearnerConfig
    window: int = 10**6  # lfu only


@dataclass
class ExperimentConfig:
    topology: Topology
    workload: WorkloadSpec
    trace_path: str | None
    groups: list[tuple[int, ...]] | None
    policies: list[PolicyConfig]
    horizon: int
    burn_in_fraction: float
    seeds: list[int]
    emit_every: int
    record_trace: bool
    record_steps: bool
    checkpoint: bool
    bound_enabled: bool
    bound_window: int
    resolved: dict = field(repr=False, default_factory=dict)
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def burn_in_steps(self) -> int:
        return int(self.horizon * self.burn_in_fraction)

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.resolved).encode()).hexdigest()[:16]


def canonical_json(d: dict) -> str:
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def _check_keys(table: dict, allowed: dict, where: str):
    for key, value in table.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {where}.{key}")
        if isinstance(allowed[key], dict) and isinstance(value, dict):
            _check_keys(value, allowed[key], f"{where}.{key}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a TOML config; returns the resolved experiment."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    return config_from_dict(raw)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())


def _as_int(v, where):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where} must be an integer")
    return v


def _as_num(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(v)


def config_from_dict(raw: dict) -> ExperimentConfig:
    for key in raw:
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key}")
    for key in ("topology", "workload", "run", "reward", "learner", "bound"):
        table = raw.get(key, {})
        if not isinstance(table, dict):
            raise ConfigError(f"{key} must be a table")
        _check_keys(table, _SCHEMA[key], key)

    wl_tab = dict(raw.get("workload", {}))
    snm_tab = dict(wl_tab.pop("snm", {}))
    library_size = _as_int(wl_tab.get("library_size", 100), "workload.library_size")
    groups_raw = snm_tab.pop("groups", None)

    topo_tab = dict(raw.get("topology", {}))
    topo = _build_topology(topo_tab, library_size)

    model = wl_tab.get("model", "irm")
    snm = SnmParams(
        lifetime_range=(
            _as_num(snm_tab.get("lifetime_min", 10.0), "snm.lifetime_min"),
            _as_num(snm_tab.get("lifetime_max", 1000.0), "snm.lifetime_max"),
        ),
        volume_scale=_as_num(snm_tab.get("volume_scale", 200.0), "snm.volume_scale"),
        content_arrival_rate=_as_num(
            snm_tab.get("content_arrival_rate", 0.3), "snm.content_arrival_rate"),
        group_size=_as_int(snm_tab.get("group_size", 4), "snm.group_size"),
        rank_cycle=_as_int(snm_tab.get("rank_cycle", 20), "snm.rank_cycle"),
        tau_jitter=_as_num(snm_tab.get("tau_jitter", 1000.0), "snm.tau_jitter"),
    )
    trace_path = wl_tab.get("trace_path")
    workload = WorkloadSpec(
        library_size=library_size,
        model=model if model != "trace" else "irm",
        zipf_beta=_as_num(wl_tab.get("zipf_beta", 0.6), "workload.zipf_beta"),
        requests_per_cache_per_step=_as_int(
            wl_tab.get("requests_per_cache_per_step", 1),
            "workload.requests_per_cache_per_step"),
        request_draw=wl_tab.get("request_draw", "fixed"),
        snm=snm,
    )
    if model == "trace":
        if not trace_path:
            raise ConfigError("workload.model = 'trace' requires workload.trace_path")
    elif model not in ("irm", "snm"):
        raise ConfigError(f"unknown workload model {model!r}")
    try:
        workload.validate()
    except WorkloadError as exc:
        raise ConfigError(str(exc)) from exc
    if max(topo.capacities) >= library_size:
        raise ConfigError(
            f"cache capacity {max(topo.capacities)} must be smaller than the "
            f"library size {library_size} (the full-copy case is trivial)")

    groups = None
    if groups_raw is not None:
        groups = [tuple(int(i) for i in g) for g in groups_raw]
        covered = sorted(i for g in groups for i in g)
        if covered != list(range(topo.node_count)):
            raise ConfigError("snm.groups must cover every cache exactly once")

    run_tab = dict(raw.get("run", {}))
    horizon = _as_int(run_tab.get("horizon", 200_000), "run.horizon")
    if horizon < 1:
        raise ConfigError("run.horizon must be >= 1")
    burn_in = _as_num(run_tab.get("burn_in_fraction", 0.1), "run.burn_in_fraction")
    if not (0.0 <= burn_in < 1.0):
        raise ConfigError("run.burn_in_fraction must lie in [0, 1)")
    seeds = run_tab.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError("run.seeds must be a non-empty list")
    seeds = [_as_int(s, "run.seeds") for s in seeds]
    emit_every = _as_int(run_tab.get("emit_every", 1000), "run.emit_every")
    if emit_every < 1:
        raise ConfigError("run.emit_every must be >= 1")
    policy_names = run_tab.get("policies", ["lru"])
    if not isinstance(policy_names, list) or not policy_names:
        raise ConfigError("run.policies must be a non-empty list")
    if len(set(policy_names)) != len(policy_names):
        raise ConfigError("run.policies entries must be unique")

    reward_tab = dict(raw.get("reward", {}))
    learner_tab = dict(raw.get("learner", {}))
    policy_tabs = raw.get("policy", {})
    if not isinstance(policy_tabs, dict):
        raise ConfigError("policy must be a table of tables")
    for name in policy_tabs:
        if name not in policy_names:
            raise ConfigError(f"policy.{name} configured but not listed in run.policies")

    policies = []
    for name in policy_names:
        tab = dict(policy_tabs.get(name, {}))
        for key in tab:
            if key not in _POLICY_KEYS:
                raise ConfigError(f"unknown key policy.{name}.{key}")
        ptype = tab.pop("type", name)
        if ptype not in POLICY_TYPES:
            raise ConfigError(f"policy.{name}: unknown type {ptype!r}")
        weights = _build_weights(reward_tab, tab, ptype, name)
        learner = _build_learner(learner_tab, tab, name)
        window = _as_int(tab.pop("window", 10**6), f"policy.{name}.window")
        if window < 1:
            raise ConfigError(f"policy.{name}.window must be >= 1")
        policies.append(PolicyConfig(name, ptype, weights, learner, window))

    bound_tab = dict(raw.get("bound", {}))
    bound_enabled = bool(bound_tab.get("enabled", False))
    bound_window = _as_int(bound_tab.get("window", 1000), "bound.window")
    if bound_window < 1:
        raise ConfigError("bound.window must be >= 1")

    cfg = ExperimentConfig(
        topology=topo,
        workload=workload,
        trace_path=trace_path if model == "trace" else None,
        groups=groups,
        policies=policies,
        horizon=horizon,
        burn_in_fraction=burn_in,
        seeds=seeds,
        emit_every=emit_every,
        record_trace=bool(run_tab.get("record_trace", False)),
        record_steps=bool(run_tab.get("record_steps", False)),
        checkpoint=bool(run_tab.get("checkpoint", False)),
        bound_enabled=bound_enabled,
        bound_window=bound_window,
    )
    cfg.resolved = _resolve(cfg)
    cfg.raw = raw
    return cfg


def override_raw(raw: dict, path: str, value) -> dict:
    """Copy of a raw config dict with one dotted-path key replaced."""
    import copy

    out = copy.deepcopy(raw)
    parts = path.split(".")
    node = out
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override through non-table {part} in {path}")
    node[parts[-1]] = value
    return out


def _build_topology(tab: dict, library_size: int) -> Topology:
    has_grid = "rows" in tab or "cols" in tab
    has_explicit = "nodes" in tab or "links" in tab
    if has_grid and has_explicit:
        raise ConfigError("topology: give either rows/cols or nodes/links, not both")
    try:
        if has_explicit:
            nodes = tab.get("nodes", [])
            caps = [0] * len(nodes)
            for n in nodes:
                caps[_as_int(n["id"], "node id")] = _as_int(n["capacity"], "node capacity")
            links = [
                (ln["a"], ln["b"], ln.get("bw", 1), ln.get("cost", 0.2))
                for ln in tab.get("links", [])
            ]
            return build(caps, links)
        rows = _as_int(tab.get("rows", 4), "topology.rows")
        cols = _as_int(tab.get("cols", 4), "topology.cols")
        capacity = _as_int(tab.get("capacity", max(1, library_size // 10)),
                           "topology.capacity")
        bw = _as_int(tab.get("bw", max(1, capacity // 10)), "topology.bw")
        link_cost = _as_num(tab.get("link_cost", 0.2), "topology.link_cost")
        return build_grid(rows, cols, capacity, bw, link_cost)
    except (TopologyError, KeyError) as exc:
        raise ConfigError(f"topology: {exc}") from exc


def _build_weights(reward_tab: dict, policy_tab: dict, ptype: str, name: str) -> RewardWeights:
    merged = {k: reward_tab[k] for k in _REWARD_KEYS if k in reward_tab}
    for k in list(policy_tab):
        if k in _REWARD_KEYS:
            merged[k] = policy_tab.pop(k)
    if ptype == "iql":
        # Independent learners are selfish by default: no cooperation term.
        merged.setdefault("w_coop", 0.0)
    weights = RewardWeights(
        w_hit=_as_num(merged.get("w_hit", 1.0), f"policy.{name}.w_hit"),
        w_delay=_as_num(merged.get("w_delay", 0.5), f"policy.{name}.w_delay"),
        w_coop=_as_num(merged.get("w_coop", 0.5), f"policy.{name}.w_coop"),
        free_local_links=bool(merged.get("free_local_links", False)),
    )
    try:
        weights.validate()
    except ValueError as exc:
        raise ConfigError(f"policy.{name}: {exc}") from exc
    return weights


def _build_learner(learner_tab: dict, policy_tab: dict, name: str) -> LearnerConfig:
    merged = {k: learner_tab[k] for k in _LEARNER_KEYS if k in learner_tab}
    for k in list(policy_tab):
        if k in _LEARNER_KEYS:
            merged[k] = policy_tab.pop(k)
    try:
        cfg = LearnerConfig(**merged)
        cfg.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"policy.{name}: {exc}") from exc
    return cfg


def _resolve(cfg: ExperimentConfig) -> dict:
    """Fully materialized config dict embedded into every output."""
    wl = cfg.workload
    d = {
        "topology": cfg.topology.to_dict(),
        "workload": {
            "model": "trace" if cfg.trace_path else wl.model,
            "library_size": wl.library_size,
            "zipf_beta": wl.zipf_beta,
            "requests_per_cache_per_step": wl.requests_per_cache_per_step,
            "request_draw": wl.request_draw,
            "trace_path": cfg.trace_path,
            "snm": {
                "lifetime_min": wl.snm.lifetime_range[0],
                "lifetime_max": wl.snm.lifetime_range[1],
                "volume_scale": wl.snm.volume_scale,
                "content_arrival_rate": wl.snm.content_arrival_rate,
                "group_size": wl.snm.group_size,
                "rank_cycle": wl.snm.rank_cycle,
                "tau_jitter": wl.snm.tau_jitter,
                "groups": [list(g) for g in cfg.groups] if cfg.groups else None,
            },
        },
        "run": {
            "horizon": cfg.horizon,
            "burn_in_fraction": cfg.burn_in_fraction,
            "seeds": cfg.seeds,
            "emit_every": cfg.emit_every,
            "policies": [p.name for p in cfg.policies],
            "record_trace": cfg.record_trace,
            "record_steps": cfg.record_steps,
            "checkpoint": cfg.checkpoint,
        },
        "policy": {
            p.name: {
                "type": p.type,
                "window": p.window,
                "reward": {
                    "w_hit": p.weights.w_hit,
                    "w_delay": p.weights.w_delay,
                    "w_coop": p.weights.w_coop,
                    "free_local_links": p.weights.free_local_links,
                },
                "learner": {k: getattr(p.learner, k) for k in sorted(_LEARNER_KEYS)},
            }
            for p in cfg.policies
        },
        "bound": {"enabled": cfg.bound_enabled, "window": cfg.bound_window},
    }
    return d
