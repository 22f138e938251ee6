"""Experiment orchestration: seed fan-out, paired traces, result emission.

For each seed one trace is generated (or replayed) and every configured
policy runs on that identical trace, so policy comparisons are paired.
Outputs per experiment directory:

* ``config.resolved.json``  -- the fully materialized config
* ``summary.csv``           -- one row per (seed, policy) with all metrics,
  the config hash, the package version, and the trace hash
* ``timeseries_<policy>_seed<k>.csv`` -- windowed metrics over the run
* ``bound_seed<k>.csv``     -- per-(block, window) upper-bound detail when
  bound evaluation is enabled
* ``trace_seed<k>.csv``     -- the request trace when recording is enabled
* ``checkpoints/``          -- learner state when checkpointing is enabled

Reruns with ``overwrite`` reproduce byte-identical files.  Failures leave a
``FAILED`` marker next to any partial results.
"""

from __future__ import annotations

import os
import pickle
import traceback
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .bounds import oub_hit_ratio, partition_blocks, partition_grid
from .config import ExperimentConfig, canonical_json, config_from_dict, override_raw
from .engine import Simulation
from .marl import JointQLearner
from .metrics import RunMetrics, effectiveness
from .policies import LFUPolicy, LRUPolicy
from .workload import Trace, build_trace

CHECKPOINT_MAGIC = b"CMCK"
CHECKPOINT_VERSION = 1

SUMMARY_COLUMNS = [
    "config_hash", "version", "seed", "policy", "requests", "hit_ratio",
    "individual_hit_ratio_mean", "normalized_delay", "shared_link_rate",
    "mean_reward", "trace_sha256", "bound_hit_ratio", "effectiveness",
    "resolved_config",
]


class HarnessError(RuntimeError):
    pass


def _fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_field(value: str) -> str:
    if any(ch in value for ch in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def write_csv(path, header: list[str], rows: list[list]):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_csv_field(_fmt(v)) for v in row) + "\n")


def save_checkpoint(path, payload: dict):
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(CHECKPOINT_VERSION.to_bytes(4, "little"))
        f.write(pickle.dumps(payload, protocol=4))


def load_checkpoint(path) -> dict:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise HarnessError(f"{path}: not a checkpoint file")
        version = int.from_bytes(f.read(4), "little")
        if version != CHECKPOINT_VERSION:
            raise HarnessError(f"{path}: unsupported checkpoint version {version}")
        return pickle.loads(f.read())


def build_policy_set(pcfg, topo, seed: int, stream_ids=None):
    """Instantiate one policy object per cache for a configured policy."""
    k = topo.node_count
    if stream_ids is None:
        stream_ids = list(range(k))
    if pcfg.type == "lru":
        return [LRUPolicy(topo.capacities[i]) for i in range(k)]
    if pcfg.type == "lfu":
        return [LFUPolicy(topo.capacities[i], pcfg.window) for i in range(k)]
    use_neighbors = pcfg.type == "comcache"
    return [
        JointQLearner(pcfg.learner, topo.capacities[i], seed, stream_ids[i], use_neighbors)
        for i in range(k)
    ]


def make_trace(cfg: ExperimentConfig, seed: int) -> Trace:
    if cfg.trace_path:
        return Trace.load(cfg.trace_path, horizon=cfg.horizon,
                          n_caches=cfg.topology.node_count,
                          library_size=cfg.workload.library_size)
    return build_trace(cfg.workload, cfg.topology.node_count, seed, cfg.horizon,
                       groups=cfg.groups, grid_shape=cfg.topology.grid_shape)


def _partition(cfg: ExperimentConfig):
    if cfg.topology.grid_shape is not None:
        return partition_grid(cfg.topology)
    if cfg.groups:
        return partition_blocks(cfg.topology, cfg.groups)
    raise HarnessError("bound evaluation needs a grid topology or explicit groups")


def run_cell(cfg: ExperimentConfig, seed: int, out_dir: str,
             resume_dir: str | None = None, quiet: bool = True) -> list[dict]:
    """One (config, seed) cell: every policy on the same trace."""
    trace = make_trace(cfg, seed)
    trace_hash = trace.sha256()
    if cfg.record_trace:
        trace.save(os.path.join(out_dir, f"trace_seed{seed}.csv"))
    burn_in = cfg.burn_in_steps
    bound_value = None
    if cfg.bound_enabled:
        partition = _partition(cfg)
        bound_value, detail = oub_hit_ratio(partition, trace, cfg.bound_window,
                                            start=burn_in)
        write_csv(os.path.join(out_dir, f"bound_seed{seed}.csv"),
                  ["block_id", "window", "hit_ratio"],
                  [[b, w, h] for b, w, h in detail])
    config_hash = cfg.config_hash()
    resolved_json = canonical_json(cfg.resolved)
    rows = []
    for pcfg in cfg.policies:
        policies = build_policy_set(pcfg, cfg.topology, seed)
        if resume_dir:
            ckpt_path = os.path.join(resume_dir, f"{pcfg.name}_seed{seed}.ckpt")
            if os.path.exists(ckpt_path):
                payload = load_checkpoint(ckpt_path)
                for policy, state in zip(policies, payload["states"]):
                    policy.load_state_dict(state)
        rm = RunMetrics(cfg.topology.node_count, cfg.horizon, burn_in, cfg.emit_every)
        sim = Simulation(cfg.topology, policies, pcfg.weights, trace,
                         record_steps=cfg.record_steps)
        sim.run(rm.on_outcome)
        if cfg.record_steps:
            step_rows = []
            for rec in sim.records:
                for i, (req, own, nbr, srv, delay) in enumerate(rec.counters):
                    step_rows.append(
                        [rec.t, i, req, own, nbr, srv, delay, rec.rewards[i]])
            write_csv(
                os.path.join(out_dir, f"steps_{pcfg.name}_seed{seed}.csv"),
                ["step", "cache_id", "requests", "own_hits", "neighbor_hits",
                 "server_misses", "delay_sum", "reward"],
                step_rows)
        write_csv(
            os.path.join(out_dir, f"timeseries_{pcfg.name}_seed{seed}.csv"),
            ["step_window", "hit_ratio", "individual_hit_ratio_mean",
             "normalized_delay", "shared_link_rate"],
            [[w["window_end"], w["hit_ratio"], w["individual_hit_ratio_mean"],
              w["normalized_delay"], w["shared_link_rate"]] for w in rm.series])
        if cfg.checkpoint:
            ckpt_dir = os.path.join(out_dir, "checkpoints")
            os.makedirs(ckpt_dir, exist_ok=True)
            save_checkpoint(
                os.path.join(ckpt_dir, f"{pcfg.name}_seed{seed}.ckpt"),
                {"policy": pcfg.name, "seed": seed,
                 "states": [p.state_dict() for p in policies]})
        summary = rm.summary_row()
        row = {
            "config_hash": config_hash,
            "version": __version__,
            "seed": seed,
            "policy": pcfg.name,
            "trace_sha256": trace_hash,
            "bound_hit_ratio": bound_value,
            "effectiveness": (
                effectiveness(summary["hit_ratio"], bound_value)
                if bound_value and summary["hit_ratio"] is not None else None),
            "resolved_config": resolved_json,
            **summary,
        }
        rows.append(row)
        if not quiet:
            print(f"seed {seed} policy {pcfg.name}: "
                  f"hit_ratio={_fmt(summary['hit_ratio'])} "
                  f"delay={_fmt(summary['normalized_delay'])}")
    return rows


def _prepare_out(out_dir: str, overwrite: bool):
    os.makedirs(out_dir, exist_ok=True)
    summary_path = os.path.join(out_dir, "summary.csv")
    if os.path.exists(summary_path) and not overwrite:
        raise HarnessError(
            f"{out_dir} already holds results; pass overwrite to regenerate")
    failed = os.path.join(out_dir, "FAILED")
    if os.path.exists(failed):
        os.remove(failed)


def run_experiment(cfg: ExperimentConfig, out_dir: str, overwrite: bool = False,
                   quiet: bool = True, jobs: int = 1, seeds=None,
                   resume_dir: str | None = None) -> list[dict]:
    """Run every (seed, policy) cell and write the experiment outputs."""
    _prepare_out(out_dir, overwrite)
    seeds = list(seeds) if seeds is not None else list(cfg.seeds)
    with open(os.path.join(out_dir, "config.resolved.json"), "w", encoding="utf-8") as f:
        f.write(canonical_json(cfg.resolved) + "\n")
    try:
        if jobs > 1 and len(seeds) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [
                    pool.submit(run_cell, cfg, seed, out_dir, resume_dir, True)
                    for seed in seeds
                ]
                per_seed = [f.result() for f in futures]
        else:
            per_seed = [run_cell(cfg, seed, out_dir, resume_dir, quiet)
                        for seed in seeds]
    except Exception:
        with open(os.path.join(out_dir, "FAILED"), "w", encoding="utf-8") as f:
            f.write(traceback.format_exc())
        raise
    rows = [row for cell in per_seed for row in cell]
    write_csv(os.path.join(out_dir, "summary.csv"), SUMMARY_COLUMNS,
              [[row[c] for c in SUMMARY_COLUMNS] for row in rows])
    return rows


def replay_trace(trace_path: str, cfg: ExperimentConfig, out_dir: str,
                 **kwargs) -> list[dict]:
    """Run the configured policies against a recorded trace file."""
    raw = override_raw(cfg.raw, "workload.model", "trace")
    raw = override_raw(raw, "workload.trace_path", trace_path)
    return run_experiment(config_from_dict(raw), out_dir, **kwargs)


def compute_bound(trace_path: str, cfg: ExperimentConfig, out_dir: str,
                  overwrite: bool = False) -> float | None:
    """Evaluate the optimistic upper bound on a recorded trace."""
    os.makedirs(out_dir, exist_ok=True)
    trace = Trace.load(trace_path, horizon=cfg.horizon,
                       n_caches=cfg.topology.node_count,
                       library_size=cfg.workload.library_size)
    partition = _partition(cfg)
    overall, detail = oub_hit_ratio(partition, trace, cfg.bound_window,
                                    start=cfg.burn_in_steps)
    path = os.path.join(out_dir, "bound_replay.csv")
    if os.path.exists(path) and not overwrite:
        raise HarnessError(f"{path} exists; pass overwrite to regenerate")
    write_csv(path, ["block_id", "window", "hit_ratio"],
              [[b, w, h] for b, w, h in detail])
    return overall


def sweep(cfg: ExperimentConfig, param_values: dict[str, list], out_dir: str,
          overwrite: bool = False, quiet: bool = True, jobs: int = 1) -> list[dict]:
    """Cross-product sweep over dotted config paths; one subdirectory per cell."""
    os.makedirs(out_dir, exist_ok=True)
    paths = sorted(param_values)
    cells = [[]]
    for path in paths:
        cells = [cell + [(path, v)] for cell in cells for v in param_values[path]]
    all_rows = []
    for idx, assignment in enumerate(cells):
        raw = cfg.raw
        for path, value in assignment:
            raw = override_raw(raw, path, value)
        sub_cfg = config_from_dict(raw)
        label = "_".join(f"{p.split('.')[-1]}{v}" for p, v in assignment)
        cell_dir = os.path.join(out_dir, f"cell{idx:03d}_{label}")
        rows = run_experiment(sub_cfg, cell_dir, overwrite=overwrite, quiet=quiet,
                              jobs=jobs)
        for row in rows:
            for path, value in assignment:
                row[path] = value
            all_rows.append(row)
    param_cols = list(paths)
    write_csv(os.path.join(out_dir, "sweep_summary.csv"),
              param_cols + SUMMARY_COLUMNS,
              [[row[c] for c in param_cols + SUMMARY_COLUMNS] for row in all_rows])
    return all_rows


def dump_qtables(policies, path, top_k: int = 100):
    """Debug dump: the largest |Q| entries of each agent as CSV rows."""
    rows = []
    for i, policy in enumerate(policies):
        if isinstance(policy, JointQLearner):
            for state_key, action_key, q, visits in policy.top_entries(top_k):
                rows.append([i, repr(state_key), repr(action_key), q, visits])
    write_csv(path, ["agent", "state_key", "action_key", "q_value", "visits"], rows)
    return rows


def summary_from_csv(path) -> list[dict]:
    """Read a summary.csv back into dicts with numeric fields parsed."""
    import csv as _csv

    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for rec in _csv.DictReader(f):
            row = dict(rec)
            for key in ("hit_ratio", "individual_hit_ratio_mean", "normalized_delay",
                        "shared_link_rate", "mean_reward", "bound_hit_ratio",
                        "effectiveness"):
                row[key] = None if rec[key] == "NA" else float(rec[key])
            row["seed"] = int(rec["seed"])
            row["requests"] = int(rec["requests"])
            rows.append(row)
    return rows
