"""Compare placement policies on one shared request trace.

Run as:  python demos/demo_policy_comparison.py

Builds a small grid of caches, generates a shot-noise workload once, and runs
LRU, windowed LFU, independent Q-learning and the cooperative joint-action
learner over the identical trace.  Prints hit ratio, normalized delay and
server load for each.
"""

from comcache.config import parse_config
from comcache.engine import Simulation
from comcache.harness import build_policy_set, make_trace
from comcache.metrics import RunMetrics

CONFIG = """
[topology]
rows = 2
cols = 2
capacity = 5

[workload]
model = "snm"
library_size = 50

[workload.snm]
content_arrival_rate = 0.05
volume_scale = 280.0
rank_cycle = 10

[run]
horizon = 30000
policies = ["lru", "lfu", "iql", "comcache"]
"""

cfg = parse_config(CONFIG)
trace = make_trace(cfg, seed=0)
print(f"trace: {len(trace)} requests over {cfg.horizon} steps "
      f"({len(trace) / cfg.horizon / 4:.2f} per cache per step)")
print(f"{'policy':<10} {'hit':>7} {'delay':>7} {'server':>7}")
for pcfg in cfg.policies:
    policies = build_policy_set(pcfg, cfg.topology, seed=0)
    rm = RunMetrics(cfg.topology.node_count, cfg.horizon,
                    cfg.burn_in_steps, cfg.emit_every)
    Simulation(cfg.topology, policies, pcfg.weights, trace).run(rm.on_outcome)
    s = rm.summary_row()
    print(f"{pcfg.name:<10} {s['hit_ratio']:7.4f} {s['normalized_delay']:7.4f} "
          f"{s['shared_link_rate']:7.4f}")

print()
print("cumulative LFU suffers from stale-popular contents under shot noise;")
print("the cooperative learner spreads distinct contents across neighbors")
