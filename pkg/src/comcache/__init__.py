"""Deterministic simulator and policy library for cooperative edge caching.

Networks of capacity-limited caches serve Zipf/IRM or shot-noise request
streams under the priority local -> neighbor -> server.  Placement policies
cover LRU, windowed LFU, independent Q-learning, and neighborhood joint-action
Q-learning, evaluated against an influence-optimistic upper bound.
"""

__version__ = "0.1.0"

from .engine import PolicyFault, RewardWeights, Simulation, reward, serve
from .marl import JointQLearner, LearnerConfig, enumerate_actions
from .metrics import (
    MetricsAccumulator,
    RunMetrics,
    effectiveness,
    hit_ratio,
    individual_hit_ratio,
    normalized_delay,
    shared_link_rate,
)
from .topology import Topology, build, build_grid
from .workload import (
    SNMContent,
    SnmParams,
    Trace,
    WorkloadSpec,
    build_trace,
    shot_intensity,
    zipf_pmf,
)

__all__ = [
    "JointQLearner",
    "LearnerConfig",
    "MetricsAccumulator",
    "PolicyFault",
    "RewardWeights",
    "RunMetrics",
    "SNMContent",
    "Simulation",
    "SnmParams",
    "Topology",
    "Trace",
    "WorkloadSpec",
    "build",
    "build_grid",
    "build_trace",
    "effectiveness",
    "enumerate_actions",
    "hit_ratio",
    "individual_hit_ratio",
    "normalized_delay",
    "reward",
    "serve",
    "shared_link_rate",
    "shot_intensity",
    "zipf_pmf",
    "__version__",
]
