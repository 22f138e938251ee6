"""Walk through the two request workload models.

Run as:  python demos/demo_workloads.py

Covers the Zipf popularity law behind the IRM stream, the shot-noise content
profiles (release time, volume, exponential decay), and what spatial groups do
to request correlation.
"""

import numpy as np

from comcache.workload import (
    SNMContent,
    SnmParams,
    WorkloadSpec,
    build_irm_trace,
    build_snm_trace,
    make_groups,
    shot_intensity,
    zipf_pmf,
)

print("=== Zipf popularity (IRM) ===")
pmf = zipf_pmf(100, beta=0.6)
print(f"rank 1 probability: {pmf[0]:.4f}")
print(f"rank 10 probability: {pmf[9]:.4f}")
print(f"mass of the top 10 ranks: {pmf[:10].sum():.3f}")

spec = WorkloadSpec(library_size=100, zipf_beta=0.6)
trace = build_irm_trace(spec, n_caches=4, seed=0, horizon=50_000)
freq = np.bincount(trace.contents, minlength=100) / len(trace)
print(f"empirical rank-1 frequency over {len(trace)} draws: {freq[0]:.4f}")
print(f"trace hash (replayable): {trace.sha256()[:16]}...")

print()
print("=== Shot-noise profiles (SNM) ===")
c = SNMContent(content_id=0, arrival=100.0, volume=500.0, lifetime=50.0)
for t in (99, 100, 125, 150, 250):
    print(f"intensity at t={t:>3}: {shot_intensity(c, t):8.3f}")
print("a content is born hot and decays; its integral equals the volume")

print()
print("=== Spatial correlation through groups ===")
snm = WorkloadSpec(
    library_size=50, model="snm",
    snm=SnmParams(content_arrival_rate=0.05, volume_scale=800.0,
                  tau_jitter=4000.0))
groups = make_groups(4, 2)
print(f"groups of caches sharing demand: {groups}")
strace = build_snm_trace(snm, groups, seed=1, horizon=8000)
bins = 80
series = np.zeros((4, bins))
width = strace.horizon // bins
for t, cache in zip(strace.steps, strace.caches):
    series[cache, min(int(t) // width, bins - 1)] += 1
corr = np.corrcoef(series)
print(f"within-group request correlation:  {(corr[0,1] + corr[2,3]) / 2:+.3f}")
print(f"across-group request correlation:  {(corr[0,2] + corr[1,3]) / 2:+.3f}")
print("members of one group surge together; different groups drift apart")
