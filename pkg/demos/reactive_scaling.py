"""Replay a demand trace through the reactive scaler.

Servers take 3 minutes to come up and 1 minute to go away; the placement is
re-solved every minute. Watch the cloud pool appear only once the primary is
full, and the dropped clients during each ramp.
Run: python demos/reactive_scaling.py
"""
from hybridplace.autosim import SimConfig, TraceEvent, simulate
from hybridplace.netmodel import Topology, default_params, to_usd

site = Topology(1, (0,), primary_capacity=800, secondary_capacity=0, inter_primary_links=False)
trace = [
    TraceEvent(0, "p1", 50_000),
    TraceEvent(600, "p1", 240_000),
    TraceEvent(1200, "p1", 330_000),
    TraceEvent(2400, "p1", 120_000),
]
result = simulate(trace, site, default_params(), SimConfig(horizon=3600))

for point in result.timeline:
    print(f"t={point.time:>5}s {point.site:>5}: running {point.running:>4}"
          f" pending {point.pending:>4} draining {point.draining:>4}")
print(f"unserved: {float(result.unserved_client_seconds):,.0f} client-seconds")
print(f"cost over the hour: {to_usd(round(result.cost))} USD")
print(result.summary_csv())
