"""The randomized property suites at a small size.

Each suite draws random programs and computation states from a fixed seed.
The monitor checks that no node ever changes its choice identifier.
"""

from pulltab.verify import SUITES, IdMonitor, economy, run_suite

monitor = IdMonitor()
for name in SUITES:
    print(run_suite(name, cases=40, seed=1, monitor=monitor).summary())
print(f"monitor: {monitor.states} states, {len(monitor.violations)} violations")

costs = economy(8)
print({kind: out.stats.nodes_cloned for kind, out in costs.items()})
