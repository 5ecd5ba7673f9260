"""Consensus when links drop packets.

Plain push-sum loses mass whenever a message vanishes, so its ratios drift
away from the true average.  The cumulative-counter protocols sidestep this:
senders broadcast running totals, receivers difference them, and anything
undelivered waits in a per-link buffer instead of disappearing.  The
convergent variant additionally re-shares each round so the ratios settle.
"""

import numpy as np

from lossynet import (
    bernoulli_b_bounded,
    build_graph,
    consensus_error,
    run_convergent_robust_push_sum,
    run_robust_push_sum,
)

g = build_graph(4, [(1, 2), (2, 3), (3, 4), (4, 1), (2, 1), (3, 2)])
y = np.array([2.0, -1.0, 7.0, 4.0])
print(f"inputs: {y},  average: {y.mean():.4f}")

# Half of all transmissions fail, but no link stays dark longer than B - 1
# consecutive rounds.
T, B = 400, 3
schedule = bernoulli_b_bounded(g, 0.5, B, T, seed=3)
drop_rate = 1.0 - schedule.indicators.mean()
print(f"schedule: {T} rounds, {drop_rate:.0%} of transmissions dropped, window B={B}\n")

robust = run_robust_push_sum(g, y, schedule, T)
convergent = run_convergent_robust_push_sum(g, y, schedule, T)

print("  t   robust error   convergent error")
for t in (1, 5, 20, 50, 100, 200, 400):
    print(f"{t:4d}   {consensus_error(robust, t):12.3e}   {consensus_error(convergent, t):12.3e}")

# Mass ends up split between agents and in-flight buffers, but the total over
# the augmented node set is conserved exactly at every round.
for name, trace in (("robust", robust), ("convergent", convergent)):
    value_dev = np.abs(trace.values.sum(axis=1) - y.sum()).max()
    weight_dev = np.abs(trace.weights.sum(axis=1) - g.n).max()
    print(f"\n{name}: worst value-mass drift {value_dev:.2e}, "
          f"worst weight-mass drift {weight_dev:.2e}")

buffered = convergent.weights[T, g.n:].sum()
print(f"weight still in flight after round {T}: {buffered:.3e}")
