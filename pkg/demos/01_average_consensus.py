"""Average consensus on a reliable directed ring.

Each agent starts with a private number and repeatedly pushes weighted shares
to its out-neighbors.  Tracking a value and a weight in parallel and reading
their ratio removes the bias that uneven out-degrees would otherwise leave.
"""

import numpy as np

from lossynet import build_graph, consensus_error, run_push_sum

rng = np.random.default_rng(0)

n = 6
ring = build_graph(n, [(i, i % n + 1) for i in range(1, n + 1)])
y = rng.uniform(0, 10, size=n)
print(f"inputs : {np.array2string(y, precision=4)}")
print(f"average: {y.mean():.6f}\n")

T = 60
trace = run_push_sum(ring, y, T)

print(" t   max |ratio - average|")
for t in (1, 2, 5, 10, 20, 40, 60):
    print(f"{t:3d}   {consensus_error(trace, t):.3e}")

# Every agent's ratio lands on the average, not on its own input.
final = trace.ratios(T)[:, 0]
print(f"\nfinal ratios: {np.array2string(final, precision=8)}")

# The protocol conserves mass: summed values and weights never change.
print(f"value mass drift : {abs(float(trace.value_total(T)[0]) - y.sum()):.2e}")
print(f"weight mass drift: {abs(trace.weight_total(T) - n):.2e}")
