"""The funnel chain: top vertex jumps anywhere, every other vertex steps down by one.

Shows the interior Green kernel and the transfer matrix next to their closed
forms, and why the entrance boundary is smaller than the exit boundary.
"""
import numpy as np

import netlaplace as nl
from netlaplace.closed_forms import funnel_closed_forms

np.set_printoptions(precision=5, suppress=True)
p = [0.1, 0.2, 0.3, 0.15, 0.25]
ts = nl.funnel_transition(p)
cf = funnel_closed_forms(p)
N = len(p)

print("transition matrix:\n", ts.P)
print("stationary law:", ts.pi, " closed form:", cf["pi"])

G = nl.green_restricted(ts, ts.interior).matrix
print("\ninterior Green kernel:\n", G)
x = ts.pi[N - 2]
by_hand = np.array([[ts.pi[m] / x if m <= k else (ts.pi[m] - x) / x
                     for m in range(N - 2)] for k in range(N - 2)])
print("pi(m)/pi(N-1) on and below the diagonal, one less above it:\n", by_hand)

app = nl.boundary_chain(ts)
print("\nexit boundary:", ts.labels(app.exit), " entrance boundary:", ts.labels(app.entrance))
print("boundary chain Q:\n", app.Q)
print("R (bottom row vanishes: the last vertex never steps into the interior):\n", nl.bi_blocks(ts).R)

T = nl.transfer_matrix(ts).T
y = ts.pi[N - 1]
D = (y - y**2) / (y**2 - y + x)
print("\ntransfer matrix:\n", T)
print(f"top-left entry {T[0, 0]:.6f}, closed form D = {D:.6f}")
