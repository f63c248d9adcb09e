"""Oriented cycles: where the bi-Laplace Dirichlet problem breaks down.

On the cycle of length 2N with the odd vertices as boundary, the block S of
the squared Laplacian is singular exactly when N is even.  For such cycles
the solver refuses, and the analysis reports it.
"""
import numpy as np

import netlaplace as nl

for length in (4, 6, 8, 10, 12):
    ts = nl.build_transition(nl.cycle(length))
    b = nl.bi_blocks(ts)
    eig = np.linalg.eigvals(b.R)
    print(f"cycle({length:2d}): S {'singular' if not b.invertible else 'regular ':8s}"
          f"  I+R {'singular' if not b.ir_invertible else 'regular '}"
          f"  eigenvalues of R nearest -1: {eig[np.argmin(abs(eig + 1))]:.3f}")

ts = nl.build_transition(nl.cycle(8))
try:
    nl.solve_bidirichlet(ts, np.zeros(4), np.ones(4))
except nl.SingularSystemError as exc:
    print("\nsolve_bidirichlet on cycle(8):", exc)

# reversible chains never hit this; their plate kernel may still change sign
rng = np.random.default_rng(2)
net = nl.random_network(8, rng, reversible=True)
k = nl.biharmonic_green(nl.build_transition(net), "plate2")
print(f"\nrandom reversible network: plate kernel has {k.negative_entries} negative entries")
