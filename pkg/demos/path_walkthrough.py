"""Simple random walk on 0..N with absorbing ends: closed forms against the solvers.

Run with ``python3 demos/path_walkthrough.py [N]``.
"""
import sys

import numpy as np

import netlaplace as nl
from netlaplace.closed_forms import path_closed_forms

N = int(sys.argv[1]) if len(sys.argv) > 1 else 6
ts = nl.build_transition(nl.path_a(N))
cf = path_closed_forms(N)
np.set_printoptions(precision=4, suppress=True)

print(f"Path 0..{N}, boundary {{0, {N}}}.")
print("stationary law:", ts.pi)

# the interior Green kernel counts expected visits before absorption
G = nl.green_restricted(ts, ts.interior).matrix
print("\ninterior Green kernel, max deviation from the closed form:",
      np.abs(G - cf["green_interior"]).max())

# a harmonic function with boundary values 0 and 1 is the hitting probability of N
u = nl.solve_dirichlet(ts, np.zeros(N - 1), [0.0, 1.0])
print("\nharmonic extension of (0, 1):", u.real)

# boundary chain, the R block and the bi-Laplace transfer matrix
app = nl.boundary_chain(ts)
b = nl.bi_blocks(ts)
T = nl.transfer_matrix(ts).T
print("\nboundary chain Q:\n", app.Q)
print("R:\n", b.R)
print("transfer matrix T:\n", T)
print("closed form T:\n", cf["T"])

# the same hitting probabilities by simulation
rep = nl.estimate_hitting(ts, str(N // 2), 20000, seed=1)
print(f"\nMonte Carlo from {N // 2}:", rep.point_estimates, "+/-", rep.standard_errors)
print("analytic:", dict(zip(ts.labels(ts.boundary), app.hitting[N // 2 - 1].tolist())))
