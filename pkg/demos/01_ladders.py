"""
Ladders and the ladder index
============================

A ladder of length n picks rows a_0..a_{n-1} and columns b_0..b_{n-1} so that
the table is high above the diagonal and low on and below it, with a gap of
at least delta between the two levels.
"""

import numpy as np

from stabdef import (
    FormulaTable, GroupFunction, find_ladder, from_group, half_graph, identity,
    ladder_index, ladder_lower_bound, parse, sample_table,
)

# The half-graph is its own ladder.
h = half_graph(5)
print(h.values.astype(int))
print("half-graph 5:", find_ladder(h, 5, 1.0))

# The identity matrix only supports length-2 ladders at margin 1.
for n in (3, 4, 5, 6):
    print(f"identity {n}: ladder index {ladder_index(identity(n), 1.0)}")

# Translates of a parity function on Z/4 have no 2-ladder.
parity = from_group(GroupFunction.cyclic([0, 1, 0, 1]))
print("Z4 parity:", ladder_index(parity, 1.0))

# Kernels sampled on points: lt is unstable, the sphere's dot product is not.
rng = np.random.default_rng(0)
pts = rng.normal(size=(40, 3))
pts /= np.linalg.norm(pts, axis=1, keepdims=True)
line = np.linspace(0.01, 0.99, 20)[:, None]
lt = parse("lt(x[0], y[0])")
dot = parse("0.5*(1+dot(x,y))")
for n in (5, 10, 20):
    a = ladder_index(sample_table(lt, line[:n], line[:n]), 0.5)
    b = ladder_index(sample_table(dot, pts[:n], pts[20:20 + n]), 0.5)
    print(f"n={n:2d}  lt index {a:2d}   dot index {b}")

# Larger tables: a randomized search returns verified ladders, no optimality claim.
big = half_graph(60)
lad = ladder_lower_bound(big, 1.0, seed=1)
print("half-graph 60, heuristic ladder length:", len(lad))
