"""
Defining types from rows
========================

A target vector over the columns is approximated by averages of rows: the LP
gives the best convex combination, multiplicative weights gives a uniform
average, and on 0/1 tables a strict majority vote may define it exactly.
"""

import numpy as np

from stabdef import (
    FormulaTable, definability_report, greedy_bound, greedy_define, half_graph, lp_define,
    majority_define, uniform_majority_bound, verify_definition,
)

swap = FormulaTable([[1, 0], [0, 1]])
print("midpoint:", lp_define(swap, [0.5, 0.5]))
print("corner  :", lp_define(swap, [1, 1]))
g = greedy_define(swap, [1, 1], rounds=1000)
print(f"greedy corner error {g.sup_error:.4f} (LP 0.5, slack {greedy_bound(2, 1000):.4f})")

maj3 = FormulaTable([[1, 1, 0], [1, 0, 1], [0, 1, 1]])
d = majority_define(maj3, [1, 1, 1])
print("all-ones by majority:", d, verify_definition(maj3, d, [1, 1, 1]))

u = uniform_majority_bound([(half_graph(4), range(4)), (maj3, [[1, 1, 1]])], k_max=5)
print("uniform k:", u.k, u.per_target)

rng = np.random.default_rng(7)
t = FormulaTable(rng.integers(0, 2, size=(6, 6)).astype(float))
rep = definability_report(t)
print("random 6x6:", rep["aggregate"])
