"""
Types, nets and convergent subsequences
=======================================

Each row of a table is a point of [0,1]^columns under the sup metric.  We
count distinct rows, cover them by eps-balls and pull out subsequences that
converge coordinatewise.
"""

import numpy as np

from stabdef import (
    FormulaTable, density_character, extract_convergent_subsequence, half_graph, realized_types,
)
from stabdef.types_space import oscillation

h = half_graph(6)
print("half-graph 6 types:", len(realized_types(h, 0.5)))
print("eps=0.5 net:", density_character(h, 0.5))

rng = np.random.default_rng(3)
cloud = FormulaTable(rng.random((15, 3)))
for eps in (0.1, 0.2, 0.4):
    net = density_character(cloud, eps)
    print(f"eps={eps}: {net.size} centers (packing bound {net.lower}, exact={net.exact})")

rows = rng.random((64, 3))
for method in ("buckets", "box"):
    idx, limit = extract_convergent_subsequence(rows, 0.25, method)
    print(f"{method:7s}: {len(idx)} rows, oscillation {oscillation(rows[idx]).round(3)}, "
          f"limit {limit.values.round(3)}")
