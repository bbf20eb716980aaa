"""
Iterated double limits
======================

Stability is the statement that lim_n lim_m and lim_m lim_n of phi(a_n, b_m)
agree whenever both exist.  On finite sequences each limit is read off a
window of trailing terms.
"""

import numpy as np

from stabdef import double_limit, ladder_to_gap, parse

a = [1 - 2.0 ** -n for n in range(1, 21)]
b = [1 - 3.0 ** -m for m in range(1, 21)]

rep = double_limit(parse("lt(x[0], y[0])"), a, b, window=5, tol=0.01)
print("lt kernel:", rep.limit_nm, rep.limit_mn, "gap", rep.gap)

rep = double_limit(parse("0.3"), a, b, window=5, tol=0.01)
print("constant :", rep.limit_nm, rep.limit_mn, "gap", rep.gap)

basis = np.eye(20)
rep = double_limit(parse("0.5*(1+dot(x,y))"), basis, basis, window=5, tol=0.01)
print("dot basis:", rep.limit_nm, rep.limit_mn, "gap", rep.gap)

# le on the same sequence on both sides: the diagonal tips the order of limits.
rep = ladder_to_gap(parse("le(x[0], y[0])"), a, a)
print("le, a = b:", rep.limit_nm, rep.limit_mn, "gap", rep.gap)

# Noise never settles, so no limit is reported.
rep = double_limit(parse("0.5*(1+dot(x,y))"), np.random.default_rng(0).normal(size=(20, 3)),
                   np.random.default_rng(1).normal(size=(20, 3)), window=5, tol=0.01)
print("noise    :", rep.limit_nm, rep.limit_mn, "gap", rep.gap)
