"""
Chain products and contraction
==============================

Forward products of stochastic matrices, the Dobrushin coefficient and the
scrambling property, on a few hand-picked and random chains.
"""

import numpy as np

from qso import (
    StochasticMatrix,
    chain_product,
    dobrushin_coefficient,
    dyadic_horizons,
    is_scrambling,
    random_stochastic,
    weak_ergodicity_diagnostic,
)

np.set_printoptions(precision=4, suppress=True)

I = StochasticMatrix.identity(3)
U = StochasticMatrix.uniform(3)
C = StochasticMatrix([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])

for name, Q in (("identity", I), ("uniform", U), ("cyclic halves", C)):
    print(f"{name:14s} delta={dobrushin_coefficient(Q):.3f} scrambling={is_scrambling(Q)}")

# rows merge as the cyclic matrix is multiplied by itself
print("\nC^8 =\n", chain_product([C] * 8, 0, 8).entries)

# a chain with every entry >= 0.1 contracts at least like 0.7^j
chain = [random_stochastic(3, seed=n, min_entry=0.1) for n in range(32)]
print("\n   j   delta(Q^{0:j})   0.7^j")
for r in weak_ergodicity_diagnostic(chain, 0, dyadic_horizons(32)):
    print(f"{r.end_index:4d}   {r.dobrushin:.3e}      {0.7 ** r.end_index:.3e}")

# identity factors never mix
r = weak_ergodicity_diagnostic([I] * 16, 0, [16])[0]
print("\nidentity chain, j=16: delta =", r.dobrushin, "all scrambling:", r.all_factors_scrambling)
