"""
The Zakharevich operator
========================

V(x, y, z) = (x^2 + 2xy, y^2 + 2yz, z^2 + 2xz)

Every factor Q(x) of its induced chain is scrambling in the interior, yet
Cesaro averages of an interior trajectory do not settle: the orbit spends
ever longer stretches near each vertex in turn. Iterating in log space is
what lets a float64 run see this; the linear iterate underflows and sticks
at a vertex after a few thousand steps.

Pass a smaller exponent as the first argument to shorten the run
(default 20, i.e. 2^20 steps, roughly 20 s).
"""

import sys

import numpy as np

from qso import (
    ZakharevichExperimentConfig,
    cesaro_estimate,
    nonergodicity_experiment,
    run_trajectory,
    scramble_scan,
    zakharevich_cubic,
    zakharevich_Q,
)

power = int(sys.argv[1]) if len(sys.argv) > 1 else 20
np.set_printoptions(precision=4, suppress=True)

print("Q(0.2, 0.3, 0.5) =\n", zakharevich_Q((0.2, 0.3, 0.5)).entries)
print("Q(1, 0, 0) =\n", zakharevich_Q((1, 0, 0)).entries)

scan = scramble_scan(200, interior_margin=0.01)
print("\nscan of S^2 at resolution 200:", scan.counts)

# which vertex dominates, sampled along the log-space orbit
X = run_trajectory(zakharevich_cubic(), (0.3, 0.3, 0.4), 4000, domain="log").states
lead = X.argmax(axis=1)
switches = np.flatnonzero(np.diff(lead)) + 1
print("\nleading coordinate changes at steps:", switches.tolist())

lin = cesaro_estimate(zakharevich_cubic(), (0.3, 0.3, 0.4), 2**power, domain="linear")
log = cesaro_estimate(zakharevich_cubic(), (0.3, 0.3, 0.4), 2**power, domain="log")
print(f"\nCesaro averages from (0.3, 0.3, 0.4), k up to 2^{power}")
print("      k   linear avg                 log avg                    log step")
for (k, a_lin, _), (_, a_log, d) in zip(lin.rows(), log.rows()):
    print(f"{k:8d}   {a_lin.coords}   {a_log.coords}   {'' if d is None else f'{d:.4f}'}")
print("converged_flag  linear:", lin.converged_flag, " log:", log.converged_flag)

cfg = ZakharevichExperimentConfig(max_steps=2**min(power, 14), scramble_scan_grid=50)
print(f"\nchain diagnostics over 2^{min(power, 14)} steps")
for rep in nonergodicity_experiment(cfg):
    last = rep.chain[-1]
    print(f"x0={rep.initial_point.coords}  delta(Q^{{0:{last.end_index}}})={last.dobrushin:.3e}  "
          f"factor delta in [{rep.factor_dobrushin[0]:.3f}, {rep.factor_dobrushin[1]:.3f}]  "
          f"non-scrambling factors: {rep.visited_not_scrambling}")
