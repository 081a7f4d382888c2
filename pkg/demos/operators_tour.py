"""
Quadratic stochastic operators on the simplex
=============================================

Build a random heredity tensor, apply both operator forms, and check that
the Markov form collapses to the Bernoulli form when every parent row of
the interbreeding matrix equals the current state.
"""

import numpy as np

from qso import (
    StochasticMatrix,
    bernoulli_apply,
    induced_transition,
    markov_apply,
    markov_apply_via_matrix,
    pi_action,
    random_cubic,
    random_simplex,
    random_stochastic,
    run_trajectory,
)

np.set_printoptions(precision=5, suppress=True)

m = 4
P = random_cubic(m, seed=1)
Pi = random_stochastic(m, seed=2)
x = random_simplex(m, seed=3)

print("x      =", x.coords)
print("V x    =", bernoulli_apply(P, x).coords)
print("V_Pi x =", markov_apply(P, Pi, x).coords)

# the Markov operator is a linear map once Pi is fixed
A = pi_action(Pi, P)
print("\nPi P (row-stochastic):\n", A.entries)
print("x (Pi P) - V_Pi x:", markov_apply_via_matrix(P, Pi, x).coords - markov_apply(P, Pi, x).coords)

# Bernoulli case: q_ij = x_j
same = markov_apply(P, StochasticMatrix.repeated_row(x), x).coords - bernoulli_apply(P, x).coords
print("reduction gap:", np.abs(same).max())

# the induced transition matrix reproduces one step of V
Q = induced_transition(P, x)
print("\nx Q(x) - V x:", x.coords @ Q.entries - bernoulli_apply(P, x).coords)

traj = run_trajectory(P, x, 50)
print("\nafter 50 steps:", traj.final.coords)
print("coordinate sums stay at one:", np.abs(traj.states.sum(axis=1) - 1).max())
