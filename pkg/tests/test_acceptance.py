"""One test per acceptance criterion, run at the stated tolerance and time budget.

Each test records a PASS/FAIL line that is printed in the pytest summary.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import record_criterion
from qso.core import StochasticMatrix, random_cubic, random_simplex, random_stochastic
from qso.ergodicity import cesaro_estimate, dobrushin_coefficient, is_scrambling, weak_ergodicity_diagnostic
from qso.operators import (
    bernoulli_apply,
    induced_transition,
    markov_apply,
    markov_apply_via_matrix,
    run_trajectory,
)
from qso.zakharevich import barycentric_grid, zakharevich_map, zakharevich_Q


def _check(number, title, ok, detail):
    record_criterion(number, title, bool(ok), detail)
    assert ok, detail


def _triples(n, seed0):
    for s in range(n):
        m = 2 + s % 5
        base = seed0 + 3 * s
        yield random_cubic(m, base), random_stochastic(m, base + 1), random_simplex(m, base + 2)


def test_c01_simplex_preservation():
    t0 = time.perf_counter()
    worst_sum, worst_min = 0.0, np.inf
    for P, Pi, x in _triples(1000, 0):
        for y in (bernoulli_apply(P, x).coords, markov_apply(P, Pi, x).coords):
            worst_sum = max(worst_sum, abs(y.sum() - 1))
            worst_min = min(worst_min, y.min())
    dt = time.perf_counter() - t0
    _check(1, "simplex preservation", worst_sum <= 1e-12 and worst_min >= -1e-15 and dt < 5,
           f"max |sum-1|={worst_sum:.2e}, min coord={worst_min:.2e}, {dt:.2f} s")


def test_c02_direct_equals_via_matrix():
    worst = max(
        np.abs(markov_apply(P, Pi, x).coords - markov_apply_via_matrix(P, Pi, x).coords).max()
        for P, Pi, x in _triples(1000, 10_000)
    )
    _check(2, "markov_apply == markov_apply_via_matrix", worst <= 1e-12, f"max discrepancy {worst:.2e}")


def test_c03_bernoulli_reduction():
    worst = 0.0
    for P, _, x in _triples(1000, 20_000):
        d = markov_apply(P, StochasticMatrix.repeated_row(x), x).coords - bernoulli_apply(P, x).coords
        worst = max(worst, np.abs(d).max())
    _check(3, "reduction to the Bernoulli operator", worst <= 1e-12, f"max discrepancy {worst:.2e}")


def test_c04_zakharevich_matrix_identity(zak):
    t0 = time.perf_counter()
    dq = dv = 0.0
    for x in barycentric_grid(200):
        Q = zakharevich_Q(x).entries
        dq = max(dq, np.abs(Q - induced_transition(zak, x).entries).max())
        dv = max(dv, np.abs(x @ Q - zakharevich_map(x).coords).max())
    dt = time.perf_counter() - t0
    _check(4, "Q(x) == induced transition, x Q(x) == V(x) on grid 200",
           dq <= 1e-15 and dv <= 1e-12 and dt < 10, f"dQ={dq:.2e}, dV={dv:.2e}, {dt:.2f} s")


def test_c05_fixed_points(zak):
    pts = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1 / 3, 1 / 3, 1 / 3)]
    worst = max(np.abs(run_trajectory(zak, p, 1000).states - np.array(p)).max() for p in pts)
    _check(5, "fixed points of the Zakharevich operator", worst <= 1e-14, f"max drift {worst:.2e}")


def test_c06_scrambling():
    interior = [x for x in barycentric_grid(200) if x.min() >= 0.01]
    results = {
        "identity": not is_scrambling(StochasticMatrix.identity(3)),
        "uniform": is_scrambling(StochasticMatrix.uniform(3)),
        "interior grid": all(is_scrambling(zakharevich_Q(x)) for x in interior),
        "(1,0,0)": not is_scrambling(zakharevich_Q((1, 0, 0))),
        "(0.5,0.5,0)": not is_scrambling(zakharevich_Q((0.5, 0.5, 0))),
    }
    bad = [k for k, ok in results.items() if not ok]
    _check(6, "scrambling classification", not bad,
           f"{len(interior)} interior points" + (f"; failed: {bad}" if bad else ""))


def test_c07_submultiplicativity_and_decay():
    excess = -np.inf
    for s in range(1000):
        m = 2 + s % 5
        A, B = random_stochastic(m, 50_000 + 2 * s), random_stochastic(m, 50_001 + 2 * s)
        AB = A.entries @ B.entries
        AB /= AB.sum(axis=1, keepdims=True)
        excess = max(excess, dobrushin_coefficient(AB) - dobrushin_coefficient(A) * dobrushin_coefficient(B))
    ratio = 0.0
    for c in range(20):
        chain = [random_stochastic(3, 1000 * c + n, min_entry=0.1) for n in range(30)]
        for r in weak_ergodicity_diagnostic(chain, 0, range(1, 31)):
            ratio = max(ratio, r.dobrushin / 0.7 ** r.end_index)
    _check(7, "Dobrushin submultiplicativity and positive-chain decay",
           excess <= 1e-12 and ratio <= 1 + 1e-12,
           f"max excess {excess:.2e}, max delta/0.7^j {ratio:.4f}")


def test_c08_cesaro_oracle():
    worst = 0.0
    for s in range(20):
        m = 2 + s % 5
        P, x0 = random_cubic(m, 70_000 + s), random_simplex(m, 80_000 + s)
        states = run_trajectory(P, x0, 2**12 - 1).states
        est = cesaro_estimate(P, x0, 2**12)
        for k, avg in est.checkpoints:
            worst = max(worst, np.abs(avg.coords - states[:k].mean(axis=0)).max())
    _check(8, "Cesaro estimator == stored-trajectory mean", worst <= 1e-10, f"max discrepancy {worst:.2e}")


@pytest.mark.slow
def test_c09_nonergodicity(zak):
    t0 = time.perf_counter()
    est = cesaro_estimate(zak, (0.3, 0.3, 0.4), 2**20, tolerance=0.01, domain="log")
    dt = time.perf_counter() - t0
    tail = ", ".join(f"{d:.4f}" for d in est.oscillation[-3:])
    _check(9, "Zakharevich Cesaro averages do not settle (2^20 steps)",
           not est.converged_flag and dt < 60,
           f"converged_flag={est.converged_flag}, last L1 steps {tail}, {dt:.1f} s")


def _run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "qso.cli", *args], cwd=cwd,
                          capture_output=True, check=True)


def test_c10_cli_determinism(tmp_path):
    commands = [
        ["simulate", "--builtin", "zakharevich", "--x0", "random", "--seed", "5", "--steps", "500",
         "--transitions", "{d}/q.jsonl", "--out", "{d}/traj.csv"],
        ["simulate", "--builtin", "zakharevich", "--mode", "markov", "--pi", "random", "--x0", "random",
         "--seed", "9", "--steps", "300", "--format", "jsonl", "--out", "{d}/markov.jsonl"],
        ["cesaro", "--builtin", "zakharevich", "--x0", "0.3,0.3,0.4", "--max-k", "4096", "--out", "{d}/ces.csv"],
        ["chain", "--builtin", "zakharevich", "--x0", "random", "--seed", "2", "--steps", "256",
         "--out", "{d}/chain.jsonl"],
        ["scramble-scan", "--grid", "50", "--out", "{d}/scan.csv"],
        ["zakharevich", "--max-k", "4096", "--grid", "20", "--out", "{d}/exp.jsonl"],
    ]
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        for cmd in commands:
            _run_cli([a.format(d=d) for a in cmd], tmp_path)
        outputs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    same = outputs[0] == outputs[1]
    _check(10, "CLI output is byte-identical across runs", same and len(outputs[0]) == 7,
           f"{len(outputs[0])} files compared")
