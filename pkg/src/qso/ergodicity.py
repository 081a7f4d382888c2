"""Products of non-homogeneous chains, scrambling, contraction coefficients
and Cesaro averages of operator trajectories.

For a chain ``Q(1), Q(2), ...`` stored as a 0-based sequence ``chain`` the
forward product ``Q^{i:j} = Q(i+1) ... Q(j)`` is ``chain[i] @ ... @ chain[j-1]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import SUM_TOL, SimplexPoint, StochasticMatrix, as_stochastic
from .errors import EmptyRange, IndexOutOfRange, QSOError
from .operators import iterate_states

__all__ = [
    "chain_product",
    "dobrushin_coefficient",
    "column_spread",
    "overlap_mass",
    "is_scrambling",
    "ErgodicityReport",
    "weak_ergodicity_diagnostic",
    "CesaroEstimate",
    "cesaro_estimate",
    "dyadic_horizons",
]

log = logging.getLogger(__name__)


def _entries(q) -> np.ndarray:
    if isinstance(q, StochasticMatrix):
        return q.entries
    return as_stochastic(q).entries


def _fix_drift(prod: np.ndarray, where: str) -> np.ndarray:
    sums = prod.sum(axis=1)
    drift = np.abs(sums - 1.0).max()
    if drift > SUM_TOL:
        log.info("renormalizing %s: row-sum drift %.3g", where, drift)
        prod = prod / sums[:, None]
    return prod


def chain_product(chain: Sequence, i: int, j: int) -> StochasticMatrix:
    """Forward product ``Q^{i:j} = Q(i+1) Q(i+2) ... Q(j)``.

    Parameters
    ----------
    chain : sequence of StochasticMatrix (or arrays)
        ``chain[0]`` is ``Q(1)``.
    i, j : int
        ``0 <= i < j <= len(chain)``.
    """
    if i >= j:
        raise EmptyRange(f"empty product: i={i} >= j={j}")
    if i < 0 or j > len(chain):
        raise IndexOutOfRange(f"need 0 <= i < j <= {len(chain)}, got i={i}, j={j}")
    prod = _entries(chain[i]).copy()
    for n in range(i + 1, j):
        prod = _fix_drift(prod @ _entries(chain[n]), f"Q^{{{i}:{n + 1}}}")
    return StochasticMatrix(prod)


def dobrushin_coefficient(Q) -> float:
    """Contraction coefficient ``(1/2) max_{i,j} sum_k |q_ik - q_jk|``.

    Zero exactly when all rows coincide, one when two rows have disjoint
    supports.
    """
    q = _entries(Q)
    d = 0.5 * np.abs(q[:, None, :] - q[None, :, :]).sum(axis=2).max()
    return float(min(max(d, 0.0), 1.0))


def column_spread(Q) -> float:
    """Largest ``max - min`` over the columns of ``Q``."""
    q = _entries(Q)
    return float((q.max(axis=0) - q.min(axis=0)).max())


def overlap_mass(Q) -> float:
    """``min_{i<j} sum_k min(q_ik, q_jk)``; equals ``1 - dobrushin(Q)``."""
    q = _entries(Q)
    if q.shape[0] == 1:
        return 1.0
    mins = np.minimum(q[:, None, :], q[None, :, :]).sum(axis=2)
    iu = np.triu_indices(q.shape[0], 1)
    return float(mins[iu].min())


def is_scrambling(Q, threshold: float = 0.0) -> bool:
    """True iff every pair of rows shares a column where both exceed
    ``threshold`` (strict ``>``; default 0 is the combinatorial definition).
    """
    q = _entries(Q)
    support = (q > threshold).astype(np.int64)
    shared = support @ support.T
    iu = np.triu_indices(q.shape[0], 1)
    return bool((shared[iu] > 0).all())


@dataclass(frozen=True)
class ErgodicityReport:
    """Diagnostics for one forward product ``Q^{i:j}``."""

    product: StochasticMatrix
    start_index: int
    end_index: int
    dobrushin: float
    column_spread: float
    all_factors_scrambling: bool
    min_factor_entry: float

    def to_dict(self) -> dict:
        return {
            "i": self.start_index,
            "j": self.end_index,
            "dobrushin": self.dobrushin,
            "column_spread": self.column_spread,
            "all_factors_scrambling": self.all_factors_scrambling,
            "min_factor_entry": self.min_factor_entry,
        }


def weak_ergodicity_diagnostic(
    chain: Iterable,
    i: int,
    horizons: Sequence[int],
    threshold: float = 0.0,
) -> list[ErgodicityReport]:
    """Reports for ``Q^{i:j}`` at each ``j`` in ``horizons``.

    ``chain`` may be any iterable (including a generator), so long chains
    need not be stored. Each report also says whether every factor
    ``Q(i+1) .. Q(j)`` was scrambling and the smallest entry among them.

    Raises
    ------
    IndexOutOfRange
        Horizons not strictly increasing, not greater than ``i``, or beyond
        the end of the chain.
    """
    horizons = [int(h) for h in horizons]
    if not horizons:
        return []
    if i < 0 or horizons[0] <= i or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise IndexOutOfRange(f"horizons must be strictly increasing and > i={i}: {horizons}")
    if hasattr(chain, "__len__") and horizons[-1] > len(chain):
        raise IndexOutOfRange(f"horizon {horizons[-1]} exceeds chain length {len(chain)}")

    tracker = _ChainTracker(i, horizons, threshold)
    for q in chain:
        if tracker.push(_entries(q)):
            break
    return tracker.finish()


class _ChainTracker:
    """Incremental forward product with reports at preset horizons."""

    def __init__(self, i: int, horizons: Sequence[int], threshold: float = 0.0):
        self.i = i
        self.threshold = threshold
        self._targets = iter(horizons)
        self._target = next(self._targets, None)
        self._prod = None
        self._scrambling = True
        self._min_entry = np.inf
        self.n = 0
        self.reports: list[ErgodicityReport] = []

    def push(self, q: np.ndarray, scrambling: bool | None = None) -> bool:
        """Consume the next factor; return True once every horizon is done."""
        self.n += 1
        if self.n <= self.i:
            return self._target is None
        if scrambling is None:
            scrambling = is_scrambling(q, self.threshold)
        self._scrambling = self._scrambling and scrambling
        self._min_entry = min(self._min_entry, float(q.min()))
        if self._prod is None:
            self._prod = q.copy()
        else:
            self._prod = _fix_drift(self._prod @ q, f"Q^{{{self.i}:{self.n}}}")
        if self.n == self._target:
            P = StochasticMatrix(self._prod)
            self.reports.append(ErgodicityReport(
                product=P,
                start_index=self.i,
                end_index=self.n,
                dobrushin=dobrushin_coefficient(P),
                column_spread=column_spread(P),
                all_factors_scrambling=self._scrambling,
                min_factor_entry=self._min_entry,
            ))
            self._target = next(self._targets, None)
        return self._target is None

    def finish(self) -> list[ErgodicityReport]:
        if self._target is not None:
            raise IndexOutOfRange(f"horizon {self._target} exceeds chain length {self.n}")
        return self.reports


def dyadic_horizons(n_max: int, start: int = 1) -> list[int]:
    """``start, 2*start, 4*start, ...`` up to ``n_max`` inclusive."""
    out = []
    k = max(start, 1)
    while k <= n_max:
        out.append(k)
        k *= 2
    return out


# --------------------------------------------------------------------------
# Cesaro averages
# --------------------------------------------------------------------------

class _TreeSum:
    """Streaming pairwise summation of equal-length vectors.

    Rows are buffered in blocks; each full block is summed pairwise and
    merged into a binary-carry stack, so error grows like ``log n``.
    """

    def __init__(self, m: int, block: int = 1024):
        self._buf = np.empty((block, m))
        self._fill = 0
        self._stack: list[tuple[int, np.ndarray]] = []  # (level, partial sum)
        self.count = 0

    def add(self, row: np.ndarray) -> None:
        self._buf[self._fill] = row
        self._fill += 1
        self.count += 1
        if self._fill == self._buf.shape[0]:
            part = np.ascontiguousarray(self._buf.T).sum(axis=1)
            level = 0
            while self._stack and self._stack[-1][0] == level:
                part = self._stack.pop()[1] + part
                level += 1
            self._stack.append((level, part))
            self._fill = 0

    def total(self) -> np.ndarray:
        out = np.ascontiguousarray(self._buf[: self._fill].T).sum(axis=1)
        for _, part in reversed(self._stack):
            out = part + out
        return out


@dataclass(frozen=True)
class CesaroEstimate:
    """Running means ``(1/k) sum_{n<k} x^(n)`` at dyadic ``k``.

    ``converged_flag`` is a finite-horizon heuristic: the last three consecutive
    checkpoint-to-checkpoint L1 distances are all below ``tolerance``.
    """

    checkpoints: list[tuple[int, SimplexPoint]]
    oscillation: list[float]
    converged_flag: bool
    tolerance: float
    verdict_rule: str = field(default="heuristic: last 3 dyadic L1 steps < tolerance")

    @property
    def ks(self) -> list[int]:
        return [k for k, _ in self.checkpoints]

    @property
    def averages(self) -> np.ndarray:
        return np.array([a.coords for _, a in self.checkpoints])

    def rows(self):
        """``(k, average, delta_prev)`` with ``delta_prev=None`` at the first checkpoint."""
        deltas = [None] + list(self.oscillation)
        for (k, avg), d in zip(self.checkpoints, deltas):
            yield k, avg, d


class _CesaroTracker:
    def __init__(self, max_k: int, tolerance: float):
        self.tolerance = tolerance
        self._marks = set(dyadic_horizons(max_k))
        self._marks.add(max_k)
        self._acc = None
        self.checkpoints: list[tuple[int, SimplexPoint]] = []

    def add(self, x: np.ndarray) -> None:
        if self._acc is None:
            self._acc = _TreeSum(x.shape[0])
        self._acc.add(x)
        k = self._acc.count
        if k in self._marks:
            self.checkpoints.append((k, SimplexPoint(self._acc.total() / k)))

    def result(self) -> CesaroEstimate:
        avgs = [a.coords for _, a in self.checkpoints]
        oscillation = [float(np.abs(b - a).sum()) for a, b in zip(avgs, avgs[1:])]
        return CesaroEstimate(
            checkpoints=self.checkpoints,
            oscillation=oscillation,
            converged_flag=_converged(oscillation, self.tolerance),
            tolerance=self.tolerance,
        )


def _converged(oscillation: Sequence[float], tolerance: float, window: int = 3) -> bool:
    return len(oscillation) >= window and all(d < tolerance for d in oscillation[-window:])


def cesaro_estimate(
    schedule,
    x0,
    max_k: int,
    mode: str = "bernoulli",
    tolerance: float = 0.01,
    domain: str = "linear",
) -> CesaroEstimate:
    """Estimate the Cesaro limit of the trajectory from ``x0``.

    Averages are taken at ``k = 1, 2, 4, ...`` up to ``max_k`` (and at
    ``max_k`` itself if it is not a power of two). The trajectory is
    streamed; only the running sums are kept.

    Parameters
    ----------
    schedule, x0, mode, domain
        As for :func:`qso.operators.run_trajectory`. Use ``domain="log"``
        for trajectories that hug the boundary of the simplex.
    max_k : int
        Number of states averaged at the last checkpoint; ``>= 2``.
    tolerance : float
        Threshold of the convergence heuristic, ``> 0``.
    """
    if max_k < 2:
        raise QSOError(f"max_k must be >= 2, got {max_k}")
    if not tolerance > 0:
        raise QSOError(f"tolerance must be > 0, got {tolerance}")
    tracker = _CesaroTracker(max_k, tolerance)
    for x, _ in iterate_states(schedule, x0, max_k - 1, mode=mode, domain=domain):
        tracker.add(x)
    return tracker.result()
