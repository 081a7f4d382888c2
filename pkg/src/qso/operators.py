"""Quadratic stochastic operators and the Markov chains they induce.

Two operators act on the simplex:

* Bernoulli (panmictic) QSO  ``(Vx)_k = sum_{i,j} p[i,j,k] x_i x_j``
* Markov QSO                  ``(V_Pi x)_k = sum_{i,j} p[i,j,k] q[i,j] x_i``

The Markov form factors through the stochastic matrix ``Pi P`` whose row
``k`` is ``q_k @ P_k``, so ``V_Pi x = x @ (Pi P)``; the Bernoulli form is the
special case where every row of ``Pi`` equals ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import (
    CLAMP_TOL,
    ChainSchedule,
    CubicHeredityMatrix,
    SimplexPoint,
    StochasticMatrix,
    as_cubic,
    as_simplex,
    as_stochastic,
)
from .errors import DimensionMismatch, QSOError

__all__ = [
    "bernoulli_apply",
    "markov_apply",
    "pi_action",
    "induced_transition",
    "markov_apply_via_matrix",
    "Trajectory",
    "run_trajectory",
    "iterate_states",
    "MODES",
    "DOMAINS",
    "RENORMALIZE_EVERY",
]

MODES = ("bernoulli", "markov")
DOMAINS = ("linear", "log")
RENORMALIZE_EVERY = 1024


def _same_m(*objs) -> int:
    ms = {o.m for o in objs}
    if len(ms) != 1:
        raise DimensionMismatch(f"operands have different dimensions {sorted(ms)}")
    return ms.pop()


# --------------------------------------------------------------------------
# raw kernels (arrays in, arrays out, no validation)
# --------------------------------------------------------------------------

def _bernoulli_raw(p: np.ndarray, x: np.ndarray) -> np.ndarray:
    m = x.shape[0]
    pairs = np.multiply.outer(x, x).reshape(m * m, 1)
    return (p.reshape(m * m, m) * pairs).sum(axis=0)


def _bernoulli_sym_raw(p: np.ndarray, x: np.ndarray) -> np.ndarray:
    m = x.shape[0]
    d = np.arange(m)
    iu, ju = np.triu_indices(m, 1)
    diag = (p[d, d, :] * (x * x)[:, None]).sum(axis=0)
    off = (p[iu, ju, :] * (x[iu] * x[ju])[:, None]).sum(axis=0)
    return diag + 2.0 * off


def _markov_raw(p: np.ndarray, q: np.ndarray, x: np.ndarray) -> np.ndarray:
    m = x.shape[0]
    w = (q * x[:, None]).reshape(m * m, 1)
    return (p.reshape(m * m, m) * w).sum(axis=0)


def _pi_action_raw(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    # row k: q_k @ P_k
    return np.einsum("kj,kjl->kl", q, p)


def _induced_raw(p: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("j,kjl->kl", x, p)


def _log_normalized(t: np.ndarray) -> np.ndarray:
    """Normalized ``log sum_r exp(t[r, k])`` for ``t`` of shape (m*m, m)."""
    top = t.max(axis=0)
    top[top == -np.inf] = 0.0
    with np.errstate(divide="ignore"):
        out = np.log(np.exp(t - top).sum(axis=0)) + top
    # exp(out) sums to sum(x)**2 in Bernoulli mode, so normalize every step
    peak = out.max()
    return out - (peak + math.log(np.exp(out - peak).sum()))


def _log_bernoulli_raw(logp: np.ndarray, lx: np.ndarray) -> np.ndarray:
    m = lx.shape[0]
    return _log_normalized(logp.reshape(m * m, m) + (lx[:, None] + lx).reshape(m * m, 1))


def _log_markov_raw(logp: np.ndarray, logq: np.ndarray, lx: np.ndarray) -> np.ndarray:
    m = lx.shape[0]
    return _log_normalized(logp.reshape(m * m, m) + (logq + lx[:, None]).reshape(m * m, 1))


def _renormalize(x: np.ndarray) -> np.ndarray:
    x = np.where((x < 0) & (x > -CLAMP_TOL), 0.0, x)
    return x / x.sum()


# --------------------------------------------------------------------------
# public operators
# --------------------------------------------------------------------------

def bernoulli_apply(P, x, use_symmetry: bool = False) -> SimplexPoint:
    """Apply the Bernoulli QSO: ``(Vx)_k = sum_{i,j} p[i,j,k] x_i x_j``.

    Parameters
    ----------
    P : CubicHeredityMatrix or array_like, shape (m, m, m)
    x : SimplexPoint or array_like, shape (m,)
    use_symmetry : bool
        Sum only over ``i <= j`` and double the off-diagonal terms. Same
        value up to rounding; the default evaluates the full double sum.
    """
    P, x = as_cubic(P), as_simplex(x)
    _same_m(P, x)
    kernel = _bernoulli_sym_raw if use_symmetry else _bernoulli_raw
    return SimplexPoint(kernel(P.entries, x.coords))


def markov_apply(P, Pi, x) -> SimplexPoint:
    """Apply the Markov QSO ``(V_Pi x)_k = sum_{i,j} p[i,j,k] q[i,j] x_i``."""
    P, Pi, x = as_cubic(P), as_stochastic(Pi), as_simplex(x)
    _same_m(P, Pi, x)
    return SimplexPoint(_markov_raw(P.entries, Pi.entries, x.coords))


def pi_action(Pi, P) -> StochasticMatrix:
    """The stochastic matrix ``Pi P`` whose row ``k`` is ``q_k @ P_k``."""
    P, Pi = as_cubic(P), as_stochastic(Pi)
    _same_m(P, Pi)
    return StochasticMatrix(_pi_action_raw(Pi.entries, P.entries))


def induced_transition(P, x) -> StochasticMatrix:
    """One-step transition matrix of the Bernoulli QSO at state ``x``.

    Equal to ``pi_action(Pi_x, P)`` where every row of ``Pi_x`` is ``x``;
    row ``i`` is ``x @ P_i`` and ``x @ induced_transition(P, x) == V(x)``.
    """
    P, x = as_cubic(P), as_simplex(x)
    _same_m(P, x)
    return StochasticMatrix(_induced_raw(P.entries, x.coords))


def markov_apply_via_matrix(P, Pi, x) -> SimplexPoint:
    """Markov QSO evaluated as ``x @ pi_action(Pi, P)``."""
    P, Pi, x = as_cubic(P), as_stochastic(Pi), as_simplex(x)
    _same_m(P, Pi, x)
    return SimplexPoint(x.coords @ _pi_action_raw(Pi.entries, P.entries))


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """States ``x^(0), ..., x^(N)`` and, optionally, the transition matrices
    ``Q(0), ..., Q(N-1)`` with ``x^(n+1) = x^(n) @ Q(n)``.

    ``states`` has shape ``(N+1, m)``; ``transitions`` has shape
    ``(N, m, m)`` or is ``None`` when recording was off.
    """

    states: np.ndarray
    transitions: np.ndarray | None = None

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def points(self) -> list[SimplexPoint]:
        return [SimplexPoint._trusted(row) for row in self.states]

    @property
    def transition_log(self) -> list[StochasticMatrix] | None:
        if self.transitions is None:
            return None
        return [StochasticMatrix._trusted(q) for q in self.transitions]

    @property
    def final(self) -> SimplexPoint:
        return SimplexPoint._trusted(self.states[-1])


def _as_schedule(schedule) -> ChainSchedule:
    if isinstance(schedule, ChainSchedule):
        return schedule
    if isinstance(schedule, CubicHeredityMatrix):
        return ChainSchedule.constant(schedule)
    if isinstance(schedule, tuple) and len(schedule) == 2:
        return ChainSchedule.constant(*schedule)
    return ChainSchedule.constant(as_cubic(schedule))


def iterate_states(
    schedule,
    x0,
    steps: int,
    mode: str = "bernoulli",
    domain: str = "linear",
    record_transitions: bool = False,
) -> Iterator[tuple[np.ndarray, np.ndarray | None]]:
    """Yield ``(x^(n), Q(n))`` for ``n = 0..steps`` without storing anything.

    ``Q(n)`` is ``None`` unless ``record_transitions`` is set, and is always
    ``None`` for the final state. Arrays are fresh; callers may keep them.

    ``domain="log"`` propagates ``log x`` instead of ``x``. The two agree to
    rounding while coordinates are representable, but the log domain does not
    underflow, so trajectories that approach the boundary of the simplex
    without reaching it (e.g. heteroclinic cycles) are not spuriously
    absorbed into a face.
    """
    if mode not in MODES:
        raise QSOError(f"mode must be one of {MODES}, got {mode!r}")
    if domain not in DOMAINS:
        raise QSOError(f"domain must be one of {DOMAINS}, got {domain!r}")
    if steps < 0:
        raise QSOError(f"steps must be >= 0, got {steps}")
    schedule = _as_schedule(schedule)
    x0 = as_simplex(x0)
    if x0.m != schedule.m:
        raise DimensionMismatch(f"x0 has m={x0.m}, schedule has m={schedule.m}")
    schedule.check_steps(steps)
    if mode == "markov":
        for n in range(min(steps, len(schedule._pairs))):
            if schedule[n][1] is None:
                raise QSOError(f"markov mode needs an interbreeding matrix at step {n}")

    x = x0.coords.copy()
    if domain == "log":
        with np.errstate(divide="ignore"):
            lx = np.log(x)
    for n in range(steps):
        P, Pi = schedule[n]
        p = P.entries
        q_mat = None
        if record_transitions:
            q_mat = _induced_raw(p, x) if mode == "bernoulli" else _pi_action_raw(Pi.entries, p)
        yield x, q_mat
        if domain == "log":
            if mode == "bernoulli":
                lx = _log_bernoulli_raw(P.log_entries, lx)
            else:
                lx = _log_markov_raw(P.log_entries, _log_of(Pi), lx)
            x = np.exp(lx)
        else:
            if mode == "bernoulli":
                # sum(Vx) = sum(x)**2: rounding error in the sum doubles each step
                x = _renormalize(_bernoulli_raw(p, x))
            else:
                x = _markov_raw(p, Pi.entries, x)
                if (n + 1) % RENORMALIZE_EVERY == 0:
                    x = _renormalize(x)
    yield x, None


_LOG_CACHE: dict[int, tuple[StochasticMatrix, np.ndarray]] = {}


def _log_of(Pi: StochasticMatrix) -> np.ndarray:
    hit = _LOG_CACHE.get(id(Pi))
    if hit is not None and hit[0] is Pi:
        return hit[1]
    with np.errstate(divide="ignore"):
        out = np.log(Pi.entries)
    if len(_LOG_CACHE) > 256:
        _LOG_CACHE.clear()
    _LOG_CACHE[id(Pi)] = (Pi, out)
    return out


def run_trajectory(
    schedule,
    x0,
    steps: int,
    record_transitions: bool = False,
    mode: str = "bernoulli",
    domain: str = "linear",
) -> Trajectory:
    """Iterate the operator ``steps`` times from ``x0``.

    Parameters
    ----------
    schedule : ChainSchedule or CubicHeredityMatrix
        Source of ``(P^(n,n+1), Pi^(n,n+1))``. A bare cubic matrix is a
        constant Bernoulli schedule.
    x0 : SimplexPoint or array_like
    steps : int
    record_transitions : bool
        Also return ``Q(n) = Pi^(n,n+1) P^(n,n+1)`` (Markov mode) or the
        induced matrix at ``x^(n)`` (Bernoulli mode).
    mode : {"bernoulli", "markov"}
        Bernoulli mode ignores the schedule's interbreeding matrices.
    domain : {"linear", "log"}
        See :func:`iterate_states`. Linear Bernoulli trajectories are
        renormalized every step, linear Markov ones every 1024 steps.

    Raises
    ------
    DimensionMismatch, ScheduleExhausted
    """
    states = []
    transitions = [] if record_transitions else None
    for x, q in iterate_states(schedule, x0, steps, mode, domain, record_transitions):
        states.append(x)
        if q is not None:
            transitions.append(q)
    arr = np.array(states)
    arr.setflags(write=False)
    if transitions is not None:
        transitions = np.array(transitions).reshape(steps, arr.shape[1], arr.shape[1])
        transitions.setflags(write=False)
    return Trajectory(arr, transitions)
