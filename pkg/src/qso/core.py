"""Validated containers for simplex points, stochastic matrices and cubic
heredity matrices, plus seeded generators of random instances.

All containers hold read-only ``float64`` arrays and are safe to share.
Species are numbered from 1 in messages and in the public ``slice_block``
index; arrays are indexed from 0.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyVector,
    FormatError,
    IndexOutOfRange,
    InvalidDimension,
    NegativeCoordinate,
    NegativeEntry,
    NotNormalized,
    QSOError,
    RowNotNormalized,
    ScheduleExhausted,
    SymmetryViolation,
)

__all__ = [
    "SUM_TOL",
    "CLAMP_TOL",
    "SimplexPoint",
    "StochasticMatrix",
    "CubicHeredityMatrix",
    "ChainSchedule",
    "validate_simplex",
    "validate_stochastic",
    "validate_cubic",
    "slice_block",
    "random_simplex",
    "random_stochastic",
    "random_cubic",
    "as_simplex",
    "as_stochastic",
    "as_cubic",
]

SUM_TOL = 1e-12    # absolute tolerance on every normalization constraint
CLAMP_TOL = 1e-15  # coordinates in (-CLAMP_TOL, 0) are arithmetic noise


def _to_float_array(raw, what: str) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=np.float64, copy=True)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: not a numeric array of consistent shape ({exc})") from None
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _fmt_index(idx) -> str:
    return "(" + ",".join(str(int(i) + 1) for i in idx) + ")"


class SimplexPoint:
    """A probability vector ``x`` with ``x_i >= 0`` and ``sum(x) == 1``.

    Build one with :func:`validate_simplex` (or ``SimplexPoint(raw)``, which
    is the same thing).
    """

    __slots__ = ("coords",)

    def __init__(self, raw):
        self.coords = _check_simplex(raw)

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "SimplexPoint":
        obj = cls.__new__(cls)
        obj.coords = _frozen(np.array(arr, dtype=np.float64))
        return obj

    @property
    def m(self) -> int:
        return self.coords.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __len__(self) -> int:
        return self.m

    def __iter__(self) -> Iterator[float]:
        return iter(self.coords.tolist())

    def __eq__(self, other):
        if not isinstance(other, SimplexPoint):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    __hash__ = None

    def __repr__(self) -> str:
        return f"SimplexPoint({self.coords.tolist()!r})"


class StochasticMatrix:
    """Row-stochastic ``m x m`` matrix (entries >= 0, rows sum to 1)."""

    __slots__ = ("entries",)

    def __init__(self, raw):
        self.entries = _check_stochastic(raw)

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "StochasticMatrix":
        obj = cls.__new__(cls)
        obj.entries = _frozen(np.array(arr, dtype=np.float64))
        return obj

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def row(self, k: int) -> np.ndarray:
        """Row ``q_k`` for 1-based species ``k``."""
        if not 1 <= k <= self.m:
            raise IndexOutOfRange(f"row index {k} outside 1..{self.m}")
        return self.entries[k - 1]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, StochasticMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None

    def __repr__(self) -> str:
        return f"StochasticMatrix({self.entries.tolist()!r})"

    @classmethod
    def identity(cls, m: int) -> "StochasticMatrix":
        return cls._trusted(np.eye(m))

    @classmethod
    def uniform(cls, m: int) -> "StochasticMatrix":
        return cls._trusted(np.full((m, m), 1.0 / m))

    @classmethod
    def repeated_row(cls, x) -> "StochasticMatrix":
        """Matrix whose every row is the simplex point ``x``."""
        x = as_simplex(x)
        return cls._trusted(np.tile(x.coords, (x.m, 1)))


class CubicHeredityMatrix:
    """Heredity coefficients ``p[i, j, k]``: probability that parents of
    species ``i`` and ``j`` produce offspring of species ``k``.

    Invariants: non-negative, symmetric in the parent pair (exact
    equality), and each fiber ``p[i, j, :]`` sums to one.
    """

    __slots__ = ("entries", "__dict__")

    def __init__(self, raw):
        self.entries = _check_cubic(raw)

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "CubicHeredityMatrix":
        obj = cls.__new__(cls)
        obj.entries = _frozen(np.array(arr, dtype=np.float64))
        return obj

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def block(self, i: int) -> StochasticMatrix:
        """The stochastic block ``P_i`` for 1-based species ``i``."""
        return slice_block(self, i)

    @cached_property
    def log_entries(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return _frozen(np.log(self.entries))

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, CubicHeredityMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None

    def __repr__(self) -> str:
        return f"CubicHeredityMatrix(m={self.m})"

    @classmethod
    def uniform(cls, m: int) -> "CubicHeredityMatrix":
        return cls._trusted(np.full((m, m, m), 1.0 / m))


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

def _check_simplex(raw) -> np.ndarray:
    arr = _to_float_array(raw, "simplex point")
    if arr.ndim != 1:
        raise DimensionMismatch(f"simplex point must be a vector, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyVector("simplex point has no coordinates")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise NotNormalized(f"coordinate x_{bad + 1} is not finite")
    neg = arr < -CLAMP_TOL
    if neg.any():
        bad = int(np.flatnonzero(neg)[0])
        raise NegativeCoordinate(f"coordinate x_{bad + 1} = {float(arr[bad])!r} < 0")
    with np.errstate(over="ignore"):
        total = arr.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise NotNormalized(f"coordinates sum to {float(total)!r}, not 1")
    if (arr < 0).any():
        arr[arr < 0] = 0.0
        arr /= arr.sum()
    return _frozen(arr)


def _check_stochastic(raw) -> np.ndarray:
    arr = _to_float_array(raw, "stochastic matrix")
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatch(f"stochastic matrix must be m x m with m >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        idx = np.argwhere(~np.isfinite(arr))[0]
        raise NegativeEntry(f"entry q{_fmt_index(idx)} is not finite")
    if (arr < 0).any():
        idx = np.argwhere(arr < 0)[0]
        raise NegativeEntry(f"entry q{_fmt_index(idx)} = {float(arr[tuple(idx)])!r} < 0")
    with np.errstate(over="ignore"):
        sums = arr.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
    if bad.size:
        i = int(bad[0])
        raise RowNotNormalized(f"row {i + 1} sums to {float(sums[i])!r}, not 1")
    return _frozen(arr)


def _check_cubic(raw) -> np.ndarray:
    arr = _to_float_array(raw, "cubic matrix")
    if arr.ndim != 3 or arr.shape[0] == 0 or len(set(arr.shape)) != 1:
        raise DimensionMismatch(f"cubic matrix must be m x m x m with m >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        idx = np.argwhere(~np.isfinite(arr))[0]
        raise NegativeEntry(f"entry p{_fmt_index(idx)} is not finite")
    if (arr < 0).any():
        idx = np.argwhere(arr < 0)[0]
        raise NegativeEntry(f"entry p{_fmt_index(idx)} = {float(arr[tuple(idx)])!r} < 0")
    asym = arr != arr.transpose(1, 0, 2)
    if asym.any():
        i, j, k = np.argwhere(asym)[0]
        raise SymmetryViolation(
            f"p_({i + 1}{j + 1},{k + 1}) = {float(arr[i, j, k])!r} but "
            f"p_({j + 1}{i + 1},{k + 1}) = {float(arr[j, i, k])!r}"
        )
    with np.errstate(over="ignore"):
        sums = arr.sum(axis=2)
    bad = np.argwhere(np.abs(sums - 1.0) > SUM_TOL)
    if bad.size:
        i, j = bad[0]
        raise RowNotNormalized(
            f"fiber (i,j)=({i + 1},{j + 1}) sums to {float(sums[i, j])!r}, not 1"
        )
    return _frozen(arr)


def validate_simplex(raw) -> SimplexPoint:
    """Validate ``raw`` as a point of the simplex.

    Coordinates in ``(-1e-15, 0)`` are clamped to zero and the vector is
    renormalized; anything more negative raises :class:`NegativeCoordinate`.
    The input is never modified.
    """
    return SimplexPoint(raw)


def validate_stochastic(raw) -> StochasticMatrix:
    return StochasticMatrix(raw)


def validate_cubic(raw) -> CubicHeredityMatrix:
    """Validate an ``m x m x m`` tensor of heredity coefficients.

    Raises
    ------
    DimensionMismatch
        Tensor is not cubic or is empty.
    NegativeEntry
        Some coefficient is negative or not finite.
    SymmetryViolation
        ``p[i, j, k] != p[j, i, k]`` for some indices (exact comparison).
    RowNotNormalized
        Some fiber ``p[i, j, :]`` does not sum to one within 1e-12.
    """
    return CubicHeredityMatrix(raw)


def as_simplex(x) -> SimplexPoint:
    return x if isinstance(x, SimplexPoint) else SimplexPoint(x)


def as_stochastic(q) -> StochasticMatrix:
    return q if isinstance(q, StochasticMatrix) else StochasticMatrix(q)


def as_cubic(p) -> CubicHeredityMatrix:
    return p if isinstance(p, CubicHeredityMatrix) else CubicHeredityMatrix(p)


def slice_block(P, i: int) -> StochasticMatrix:
    """Return ``P_i`` with ``(P_i)[j, k] = p[i, j, k]``; ``i`` is 1-based."""
    P = as_cubic(P)
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 1 <= i <= P.m:
        raise IndexOutOfRange(f"species index {i!r} outside 1..{P.m}")
    return StochasticMatrix(P.entries[i - 1])


# --------------------------------------------------------------------------
# random instances
# --------------------------------------------------------------------------

def _check_m(m: int) -> None:
    if m < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {m}")


def random_simplex(m: int, seed: int | None = None) -> SimplexPoint:
    """Uniformly distributed point of the ``(m-1)``-simplex."""
    _check_m(m)
    w = np.random.default_rng(seed).exponential(size=m)
    return SimplexPoint._trusted(w / w.sum())


def random_stochastic(m: int, seed: int | None = None, min_entry: float = 0.0) -> StochasticMatrix:
    """Random stochastic matrix with i.i.d. uniform-simplex rows.

    With ``min_entry = eps`` every entry is at least ``eps`` (requires
    ``m * eps <= 1``).
    """
    _check_m(m)
    if not 0.0 <= min_entry * m <= 1.0:
        raise QSOError(f"min_entry={min_entry} infeasible for m={m}")
    w = np.random.default_rng(seed).exponential(size=(m, m))
    rows = w / w.sum(axis=1, keepdims=True)
    rows = min_entry + (1.0 - m * min_entry) * rows
    rows /= rows.sum(axis=1, keepdims=True)
    return StochasticMatrix._trusted(rows)


def random_cubic(m: int, seed: int | None = None) -> CubicHeredityMatrix:
    """Random heredity tensor, symmetric in the parent pair by construction."""
    _check_m(m)
    rng = np.random.default_rng(seed)
    p = np.empty((m, m, m))
    for i in range(m):
        for j in range(i, m):
            w = rng.exponential(size=m)
            p[i, j] = p[j, i] = w / w.sum()
    return CubicHeredityMatrix._trusted(p)


# --------------------------------------------------------------------------
# schedules
# --------------------------------------------------------------------------

class ChainSchedule:
    """Time-indexed source of ``(P^(n,n+1), Pi^(n,n+1))`` pairs.

    ``Pi`` may be ``None`` for schedules only used in Bernoulli mode, where
    the interbreeding matrix is replaced by the current state.

    Use :meth:`constant`, :meth:`finite` or :meth:`periodic` to build one.
    """

    def __init__(self, pairs: Sequence[tuple], periodic: bool = False, unbounded: bool = False):
        if not pairs:
            raise EmptyVector("schedule needs at least one (P, Pi) pair")
        clean = []
        for P, Pi in pairs:
            P = as_cubic(P)
            Pi = None if Pi is None else as_stochastic(Pi)
            clean.append((P, Pi))
        m = clean[0][0].m
        for n, (P, Pi) in enumerate(clean):
            if P.m != m or (Pi is not None and Pi.m != m):
                raise DimensionMismatch(f"schedule step {n} has dimension different from m={m}")
        self._pairs = tuple(clean)
        self._cycle = periodic or unbounded
        self.m = m

    @classmethod
    def constant(cls, P, Pi=None) -> "ChainSchedule":
        return cls([(P, Pi)], unbounded=True)

    @classmethod
    def finite(cls, pairs: Sequence[tuple]) -> "ChainSchedule":
        return cls(pairs)

    @classmethod
    def periodic(cls, pairs: Sequence[tuple]) -> "ChainSchedule":
        return cls(pairs, periodic=True)

    @property
    def length(self) -> int | None:
        """Number of steps available, or ``None`` if unbounded."""
        return None if self._cycle else len(self._pairs)

    @property
    def is_constant(self) -> bool:
        return len(self._pairs) == 1 and self._cycle

    def __getitem__(self, n: int) -> tuple:
        if n < 0:
            raise IndexOutOfRange(f"negative step index {n}")
        if self._cycle:
            return self._pairs[n % len(self._pairs)]
        if n >= len(self._pairs):
            raise ScheduleExhausted(f"schedule has {len(self._pairs)} steps; step {n} requested")
        return self._pairs[n]

    def check_steps(self, steps: int) -> None:
        if self.length is not None and steps > self.length:
            raise ScheduleExhausted(f"schedule has {self.length} steps; {steps} requested")
