"""Zakharevich's operator on the 2-simplex and the experiments built on it.

``V(x, y, z) = (x^2 + 2xy, y^2 + 2yz, z^2 + 2xz)`` is a Bernoulli QSO whose
trajectories from interior points spiral out towards the boundary cycle
``e1 -> e3 -> e2 -> e1`` with ever longer sojourns near each vertex, so
their Cesaro averages do not converge. Its induced transition matrix is

    Q(x) = [[x + y, 0,     z    ],
            [x,     y + z, 0    ],
            [0,     y,     x + z]]

Interior trajectories underflow float64 within a few thousand steps, after
which a linear-domain iteration is absorbed by a vertex. The experiment
therefore iterates in the log domain by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import CubicHeredityMatrix, SimplexPoint, StochasticMatrix, as_simplex
from .ergodicity import (
    CesaroEstimate,
    ErgodicityReport,
    _CesaroTracker,
    _ChainTracker,
    dyadic_horizons,
)
from .errors import DegenerateSample, DimensionMismatch, QSOError
from .operators import DOMAINS, iterate_states

__all__ = [
    "BLOCKS",
    "zakharevich_cubic",
    "zakharevich_map",
    "zakharevich_Q",
    "ScanReport",
    "scramble_scan",
    "barycentric_grid",
    "continuity_probe",
    "ZakharevichExperimentConfig",
    "PointReport",
    "nonergodicity_experiment",
]

# P_i[j, k] = p_{ij,k}
BLOCKS = (
    ((1, 0, 0), (1, 0, 0), (0, 0, 1)),
    ((1, 0, 0), (0, 1, 0), (0, 1, 0)),
    ((0, 0, 1), (0, 1, 0), (0, 0, 1)),
)


@lru_cache(maxsize=None)
def zakharevich_cubic() -> CubicHeredityMatrix:
    """The heredity tensor of ``V``, validated (including symmetry)."""
    return CubicHeredityMatrix(np.array(BLOCKS, dtype=np.float64))


def _require_m3(x) -> SimplexPoint:
    x = as_simplex(x)
    if x.m != 3:
        raise DimensionMismatch(f"Zakharevich operator lives on S^2, got m={x.m}")
    return x


def zakharevich_map(x) -> SimplexPoint:
    """Closed form ``(x^2 + 2xy, y^2 + 2yz, z^2 + 2xz)``."""
    a, b, c = _require_m3(x).coords
    return SimplexPoint(np.array([a * a + 2 * a * b, b * b + 2 * b * c, c * c + 2 * a * c]))


def _q_batch(X: np.ndarray) -> np.ndarray:
    a, b, c = X[..., 0], X[..., 1], X[..., 2]
    zero = np.zeros_like(a)
    return np.stack([
        np.stack([a + b, zero, c], axis=-1),
        np.stack([a, b + c, zero], axis=-1),
        np.stack([zero, b, a + c], axis=-1),
    ], axis=-2)


def zakharevich_Q(x) -> StochasticMatrix:
    """Transition matrix ``Q(x)`` in closed form."""
    return StochasticMatrix(_q_batch(_require_m3(x).coords))


def _scrambling_batch(Q: np.ndarray, threshold: float = 0.0) -> np.ndarray:
    s = (Q > threshold).astype(np.int64)
    shared = np.einsum("...ik,...jk->...ij", s, s)
    m = Q.shape[-1]
    iu = np.triu_indices(m, 1)
    return (shared[..., iu[0], iu[1]] > 0).all(axis=-1)


# --------------------------------------------------------------------------
# scrambling scan
# --------------------------------------------------------------------------

def barycentric_grid(n: int) -> np.ndarray:
    """Lattice points ``(a, b, c) / n`` with ``a + b + c = n``.

    Shape ``((n+1)(n+2)/2, 3)``, ordered by ``a`` then ``b``.
    """
    pts = [(a, b, n - a - b) for a in range(n + 1) for b in range(n - a + 1)]
    return np.array(pts, dtype=np.float64) / n


@dataclass(frozen=True)
class ScanReport:
    points: np.ndarray          # (N, 3)
    scrambling: np.ndarray      # (N,) bool
    interior: np.ndarray        # (N,) bool
    grid: int
    interior_margin: float

    @property
    def counts(self) -> dict[str, int]:
        s, i = self.scrambling, self.interior
        return {
            "interior_scrambling": int((s & i).sum()),
            "interior_not_scrambling": int((~s & i).sum()),
            "boundary_scrambling": int((s & ~i).sum()),
            "boundary_not_scrambling": int((~s & ~i).sum()),
        }

    def __len__(self) -> int:
        return self.points.shape[0]


def scramble_scan(grid: int, interior_margin: float = 0.01, threshold: float = 0.0) -> ScanReport:
    """Classify ``Q(x)`` as scrambling or not over a triangular grid of S^2.

    A point is interior when its smallest coordinate is ``>= interior_margin``.
    """
    if grid < 2:
        raise QSOError(f"grid must be >= 2, got {grid}")
    pts = barycentric_grid(grid)
    scr = _scrambling_batch(_q_batch(pts), threshold)
    interior = pts.min(axis=1) >= interior_margin
    for arr in (pts, scr, interior):
        arr.setflags(write=False)
    return ScanReport(pts, scr, interior, grid, interior_margin)


# --------------------------------------------------------------------------
# continuity of x -> Q(x)
# --------------------------------------------------------------------------

def continuity_probe(samples: int, seed: int | None = None) -> float:
    """Largest observed ``max_row_L1(Q(x) - Q(x')) / L1(x - x')``.

    Pairs are drawn uniformly on S^2; coincident pairs are redrawn. The map
    is 1-Lipschitz in these norms, so the result is at most one.
    """
    if samples < 2:
        raise QSOError(f"samples must be >= 2, got {samples}")
    rng = np.random.default_rng(seed)

    def draw(n):
        w = rng.exponential(size=(n, 3))
        return w / w.sum(axis=1, keepdims=True)

    X, Y = draw(samples), draw(samples)
    same = np.all(X == Y, axis=1)
    while same.any():
        Y[same] = draw(int(same.sum()))
        same = np.all(X == Y, axis=1)
    dq = np.abs(_q_batch(X) - _q_batch(Y)).sum(axis=-1).max(axis=-1)
    dx = np.abs(X - Y).sum(axis=1)
    if np.any(dx == 0):
        raise DegenerateSample("coincident sample pair survived redraw")
    return float((dq / dx).max())


# --------------------------------------------------------------------------
# non-ergodicity experiment
# --------------------------------------------------------------------------

DEFAULT_POINTS = ((1 / 3, 1 / 3, 1 / 3), (1.0, 0.0, 0.0), (0.3, 0.3, 0.4))


@dataclass(frozen=True)
class ZakharevichExperimentConfig:
    """Parameters of :func:`nonergodicity_experiment`.

    The defaults (``max_steps = 2**20``, tolerance 0.01) were fixed after a
    brute-force long run: from ``(0.3, 0.3, 0.4)`` the last dyadic step of
    the Cesaro average has L1 length about 0.50.
    """

    initial_points: tuple = DEFAULT_POINTS
    max_steps: int = 2**20
    cesaro_tolerance: float = 0.01
    scramble_scan_grid: int = 200
    interior_margin: float = 0.01
    domain: str = "log"
    scramble_threshold: float = 0.0

    def __post_init__(self):
        pts = tuple(_require_m3(p) for p in self.initial_points)
        object.__setattr__(self, "initial_points", pts)
        if not 0 < self.interior_margin < 1 / 3:
            raise QSOError(f"interior_margin must lie in (0, 1/3), got {self.interior_margin}")
        if self.max_steps < 2:
            raise QSOError(f"max_steps must be >= 2, got {self.max_steps}")
        if not self.cesaro_tolerance > 0:
            raise QSOError(f"cesaro_tolerance must be > 0, got {self.cesaro_tolerance}")
        if self.scramble_scan_grid < 2:
            raise QSOError(f"scramble_scan_grid must be >= 2, got {self.scramble_scan_grid}")
        if self.domain not in DOMAINS:
            raise QSOError(f"domain must be one of {DOMAINS}, got {self.domain!r}")


@dataclass(frozen=True)
class PointReport:
    """Trajectory-level and chain-level results for one initial point.

    ``chain`` holds reports for ``Q^{0:j}`` at dyadic ``j``, where the
    factors are ``Q(x^(0)), Q(x^(1)), ...``. ``factor_dobrushin`` is the
    (min, max) contraction coefficient over single factors.
    """

    initial_point: SimplexPoint
    cesaro: CesaroEstimate
    chain: list[ErgodicityReport]
    visited_scrambling: int
    visited_not_scrambling: int
    visited_interior: int
    factor_dobrushin: tuple[float, float]
    final_point: SimplexPoint
    scan: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "initial_point": self.initial_point.coords.tolist(),
            "final_point": self.final_point.coords.tolist(),
            "cesaro": {
                "checkpoints": [
                    {"k": k, "average": a.coords.tolist(), "delta_prev": d}
                    for k, a, d in self.cesaro.rows()
                ],
                "converged_flag": self.cesaro.converged_flag,
                "tolerance": self.cesaro.tolerance,
                "verdict_rule": self.cesaro.verdict_rule,
            },
            "ergodicity": [r.to_dict() for r in self.chain],
            "factor_dobrushin": {"min": self.factor_dobrushin[0], "max": self.factor_dobrushin[1]},
            "visited_states": {
                "scrambling": self.visited_scrambling,
                "not_scrambling": self.visited_not_scrambling,
                "interior": self.visited_interior,
            },
            "scan": self.scan,
        }


def _dobrushin_batch(Q: np.ndarray) -> np.ndarray:
    d = 0.5 * np.abs(Q[:, :, None, :] - Q[:, None, :, :]).sum(axis=-1).max(axis=(-2, -1))
    return np.clip(d, 0.0, 1.0)


def _run_point(x0: SimplexPoint, config: ZakharevichExperimentConfig, chunk: int = 4096) -> PointReport:
    n_states = config.max_steps
    cesaro = _CesaroTracker(n_states, config.cesaro_tolerance)
    chain = _ChainTracker(0, dyadic_horizons(n_states), config.scramble_threshold)
    counts = {"scr": 0, "not": 0, "interior": 0}
    dmin, dmax = np.inf, -np.inf
    buf = []

    def flush():
        nonlocal dmin, dmax
        X = np.array(buf)
        Q = _q_batch(X)
        scr = _scrambling_batch(Q, config.scramble_threshold)
        counts["scr"] += int(scr.sum())
        counts["not"] += int((~scr).sum())
        counts["interior"] += int((X.min(axis=1) >= config.interior_margin).sum())
        d = _dobrushin_batch(Q)
        dmin, dmax = min(dmin, float(d.min())), max(dmax, float(d.max()))
        for q, s in zip(Q, scr):
            chain.push(q, scrambling=bool(s))
        buf.clear()

    last = None
    for x, _ in iterate_states(zakharevich_cubic(), x0, n_states - 1, domain=config.domain):
        cesaro.add(x)
        buf.append(x)
        last = x
        if len(buf) == chunk:
            flush()
    if buf:
        flush()
    return PointReport(
        initial_point=x0,
        cesaro=cesaro.result(),
        chain=chain.finish(),
        visited_scrambling=counts["scr"],
        visited_not_scrambling=counts["not"],
        visited_interior=counts["interior"],
        factor_dobrushin=(dmin, dmax),
        final_point=SimplexPoint(last),
    )


def nonergodicity_experiment(config: ZakharevichExperimentConfig | None = None) -> list[PointReport]:
    """Cesaro behaviour and chain contraction side by side, per initial point.

    For every initial point the trajectory ``x^(0..N-1)`` (``N =
    config.max_steps``) is computed once; it feeds (a) the Cesaro estimator
    and (b) the chain ``Q(x^(0)), Q(x^(1)), ...`` whose forward products are
    reported at dyadic horizons. The grid scan of ``Q`` over S^2 is attached
    to every report under ``scan``.
    """
    config = config or ZakharevichExperimentConfig()
    scan = scramble_scan(config.scramble_scan_grid, config.interior_margin, config.scramble_threshold)
    summary = {"grid": scan.grid, "interior_margin": scan.interior_margin, **scan.counts}
    out = []
    for x0 in config.initial_points:
        rep = _run_point(x0, config)
        out.append(PointReport(**{**rep.__dict__, "scan": summary}))
    return out
