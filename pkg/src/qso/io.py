"""Reading and writing the on-disk formats.

JSON inputs::

    cubic matrix      {"m": 3, "p": [[[p_11,1, ..., p_11,m], ...], ...]}
    stochastic matrix {"m": 3, "q": [[...], ...]}
    simplex point     {"x": [...]}
    chain             one {"step": n, "Q": [[...], ...]} object per line

Unknown top-level keys are rejected. CSV outputs print floats with 17
significant digits; JSON outputs use Python's shortest round-trip repr.
All writers go through a temporary file renamed into place on success.
"""

from __future__ import annotations

import contextlib
import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .core import CubicHeredityMatrix, SimplexPoint, StochasticMatrix
from .errors import DimensionMismatch, FormatError

__all__ = [
    "read_cubic",
    "read_stochastic",
    "read_simplex",
    "read_chain",
    "dump_cubic",
    "dump_stochastic",
    "dump_simplex",
    "atomic_writer",
    "fmt",
    "write_trajectory_csv",
    "write_trajectory_jsonl",
    "write_transition_log",
    "write_reports_jsonl",
    "write_reports_csv",
    "write_cesaro_csv",
    "write_cesaro_jsonl",
    "write_scan_csv",
    "write_experiment_jsonl",
]


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def _check_keys(doc, allowed: set, required: set, path) -> None:
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise FormatError(f"{path}: unknown top-level keys {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise FormatError(f"{path}: missing keys {sorted(missing)}")


def _check_m(doc, arr_shape, path) -> None:
    m = doc["m"]
    if isinstance(m, bool) or not isinstance(m, int):
        raise FormatError(f"{path}: 'm' must be an integer")
    if any(s != m for s in arr_shape):
        raise DimensionMismatch(f"{path}: declared m={m} but data has shape {tuple(arr_shape)}")


def parse_cubic(doc, path="<cubic>") -> CubicHeredityMatrix:
    _check_keys(doc, {"m", "p"}, {"m", "p"}, path)
    P = CubicHeredityMatrix(doc["p"])
    _check_m(doc, P.entries.shape, path)
    return P


def parse_stochastic(doc, path="<stochastic>") -> StochasticMatrix:
    _check_keys(doc, {"m", "q"}, {"m", "q"}, path)
    Q = StochasticMatrix(doc["q"])
    _check_m(doc, Q.entries.shape, path)
    return Q


def parse_simplex(doc, path="<simplex>") -> SimplexPoint:
    _check_keys(doc, {"x"}, {"x"}, path)
    return SimplexPoint(doc["x"])


def read_cubic(path) -> CubicHeredityMatrix:
    return parse_cubic(_load_json(path), path)


def read_stochastic(path) -> StochasticMatrix:
    return parse_stochastic(_load_json(path), path)


def read_simplex(path) -> SimplexPoint:
    return parse_simplex(_load_json(path), path)


def read_chain(path) -> list[StochasticMatrix]:
    """Read a JSON-lines chain (the transition-log format)."""
    chain = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            _check_keys(doc, {"step", "Q"}, {"Q"}, f"{path}:{lineno}")
            Q = StochasticMatrix(doc["Q"])
            if chain and Q.m != chain[0].m:
                raise DimensionMismatch(f"{path}:{lineno}: m={Q.m}, expected {chain[0].m}")
            chain.append(Q)
    if not chain:
        raise FormatError(f"{path}: chain is empty")
    return chain


def dump_cubic(P: CubicHeredityMatrix) -> str:
    return json.dumps({"m": P.m, "p": P.entries.tolist()})


def dump_stochastic(Q: StochasticMatrix) -> str:
    return json.dumps({"m": Q.m, "q": Q.entries.tolist()})


def dump_simplex(x: SimplexPoint) -> str:
    return json.dumps({"x": x.coords.tolist()})


@contextlib.contextmanager
def atomic_writer(path) -> Iterator[_io.TextIOBase]:
    """Open a temporary file next to ``path``; rename over it on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _csv(fh):
    return csv.writer(fh, lineterminator="\n")


def write_trajectory_csv(fh, states: np.ndarray) -> None:
    w = _csv(fh)
    m = states.shape[1]
    w.writerow(["step"] + [f"x_{k}" for k in range(1, m + 1)])
    for n, row in enumerate(states):
        w.writerow([n] + [fmt(v) for v in row])


def write_trajectory_jsonl(fh, states: np.ndarray) -> None:
    for n, row in enumerate(states):
        fh.write(json.dumps({"step": n, "x": row.tolist()}) + "\n")


def write_transition_log(fh, transitions: Iterable) -> None:
    for n, q in enumerate(transitions):
        q = q.entries if isinstance(q, StochasticMatrix) else np.asarray(q)
        fh.write(json.dumps({"step": n, "Q": q.tolist()}) + "\n")


def write_reports_jsonl(fh, reports) -> None:
    for r in reports:
        fh.write(json.dumps(r.to_dict()) + "\n")


def write_reports_csv(fh, reports) -> None:
    w = _csv(fh)
    w.writerow(["i", "j", "dobrushin", "column_spread", "all_factors_scrambling", "min_factor_entry"])
    for r in reports:
        w.writerow([r.start_index, r.end_index, fmt(r.dobrushin), fmt(r.column_spread),
                    int(r.all_factors_scrambling), fmt(r.min_factor_entry)])


def write_cesaro_csv(fh, estimate) -> None:
    w = _csv(fh)
    m = estimate.checkpoints[0][1].m
    w.writerow(["k"] + [f"avg_{i}" for i in range(1, m + 1)] + ["delta_prev"])
    for k, avg, d in estimate.rows():
        w.writerow([k] + [fmt(v) for v in avg.coords] + ["" if d is None else fmt(d)])


def write_cesaro_jsonl(fh, estimate) -> None:
    for k, avg, d in estimate.rows():
        fh.write(json.dumps({"k": k, "average": avg.coords.tolist(), "delta_prev": d}) + "\n")


def write_scan_csv(fh, scan) -> None:
    w = _csv(fh)
    w.writerow(["x", "y", "z", "scrambling", "interior"])
    for pt, s, i in zip(scan.points, scan.scrambling, scan.interior):
        w.writerow([fmt(pt[0]), fmt(pt[1]), fmt(pt[2]), int(s), int(i)])


def write_experiment_jsonl(fh, reports) -> None:
    for r in reports:
        fh.write(json.dumps(r.to_dict()) + "\n")
