"""Readers for simulator artifacts: field grids, trajectory logs, trace
curves, and rollout summaries.

plotkit is a pure consumer. It loads the CSV and JSON files the
simulator writes and nothing else; in particular it never reads
scenario files and never recomputes field quantities. Schema problems
raise SchemaError with the offending column named, so a mismatched dump
fails loudly instead of producing a quietly wrong figure.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FIELD_COLUMNS = ("x0", "x1", "f0", "f1", "g_t", "g_n", "delta", "defined")
TRAJECTORY_TAIL = ("delta", "pair_i", "pair_j", "fov_margin", "V_bearing",
                   "pos_err")
TRACE_TAIL = ("v_err", "theta_err")


class SchemaError(ValueError):
    """A CSV or summary file does not match the simulator schema."""


def _read_table(path) -> tuple:
    """Return (header tuple, float array of shape (rows, cols))."""
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"input not found: {p}")
    with p.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"empty CSV: {p}") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(
                    f"{p}:{lineno}: expected {len(header)} fields, "
                    f"got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise SchemaError(f"{p}:{lineno}: {exc}") from None
    if not rows:
        raise SchemaError(f"no data rows in {p}")
    return tuple(h.strip() for h in header), np.asarray(rows, dtype=float)


def _require(header, expected, path, what) -> None:
    for got, want in zip(header, expected):
        if got != want:
            raise SchemaError(
                f"{what} {path}: expected column '{want}', found '{got}'")
    if len(header) < len(expected):
        raise SchemaError(
            f"{what} {path}: missing column '{expected[len(header)]}'")
    if len(header) > len(expected):
        raise SchemaError(
            f"{what} {path}: unexpected column '{header[len(expected)]}'")


@dataclass(frozen=True)
class FieldGrid:
    """A rectangular grid of field samples, pivoted to 2-D arrays.

    Arrays are indexed [i1, i0]: first axis follows x1, second x0, the
    order the simulator writes. `defined` masks cells where the field
    exists; undefined cells carry zero field components and NaN delta
    in the dump and must be skipped when drawing arrows.
    """

    x0: np.ndarray
    x1: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    g_t: np.ndarray
    g_n: np.ndarray
    delta: np.ndarray
    defined: np.ndarray
    source: Path

    @property
    def any_defined(self) -> bool:
        return bool(self.defined.any())

    def undefined_points(self) -> np.ndarray:
        """Coordinates of cells flagged undefined, shape (m, 2).

        On simulator dumps these are the cells that landed on a landmark
        (or exactly on the bearing-sum singular set), so they double as
        landmark markers.
        """
        i1, i0 = np.nonzero(~self.defined)
        return np.column_stack([self.x0[i0], self.x1[i1]])


def read_field_grid(path) -> FieldGrid:
    header, data = _read_table(path)
    _require(header, FIELD_COLUMNS, path, "field grid")
    x0 = np.unique(data[:, 0])
    x1 = np.unique(data[:, 1])
    if len(x0) * len(x1) != data.shape[0]:
        raise SchemaError(f"field grid {path}: samples do not form a "
                          f"rectangular grid")
    i0 = np.searchsorted(x0, data[:, 0])
    i1 = np.searchsorted(x1, data[:, 1])
    shape = (len(x1), len(x0))
    filled = np.zeros(shape, dtype=bool)
    filled[i1, i0] = True
    if not filled.all():
        raise SchemaError(f"field grid {path}: duplicate or missing cells")

    def pivot(col):
        out = np.full(shape, np.nan)
        out[i1, i0] = data[:, col]
        return out

    return FieldGrid(x0=x0, x1=x1, f0=pivot(2), f1=pivot(3), g_t=pivot(4),
                     g_n=pivot(5), delta=pivot(6),
                     defined=pivot(7) == 1.0, source=Path(path))


@dataclass(frozen=True)
class Trajectory:
    """One rollout log: timestamps, positions, controls, monitor columns."""

    t: np.ndarray
    positions: np.ndarray
    heading: np.ndarray | None
    controls: np.ndarray
    delta: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    fov_margin: np.ndarray
    v_bearing: np.ndarray
    pos_err: np.ndarray
    source: Path

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    def violation_runs(self) -> list:
        """Maximal [t_start, t_end] runs where fov_margin < 0.

        NaN margins terminate a run, mirroring the simulator's monitor,
        so highlight counts can be cross-checked against summary files.
        """
        runs = []
        start = None
        for k in range(len(self.t)):
            m = self.fov_margin[k]
            active = not math.isnan(m) and m < 0.0
            if active and start is None:
                start = self.t[k]
            elif not active and start is not None:
                runs.append((float(start), float(self.t[k - 1])))
                start = None
        if start is not None:
            runs.append((float(start), float(self.t[-1])))
        return runs


def read_trajectory(path) -> Trajectory:
    header, data = _read_table(path)
    if not header or header[0] != "t":
        found = header[0] if header else "<none>"
        raise SchemaError(f"trajectory {path}: expected column 't', "
                          f"found '{found}'")
    cols = list(header[1:])
    dim = 0
    while dim < len(cols) and cols[dim] == f"x{dim}":
        dim += 1
    if dim < 2:
        raise SchemaError(f"trajectory {path}: expected column 'x1', "
                          f"found '{cols[dim] if dim < len(cols) else ''}'")
    cols = cols[dim:]
    has_heading = bool(cols) and cols[0] == "theta"
    if has_heading:
        cols = cols[1:]
    n_controls = 0
    while n_controls < len(cols) and cols[n_controls] == f"u{n_controls}":
        n_controls += 1
    if n_controls == 0:
        raise SchemaError(f"trajectory {path}: expected column 'u0', "
                          f"found '{cols[0] if cols else ''}'")
    expected = (("t",) + tuple(f"x{i}" for i in range(dim))
                + (("theta",) if has_heading else ())
                + tuple(f"u{i}" for i in range(n_controls))
                + TRAJECTORY_TAIL)
    _require(header, expected, path, "trajectory")
    pos_lo = 1
    head_at = pos_lo + dim
    ctl_lo = head_at + (1 if has_heading else 0)
    tail_lo = ctl_lo + n_controls
    return Trajectory(
        t=data[:, 0],
        positions=data[:, pos_lo:pos_lo + dim],
        heading=data[:, head_at] if has_heading else None,
        controls=data[:, ctl_lo:ctl_lo + n_controls],
        delta=data[:, tail_lo],
        pair_i=data[:, tail_lo + 1].astype(int),
        pair_j=data[:, tail_lo + 2].astype(int),
        fov_margin=data[:, tail_lo + 3],
        v_bearing=data[:, tail_lo + 4],
        pos_err=data[:, tail_lo + 5],
        source=Path(path),
    )


@dataclass(frozen=True)
class TraceCurve:
    """An isonormal curve dump: level-set radius, point, residuals."""

    r: np.ndarray
    points: np.ndarray
    v_err: np.ndarray
    theta_err: np.ndarray
    source: Path

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


def read_trace(path) -> TraceCurve:
    header, data = _read_table(path)
    if not header or header[0] != "r":
        found = header[0] if header else "<none>"
        raise SchemaError(f"trace {path}: expected column 'r', "
                          f"found '{found}'")
    dim = len(header) - 1 - len(TRACE_TAIL)
    if dim < 2:
        raise SchemaError(f"trace {path}: missing column 'x1'")
    expected = ("r",) + tuple(f"x{i}" for i in range(dim)) + TRACE_TAIL
    _require(header, expected, path, "trace")
    return TraceCurve(
        r=data[:, 0],
        points=data[:, 1:1 + dim],
        v_err=data[:, 1 + dim],
        theta_err=data[:, 2 + dim],
        source=Path(path),
    )


def read_summary(path) -> dict:
    """Map trajectory file name -> rollout summary record."""
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"input not found: {p}")
    try:
        payload = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "rollouts" not in payload:
        raise SchemaError(f"{p}: missing 'rollouts' key")
    out = {}
    for rec in payload["rollouts"]:
        for key in ("trajectory_csv", "violation_intervals", "converged"):
            if key not in rec:
                raise SchemaError(f"{p}: rollout record missing '{key}'")
        out[Path(rec["trajectory_csv"]).name] = rec
    return out
