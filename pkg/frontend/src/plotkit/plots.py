"""Figure builders over simulator dumps.

Each builder takes a PlotJob, reads the referenced CSVs, draws with a
headless Agg canvas, and writes one image. Everything rendered comes
straight from the dumps; undefined cells, violation highlighting, and
contour lines are all driven by columns the simulator wrote.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .io import (
    SchemaError,
    read_field_grid,
    read_summary,
    read_trace,
    read_trajectory,
)

VIOLATION_COLOR = "#d62728"
PATH_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
               "#e377c2", "#7f7f7f", "#bcbd22")


@dataclass(frozen=True)
class PlotJob:
    """What to draw and where to put it.

    inputs: CSV paths (one grid for field plots, one or more logs for
    trajectory plots, one curve for trace plots).
    summary: optional summary.json path; trajectory plots use it to
    annotate convergence and cross-check violation counts.
    show_delta_contour: overlay the zero level of the dumped delta
    column (the locus where the selected bearing pair matches home).
    show_fov_boundary: overlay the zero level of a dumped fov_margin
    column if the grid carries one; standard grids do not, and the
    option then warns and draws nothing extra.
    """

    inputs: tuple
    output: str
    summary: str | None = None
    show_delta_contour: bool = False
    show_fov_boundary: bool = False
    dpi: int = 130

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        if not self.inputs:
            raise SchemaError("no input files given")


@dataclass(frozen=True)
class RenderResult:
    """Where the image landed plus the counts tests cross-check."""

    output: Path
    drawn_arrows: int = 0
    undefined_cells: int = 0
    highlighted_segments: int = 0
    per_file_segments: dict = field(default_factory=dict)
    dimension: int = 2


def _save(fig: Figure, output: str, dpi: int) -> Path:
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasAgg(fig).print_figure(str(out), dpi=dpi)
    return out


def plot_field(job: PlotJob) -> RenderResult:
    """Quiver of the dumped field; undefined cells become site markers."""
    grid = read_field_grid(job.inputs[0])
    fig = Figure(figsize=(7.0, 6.0))
    ax = fig.add_subplot(111)

    arrows = 0
    if grid.any_defined:
        X0, X1 = np.meshgrid(grid.x0, grid.x1)
        mask = grid.defined & np.isfinite(grid.f0) & np.isfinite(grid.f1)
        ax.quiver(X0[mask], X1[mask], grid.f0[mask], grid.f1[mask],
                  np.hypot(grid.f0[mask], grid.f1[mask]),
                  cmap="viridis", angles="xy", width=0.0022)
        arrows = int(mask.sum())
    else:
        warnings.warn(f"field undefined at every cell of {grid.source}; "
                      f"drawing markers only", stacklevel=2)

    sites = grid.undefined_points()
    if len(sites):
        ax.plot(sites[:, 0], sites[:, 1], "k^", markersize=9,
                markerfacecolor="white", label="landmark / undefined site")
        ax.legend(loc="upper right", fontsize=8)

    if job.show_delta_contour and grid.any_defined:
        d = np.ma.masked_invalid(grid.delta)
        if (d < 0).any() and (d > 0).any():
            ax.contour(grid.x0, grid.x1, d, levels=[0.0],
                       colors="#d62728", linewidths=1.2, linestyles="--")
        else:
            warnings.warn("delta does not change sign on this grid; "
                          "no zero contour to draw", stacklevel=2)
    if job.show_fov_boundary:
        warnings.warn("grid dump carries no fov_margin column; "
                      "field-of-view boundary skipped", stacklevel=2)

    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    ax.set_title("navigation field")
    ax.set_aspect("equal")
    out = _save(fig, job.output, job.dpi)
    return RenderResult(output=out, drawn_arrows=arrows,
                        undefined_cells=len(sites))


def _violation_spans(traj):
    """Index runs where the dumped margin is negative (NaN breaks runs)."""
    neg = np.zeros(len(traj.t), dtype=bool)
    finite = np.isfinite(traj.fov_margin)
    neg[finite] = traj.fov_margin[finite] < 0.0
    spans = []
    start = None
    for k, flag in enumerate(neg):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            spans.append((start, k - 1))
            start = None
    if start is not None:
        spans.append((start, len(neg) - 1))
    return spans


def plot_trajectories(job: PlotJob) -> RenderResult:
    """Overlay rollout paths with start/goal markers and violation spans."""
    trajectories = [read_trajectory(p) for p in job.inputs]
    dims = {t.dimension for t in trajectories}
    if len(dims) != 1:
        raise SchemaError(f"mixed trajectory dimensions: {sorted(dims)}")
    dim = dims.pop()

    summary = read_summary(job.summary) if job.summary else None

    fig = Figure(figsize=(7.0, 6.0))
    if dim == 3:
        ax = fig.add_subplot(111, projection="3d")
    else:
        ax = fig.add_subplot(111)

    # the dumps never carry the home position; the closest the artifact
    # gets is the sample with the smallest recorded position error
    best = min(trajectories, key=lambda tr: float(np.nanmin(tr.pos_err)))
    goal = best.positions[int(np.nanargmin(best.pos_err))]

    total_segments = 0
    per_file = {}
    for idx, traj in enumerate(trajectories):
        color = PATH_COLORS[idx % len(PATH_COLORS)]
        coords = [traj.positions[:, a] for a in range(dim)]
        label = traj.source.name
        if summary is not None:
            rec = summary.get(traj.source.name)
            if rec is not None:
                label += " (converged)" if rec["converged"] else " (did not converge)"
        ax.plot(*coords, color=color, linewidth=1.1, label=label)
        ax.plot(*[c[:1] for c in coords], marker="o", color=color,
                markersize=6)
        spans = _violation_spans(traj)
        per_file[traj.source.name] = len(spans)
        total_segments += len(spans)
        for lo, hi in spans:
            seg = [traj.positions[lo:hi + 1, a] for a in range(dim)]
            ax.plot(*seg, color=VIOLATION_COLOR, linewidth=3.0, alpha=0.85,
                    solid_capstyle="round")

    ax.plot(*[[g] for g in goal], marker="*", color="gold",
            markeredgecolor="black", markersize=16, linestyle="none",
            label="goal (min position error)")

    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    if dim == 3:
        ax.set_zlabel("x2")
    else:
        ax.set_aspect("equal")
    ax.legend(fontsize=7, loc="best")
    title = "rollout trajectories"
    if total_segments:
        title += f" ({total_segments} field-of-view violation span"
        title += "s)" if total_segments != 1 else ")"
    ax.set_title(title)
    out = _save(fig, job.output, job.dpi)
    return RenderResult(output=out, highlighted_segments=total_segments,
                        per_file_segments=per_file, dimension=dim)


def plot_trace(job: PlotJob) -> RenderResult:
    """Isonormal curve with its residual columns in a side panel."""
    curve = read_trace(job.inputs[0])
    fig = Figure(figsize=(10.0, 5.0))
    if curve.dimension == 3:
        ax = fig.add_subplot(121, projection="3d")
        ax.plot(curve.points[:, 0], curve.points[:, 1], curve.points[:, 2],
                color="#1f77b4", linewidth=1.4)
        ax.set_zlabel("x2")
    else:
        ax = fig.add_subplot(121)
        ax.plot(curve.points[:, 0], curve.points[:, 1],
                color="#1f77b4", linewidth=1.4)
        ax.set_aspect("equal")
    ax.plot(*[[c] for c in curve.points[0, :]], marker="o", color="black",
            markersize=5)
    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    ax.set_title("isonormal curve")

    axr = fig.add_subplot(122)
    axr.semilogy(curve.r, np.maximum(curve.v_err, 1e-18),
                 label="bearing-direction residual")
    axr.semilogy(curve.r, np.maximum(curve.theta_err, 1e-18),
                 label="distance-sum residual")
    axr.set_xlabel("level-set radius r")
    axr.set_ylabel("residual")
    axr.legend(fontsize=8)
    axr.set_title("trace residuals")

    out = _save(fig, job.output, job.dpi)
    return RenderResult(output=out, dimension=curve.dimension)
