"""Offline figure generation for homing-simulator artifacts."""

from .io import (
    FieldGrid,
    SchemaError,
    TraceCurve,
    Trajectory,
    read_field_grid,
    read_summary,
    read_trace,
    read_trajectory,
)
from .plots import (
    PlotJob,
    RenderResult,
    plot_field,
    plot_trace,
    plot_trajectories,
)

__version__ = "0.1.0"

__all__ = [
    "FieldGrid",
    "PlotJob",
    "RenderResult",
    "SchemaError",
    "TraceCurve",
    "Trajectory",
    "plot_field",
    "plot_trace",
    "plot_trajectories",
    "read_field_grid",
    "read_summary",
    "read_trace",
    "read_trajectory",
]
