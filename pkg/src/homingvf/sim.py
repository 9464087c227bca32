"""Scenario files, closed-loop rollouts, and artifact writers.

A scenario JSON fully determines a batch of rollouts: landmark layout,
home position, FOV angle, robot kind, gains, initial states, and timing.
Rollouts log one record per control step and stop at t_max or once the
position error stays inside tolerance for a sustained window.  Logs and
field-grid dumps serialize to CSV at IEEE-754 round-trip precision so
reruns are byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import (
    ControlGains,
    DoubleIntegratorState,
    UnicycleState,
    di_step,
    unicycle_control,
    unicycle_step,
)
from .fields import BumpParams, FieldContext, HomeSpec, HomeSpecError, validate_epsilon
from .geometry import CoincidentPointsError, LandmarkSet

POSITION_TOL = 1e-3        # m
SUSTAIN_WINDOW = 0.5       # s the error must stay inside tolerance
UPSILON_TOL = 1e-3         # m/s, unicycle forward speed at convergence

ROBOT_KINDS = ("double-integrator", "unicycle")

_SCENARIO_KEYS = {
    "dimension", "landmarks", "home_position", "fov_angle_rad", "robot",
    "gains", "initial_states", "dt", "t_max", "epsilon",
}
_GAIN_KEYS = {"lambda0", "k_v", "k_omega"}


class ScenarioError(ValueError):
    """Scenario file or override rejected during validation."""


class RolloutError(RuntimeError):
    """A rollout inside a batch failed; carries the rollout index."""

    def __init__(self, index: int, message: str):
        super().__init__(f"rollout {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class Scenario:
    dimension: int
    landmarks: LandmarkSet
    home_position: np.ndarray
    fov_angle: float
    robot_kind: str
    gains: ControlGains
    initial_states: tuple
    dt: float
    t_max: float
    bump: BumpParams
    context: FieldContext


@dataclass(frozen=True)
class RolloutSummary:
    converged: bool
    t_converge: float | None
    min_fov_margin: float
    violation_intervals: tuple
    final_position_error: float

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "t_converge": self.t_converge,
            "min_fov_margin": self.min_fov_margin,
            "violation_intervals": [list(iv) for iv in self.violation_intervals],
            "final_position_error": self.final_position_error,
        }


@dataclass(frozen=True)
class TrajectoryLog:
    """Per-step records of one rollout, ready for CSV serialization."""

    columns: tuple
    rows: tuple

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows], dtype=float)

    def to_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_text())

    def to_csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(value) for value in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FieldGrid:
    columns: tuple
    rows: tuple

    def to_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_text())

    def to_csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(value) for value in row))
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _as_point(raw, d: int, what: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.shape != (d,):
        raise ScenarioError(f"{what} must have {d} coordinates, got {raw!r}")
    if not np.all(np.isfinite(arr)):
        raise ScenarioError(f"{what} must be finite, got {raw!r}")
    return arr


def scenario_from_dict(data: dict, dt: float | None = None,
                       t_max: float | None = None,
                       epsilon: float | None = None) -> Scenario:
    """Validate a scenario mapping and apply CLI-style overrides.

    Raises ScenarioError on any schema or feasibility problem; the message
    names the offending key.
    """
    if not isinstance(data, dict):
        raise ScenarioError(f"scenario must be a JSON object, got {type(data).__name__}")
    unknown = sorted(set(data) - _SCENARIO_KEYS)
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {', '.join(unknown)}")
    for key in ("dimension", "landmarks", "home_position", "fov_angle_rad",
                "robot", "initial_states", "dt", "t_max"):
        if key not in data:
            raise ScenarioError(f"scenario missing required key: {key}")

    d = data["dimension"]
    if d not in (2, 3):
        raise ScenarioError(f"dimension must be 2 or 3, got {d!r}")

    try:
        foci = np.asarray(data["landmarks"], dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"landmarks must be a numeric array, got {data['landmarks']!r}")
    if foci.ndim != 2 or foci.shape[1] != d:
        raise ScenarioError(
            f"landmarks must be a (k, {d}) array, got shape {foci.shape}"
        )
    try:
        landmarks = LandmarkSet(foci=foci)
    except ValueError as exc:
        raise ScenarioError(f"landmarks: {exc}") from exc

    home = _as_point(data["home_position"], d, "home_position")

    fov = data["fov_angle_rad"]
    if not isinstance(fov, (int, float)) or not (0.0 < float(fov) < math.pi):
        raise ScenarioError(f"fov_angle_rad must be in (0, pi), got {fov!r}")
    try:
        home_spec = HomeSpec.from_home_position(landmarks, home, float(fov))
    except (CoincidentPointsError, HomeSpecError) as exc:
        raise ScenarioError(str(exc)) from exc

    robot = data["robot"]
    if robot not in ROBOT_KINDS:
        raise ScenarioError(
            f"robot must be one of {ROBOT_KINDS}, got {robot!r}"
        )
    if robot == "unicycle" and d != 2:
        raise ScenarioError("unicycle scenarios require dimension 2")

    raw_gains = data.get("gains", {})
    if not isinstance(raw_gains, dict):
        raise ScenarioError(f"gains must be an object, got {raw_gains!r}")
    unknown = sorted(set(raw_gains) - _GAIN_KEYS)
    if unknown:
        raise ScenarioError(f"unknown gain keys: {', '.join(unknown)}")
    try:
        gains = ControlGains(**{k: float(v) for k, v in raw_gains.items()})
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"gains: {exc}") from exc

    def _positive(name: str, raw) -> float:
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ScenarioError(f"{name} must be a number, got {raw!r}")
        if not (value > 0.0) or not math.isfinite(value):
            raise ScenarioError(f"{name} must be positive and finite, got {value}")
        return value

    dt_val = _positive("dt", data["dt"] if dt is None else dt)
    t_max_val = _positive("t_max", data["t_max"] if t_max is None else t_max)

    eps_val = data.get("epsilon") if epsilon is None else epsilon
    try:
        if eps_val is None:
            bump = BumpParams.default_for(home_spec)
        else:
            bump = BumpParams(epsilon=float(eps_val))
        validate_epsilon(home_spec, bump)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"epsilon: {exc}") from exc

    raw_states = data["initial_states"]
    if not isinstance(raw_states, list) or not raw_states:
        raise ScenarioError("initial_states must be a non-empty list")
    states = []
    for idx, raw in enumerate(raw_states):
        if not isinstance(raw, dict) or "position" not in raw:
            raise ScenarioError(f"initial_states[{idx}] needs a position")
        pos = _as_point(raw["position"], d, f"initial_states[{idx}].position")
        try:
            if robot == "unicycle":
                extra = sorted(set(raw) - {"position", "heading"})
                if extra or "heading" not in raw:
                    raise ValueError("unicycle states need exactly position and heading")
                states.append(UnicycleState(position=pos,
                                            heading=float(raw["heading"])))
            else:
                extra = sorted(set(raw) - {"position", "velocity"})
                if extra:
                    raise ValueError(f"unexpected keys: {', '.join(extra)}")
                vel = _as_point(raw.get("velocity", np.zeros(d)), d,
                                f"initial_states[{idx}].velocity")
                states.append(DoubleIntegratorState(position=pos, velocity=vel))
        except ValueError as exc:
            raise ScenarioError(f"initial_states[{idx}]: {exc}") from exc

    context = FieldContext(landmarks=landmarks, home=home_spec, bump=bump)
    return Scenario(dimension=d, landmarks=landmarks, home_position=home,
                    fov_angle=float(fov), robot_kind=robot, gains=gains,
                    initial_states=tuple(states), dt=dt_val, t_max=t_max_val,
                    bump=bump, context=context)


def load_scenario(path, dt: float | None = None, t_max: float | None = None,
                  epsilon: float | None = None) -> Scenario:
    """Read and validate a scenario JSON file."""
    p = Path(path)
    if not p.is_file():
        raise ScenarioError(f"scenario file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON: {exc}") from exc
    return scenario_from_dict(data, dt=dt, t_max=t_max, epsilon=epsilon)


def _log_columns(scn: Scenario) -> tuple:
    coords = [f"x{i}" for i in range(scn.dimension)]
    if scn.robot_kind == "unicycle":
        coords.append("theta")
        controls = ["u0", "u1"]
    else:
        controls = [f"u{i}" for i in range(scn.dimension)]
    return tuple(["t"] + coords + controls
                 + ["delta", "pair_i", "pair_j", "fov_margin", "V_bearing",
                    "pos_err"])


def run_rollout(scn: Scenario, initial_state) -> tuple:
    """Simulate one initial state to t_max or sustained convergence.

    Convergence requires the position error to stay below POSITION_TOL for
    SUSTAIN_WINDOW seconds without interruption; unicycle rollouts also
    require the commanded forward speed to stay below UPSILON_TOL over the
    same window.  t_converge is the window entry time.  FOV violations are
    logged as maximal runs of negative fov_margin and never alter the
    control law.
    """
    unicycle = scn.robot_kind == "unicycle"
    expected = UnicycleState if unicycle else DoubleIntegratorState
    if not isinstance(initial_state, expected):
        raise ScenarioError(
            f"initial state must be {expected.__name__} for robot "
            f"{scn.robot_kind!r}"
        )

    context = scn.context
    dt = scn.dt
    n_steps = int(round(scn.t_max / dt))
    state = initial_state
    psi_prev = None
    rows = []
    window_start = None
    converged = False
    t_converge = None
    min_margin = math.inf
    intervals = []
    run_open = False

    for step in range(n_steps + 1):
        t = step * dt
        sample = context.sample(state.position)
        if unicycle:
            command = unicycle_control(context, state, scn.gains, psi_prev, dt)
            controls = (command.upsilon, command.omega)
        else:
            mu = sample.f
            controls = tuple(mu)

        pos_err = float(np.linalg.norm(state.position - scn.home_position))
        if sample.v is None:
            v_energy = math.nan
        else:
            diff = sample.v - context.home.v_star
            v_energy = 0.5 * float(diff @ diff)
        pair_i, pair_j = (sample.pair.i, sample.pair.j) \
            if sample.pair is not None else (-1, -1)

        row = [t, *state.position]
        if unicycle:
            row.append(state.heading)
        row.extend(controls)
        row.extend([sample.delta, pair_i, pair_j, sample.fov_margin,
                    v_energy, pos_err])
        rows.append(tuple(row))

        margin = sample.fov_margin
        if not math.isnan(margin):
            min_margin = min(min_margin, margin)
            if margin < 0.0:
                if run_open:
                    intervals[-1][1] = t
                else:
                    intervals.append([t, t])
                    run_open = True
            else:
                run_open = False
        else:
            run_open = False

        in_tolerance = pos_err < POSITION_TOL
        if unicycle:
            in_tolerance = in_tolerance and controls[0] < UPSILON_TOL
        if in_tolerance:
            if window_start is None:
                window_start = t
            if t - window_start >= SUSTAIN_WINDOW - 1e-12:
                converged = True
                t_converge = window_start
                break
        else:
            window_start = None

        if step == n_steps:
            break
        if unicycle:
            state = unicycle_step(state, dt, command.upsilon, command.omega)
            psi_prev = command.psi
        else:
            state = di_step(state, scn.gains, dt, mu)

    log = TrajectoryLog(columns=_log_columns(scn), rows=tuple(rows))
    summary = RolloutSummary(
        converged=converged,
        t_converge=t_converge,
        min_fov_margin=min_margin if math.isfinite(min_margin) else math.nan,
        violation_intervals=tuple(tuple(iv) for iv in intervals),
        final_position_error=float(rows[-1][-1]),
    )
    return log, summary


def run_batch(scn: Scenario):
    """One rollout per initial state, summaries in input order."""
    summaries = []
    for idx, state in enumerate(scn.initial_states):
        try:
            _, summary = run_rollout(scn, state)
        except Exception as exc:
            raise RolloutError(idx, str(exc)) from exc
        summaries.append(summary)
    return summaries


def sample_field_grid(scn: Scenario, bounds, resolution: int,
                      plane_axis: int = 2,
                      plane_value: float | None = None) -> FieldGrid:
    """Evaluate the combined field on a regular grid for plotting.

    ``bounds`` is (x0min, x0max, x1min, x1max).  For 3-D scenarios the
    grid lies on the plane where coordinate ``plane_axis`` is fixed at
    ``plane_value`` (default: the home position's coordinate); the two
    remaining axes map to the CSV columns x0, x1 in ascending order.
    """
    bounds = tuple(float(b) for b in bounds)
    if len(bounds) != 4:
        raise ScenarioError(f"bounds must be 4 numbers, got {len(bounds)}")
    x0min, x0max, x1min, x1max = bounds
    if not (x0min < x0max and x1min < x1max):
        raise ScenarioError(f"degenerate bounds: {bounds}")
    resolution = int(resolution)
    if resolution < 2:
        raise ScenarioError(f"resolution must be at least 2, got {resolution}")

    if scn.dimension == 3:
        if plane_axis not in (0, 1, 2):
            raise ScenarioError(f"plane_axis must be 0, 1 or 2, got {plane_axis}")
        free = [a for a in range(3) if a != plane_axis]
        fixed = float(scn.home_position[plane_axis]) \
            if plane_value is None else float(plane_value)
    else:
        free = [0, 1]
        fixed = 0.0

    x0s = np.linspace(x0min, x0max, resolution)
    x1s = np.linspace(x1min, x1max, resolution)
    rows = []
    point = np.zeros(scn.dimension)
    for x1 in x1s:
        for x0 in x0s:
            if scn.dimension == 3:
                point[plane_axis] = fixed
            point[free[0]] = x0
            point[free[1]] = x1
            sample = scn.context.sample(point)
            rows.append((float(x0), float(x1),
                         float(sample.f[free[0]]), float(sample.f[free[1]]),
                         sample.g_t, sample.g_n, sample.delta,
                         int(sample.defined)))
    return FieldGrid(
        columns=("x0", "x1", "f0", "f1", "g_t", "g_n", "delta", "defined"),
        rows=tuple(rows),
    )


def write_summary_json(path, summaries, trajectory_files) -> None:
    """Write the batch summary next to the trajectory CSVs."""
    entries = []
    for idx, (summary, name) in enumerate(zip(summaries, trajectory_files)):
        entry = {"index": idx, "trajectory_csv": str(name)}
        entry.update(summary.to_dict())
        entries.append(entry)
    payload = {"rollouts": entries}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
