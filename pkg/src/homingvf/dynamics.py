"""Closed-loop robot models driven by the navigation field.

Two plants: a damped double integrator (2-D or 3-D) that takes the field
value directly as a force, and a planar unicycle whose forward speed and
turn rate are derived from the field direction.  Integration is classical
RK4 with the control held constant across each step, so a rollout is a
plain loop of control() followed by step().
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import FieldContext


def wrap_angle(angle: float) -> float:
    """Map an angle to the half-open interval (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped == -math.pi:
        wrapped = math.pi
    return wrapped


@dataclass(frozen=True)
class ControlGains:
    """Positive loop gains: damping, speed, and heading."""

    lambda0: float = 1.0
    k_v: float = 1.0
    k_omega: float = 2.0

    def __post_init__(self):
        for name in ("lambda0", "k_v", "k_omega"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class DoubleIntegratorState:
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        vel = np.asarray(self.velocity, dtype=float)
        if pos.shape != vel.shape or pos.ndim != 1 or pos.shape[0] not in (2, 3):
            raise ValueError(
                f"position/velocity must both be (2,) or (3,), got "
                f"{pos.shape} and {vel.shape}"
            )
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)


@dataclass(frozen=True)
class UnicycleState:
    position: np.ndarray
    heading: float

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (2,):
            raise ValueError(f"unicycle position must be (2,), got {pos.shape}")
        if not (-math.pi < self.heading <= math.pi):
            raise ValueError(
                f"heading {self.heading} is not wrapped to (-pi, pi]"
            )
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class UnicycleCommand:
    """Forward speed, turn rate, and the field heading that produced them."""

    upsilon: float
    omega: float
    psi: float


def di_control(context: FieldContext, state: DoubleIntegratorState) -> np.ndarray:
    """Force command for the double integrator: the field value itself."""
    return context.sample(state.position).f


def di_step(state: DoubleIntegratorState, gains: ControlGains, dt: float,
            mu: np.ndarray) -> DoubleIntegratorState:
    """One RK4 step of x'' = -lambda0 x' + mu with mu held constant."""
    lam = gains.lambda0
    mu = np.asarray(mu, dtype=float)

    def rhs(pos_vel):
        _, vel = pos_vel
        return vel, mu - lam * vel

    y = (state.position, state.velocity)
    k1 = rhs(y)
    k2 = rhs((y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]))
    k3 = rhs((y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]))
    k4 = rhs((y[0] + dt * k3[0], y[1] + dt * k3[1]))
    pos = y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    vel = y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return DoubleIntegratorState(position=pos, velocity=vel)


def unicycle_control(context: FieldContext, state: UnicycleState,
                     gains: ControlGains, psi_prev: float | None,
                     dt: float) -> UnicycleCommand:
    """Speed and turn-rate commands that steer the heading onto the field.

    The forward speed combines the misalignment of the bearing-sum
    direction with the distance residual of the selected pair, so it tends
    to zero exactly at the home point.  The turn rate regulates the heading
    to the field direction and feeds forward its rate of change, estimated
    by differencing against ``psi_prev`` over the control period ``dt``
    (zero on the first step, when ``psi_prev`` is None).

    Where the normalized field is the zero vector (home reached, or the
    undefined set) the command is a full stop: (0, 0).
    """
    sample = context.sample(state.position)
    if np.linalg.norm(sample.f_unit) == 0.0:
        psi = state.heading if psi_prev is None else psi_prev
        return UnicycleCommand(upsilon=0.0, omega=0.0, psi=psi)
    vdotv = float(sample.v @ context.home.v_star)
    upsilon = gains.k_v * (math.sqrt(max(0.0, 1.0 - vdotv))
                           + abs(sample.pair.delta))
    psi = math.atan2(sample.f_unit[1], sample.f_unit[0])
    psi_dot = 0.0 if psi_prev is None else wrap_angle(psi - psi_prev) / dt
    omega = -gains.k_omega * wrap_angle(state.heading - psi) + psi_dot
    return UnicycleCommand(upsilon=upsilon, omega=omega, psi=psi)


def unicycle_step(state: UnicycleState, dt: float, upsilon: float,
                  omega: float) -> UnicycleState:
    """One RK4 step of the unicycle with (upsilon, omega) held constant."""

    def rhs(q):
        return np.array([upsilon * math.cos(q[2]), upsilon * math.sin(q[2]), omega])

    q = np.array([state.position[0], state.position[1], state.heading])
    k1 = rhs(q)
    k2 = rhs(q + 0.5 * dt * k1)
    k3 = rhs(q + 0.5 * dt * k2)
    k4 = rhs(q + dt * k3)
    q = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return UnicycleState(position=q[:2], heading=wrap_angle(q[2]))
