"""Plant models and control laws against closed-form oracles.

The damped double integrator with constant force and the unicycle with
constant speed and turn rate both have exact solutions; RK4 must land on
them to 1e-8 at dt=1e-3 and show fourth-order error scaling.
"""

import math

import numpy as np
import pytest

from homingvf.dynamics import (
    ControlGains,
    DoubleIntegratorState,
    UnicycleState,
    di_control,
    di_step,
    unicycle_control,
    unicycle_step,
    wrap_angle,
)
from homingvf.fields import BumpParams, FieldContext, HomeSpec, select_pair, v_field
from homingvf.geometry import LandmarkSet

TRIANGLE = LandmarkSet(foci=np.array([[0.0, 0.0], [1.0, 0.2], [0.4, 0.9]]))


def make_context(home=(2.0, 1.0), fov=2.0, eps=0.01):
    spec = HomeSpec.from_home_position(TRIANGLE, np.asarray(home, float), fov)
    return FieldContext(landmarks=TRIANGLE, home=spec,
                        bump=BumpParams(epsilon=eps))


def di_closed_form(x0, v0, mu, lam, t):
    """Exact solution of x'' = -lam x' + mu with constant mu."""
    vinf = mu / lam
    vel = vinf + (v0 - vinf) * math.exp(-lam * t)
    pos = x0 + vinf * t + (v0 - vinf) * (1 - math.exp(-lam * t)) / lam
    return pos, vel


def integrate_di(state, gains, dt, mu, t_end):
    n = int(round(t_end / dt))
    for _ in range(n):
        state = di_step(state, gains, dt, mu)
    return state


def arc_closed_form(x0, theta0, upsilon, omega, t):
    if omega == 0.0:
        return (x0 + upsilon * t * np.array([math.cos(theta0),
                                             math.sin(theta0)]), theta0)
    dx = upsilon / omega * (math.sin(theta0 + omega * t) - math.sin(theta0))
    dy = upsilon / omega * (-math.cos(theta0 + omega * t) + math.cos(theta0))
    return x0 + np.array([dx, dy]), theta0 + omega * t


# --- wrapping and validation -------------------------------------------------

def test_wrap_angle_cases():
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle(2 * math.pi) == pytest.approx(0.0, abs=1e-15)
    assert wrap_angle(-0.1) == pytest.approx(-0.1)
    assert wrap_angle(7.0) == pytest.approx(7.0 - 2 * math.pi)
    for a in np.linspace(-20, 20, 101):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-12)
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-12)


def test_control_gains_validation():
    g = ControlGains()
    assert (g.lambda0, g.k_v, g.k_omega) == (1.0, 1.0, 2.0)
    for bad in ({"lambda0": 0.0}, {"k_v": -1.0}, {"k_omega": 0.0}):
        with pytest.raises(ValueError):
            ControlGains(**bad)


def test_state_validation():
    with pytest.raises(ValueError):
        DoubleIntegratorState(position=np.zeros(2), velocity=np.zeros(3))
    with pytest.raises(ValueError):
        DoubleIntegratorState(position=np.zeros(4), velocity=np.zeros(4))
    with pytest.raises(ValueError):
        UnicycleState(position=np.zeros(3), heading=0.0)
    with pytest.raises(ValueError):
        UnicycleState(position=np.zeros(2), heading=4.0)
    with pytest.raises(ValueError):
        UnicycleState(position=np.zeros(2), heading=-math.pi)
    assert UnicycleState(position=np.zeros(2), heading=math.pi).heading == math.pi


# --- double integrator -------------------------------------------------------

def test_di_velocity_decay_matches_closed_form():
    gains = ControlGains(lambda0=1.0)
    state = DoubleIntegratorState(position=np.zeros(2),
                                  velocity=np.array([1.0, -0.5]))
    state = integrate_di(state, gains, 1e-3, np.zeros(2), 1.0)
    for axis in range(2):
        pos, vel = di_closed_form(0.0, [1.0, -0.5][axis], 0.0, 1.0, 1.0)
        assert state.velocity[axis] == pytest.approx(vel, rel=1e-8)
        assert state.position[axis] == pytest.approx(pos, rel=1e-8)


def test_di_constant_force_matches_closed_form():
    gains = ControlGains(lambda0=0.7)
    mu = np.array([0.3, -0.2, 0.1])
    state = DoubleIntegratorState(position=np.array([1.0, 2.0, -1.0]),
                                  velocity=np.array([0.0, 0.5, 0.2]))
    state = integrate_di(state, gains, 1e-3, mu, 2.0)
    for axis in range(3):
        pos, vel = di_closed_form([1.0, 2.0, -1.0][axis],
                                  [0.0, 0.5, 0.2][axis],
                                  mu[axis], 0.7, 2.0)
        assert state.position[axis] == pytest.approx(pos, rel=1e-8)
        assert state.velocity[axis] == pytest.approx(vel, rel=1e-8)


def test_di_rest_is_fixed_point_without_force():
    gains = ControlGains()
    state = DoubleIntegratorState(position=np.array([2.0, 1.0]),
                                  velocity=np.zeros(2))
    stepped = di_step(state, gains, 1e-3, np.zeros(2))
    assert np.array_equal(stepped.position, state.position)
    assert np.array_equal(stepped.velocity, state.velocity)


def test_di_rk4_order_four():
    gains = ControlGains(lambda0=1.3)
    mu = np.array([0.4, -0.1])
    x0 = np.array([0.0, 0.0])
    v0 = np.array([1.0, 0.3])
    errs = []
    dts = [1e-2, 5e-3, 2.5e-3]
    for dt in dts:
        state = DoubleIntegratorState(position=x0, velocity=v0)
        state = integrate_di(state, gains, dt, mu, 1.0)
        exact = np.array([di_closed_form(x0[a], v0[a], mu[a], 1.3, 1.0)
                          for a in range(2)])
        err = np.linalg.norm(state.position - exact[:, 0]) \
            + np.linalg.norm(state.velocity - exact[:, 1])
        errs.append(err)
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert slope == pytest.approx(4.0, rel=0.2)


def test_di_kinetic_energy_decays_without_force():
    rng = np.random.default_rng(71)
    gains = ControlGains(lambda0=0.8)
    for _ in range(5):
        state = DoubleIntegratorState(position=rng.normal(size=2),
                                      velocity=rng.normal(size=2))
        prev = np.inf
        for _ in range(200):
            state = di_step(state, gains, 5e-3, np.zeros(2))
            energy = 0.5 * float(state.velocity @ state.velocity)
            assert energy < prev
            prev = energy


def test_di_control_is_field_value():
    context = make_context()
    state = DoubleIntegratorState(position=np.array([3.5, -0.5]),
                                  velocity=np.zeros(2))
    mu = di_control(context, state)
    assert np.array_equal(mu, context.sample(state.position).f)
    at_home = DoubleIntegratorState(position=np.array([2.0, 1.0]),
                                    velocity=np.zeros(2))
    assert np.linalg.norm(di_control(context, at_home)) <= 1e-8


# --- unicycle ----------------------------------------------------------------

def test_unicycle_straight_line_step():
    state = UnicycleState(position=np.zeros(2), heading=0.0)
    stepped = unicycle_step(state, 1e-3, 1.0, 0.0)
    assert np.allclose(stepped.position, [1e-3, 0.0], atol=1e-18)
    assert stepped.heading == 0.0


def test_unicycle_pure_rotation_step():
    state = UnicycleState(position=np.array([1.0, 1.0]), heading=0.5)
    stepped = unicycle_step(state, 1e-3, 0.0, 1.0)
    assert np.array_equal(stepped.position, state.position)
    assert stepped.heading == pytest.approx(0.501, abs=1e-15)


def test_unicycle_arc_matches_closed_form():
    state = UnicycleState(position=np.zeros(2), heading=0.0)
    dt = 1e-3
    for _ in range(1000):
        state = unicycle_step(state, dt, 1.0, 1.0)
    exact_pos, exact_theta = arc_closed_form(np.zeros(2), 0.0, 1.0, 1.0, 1.0)
    assert np.allclose(state.position, exact_pos, rtol=1e-8)
    assert state.heading == pytest.approx(exact_theta, rel=1e-8)


def test_unicycle_rk4_order_four():
    errs = []
    dts = [1e-2, 5e-3, 2.5e-3]
    for dt in dts:
        state = UnicycleState(position=np.zeros(2), heading=0.3)
        n = int(round(1.0 / dt))
        for _ in range(n):
            state = unicycle_step(state, dt, 1.2, 0.9)
        exact_pos, _ = arc_closed_form(np.zeros(2), 0.3, 1.2, 0.9, 1.0)
        errs.append(np.linalg.norm(state.position - exact_pos))
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert slope == pytest.approx(4.0, rel=0.2)


def test_unicycle_heading_rewrapped_across_pi():
    state = UnicycleState(position=np.zeros(2), heading=math.pi - 1e-3)
    stepped = unicycle_step(state, 1e-2, 0.0, 1.0)
    assert -math.pi < stepped.heading <= math.pi
    assert stepped.heading == pytest.approx(-math.pi + 9e-3, abs=1e-12)


def test_unicycle_control_formula_against_recomputation():
    context = make_context()
    gains = ControlGains(k_v=1.5, k_omega=2.0)
    rng = np.random.default_rng(73)
    for _ in range(20):
        pos = rng.uniform(-4, 4, size=2)
        v = v_field(pos, TRIANGLE)
        if v is None:
            continue
        state = UnicycleState(position=pos,
                              heading=float(rng.uniform(-math.pi, math.pi)))
        cmd = unicycle_control(context, state, gains, None, 0.01)
        sample = context.sample(pos)
        if np.linalg.norm(sample.f_unit) == 0.0:
            assert cmd.upsilon == 0.0 and cmd.omega == 0.0
            continue
        expected_upsilon = gains.k_v * (
            math.sqrt(max(0.0, 1.0 - float(v @ context.home.v_star)))
            + abs(select_pair(pos, TRIANGLE, context.home).delta))
        assert cmd.upsilon == pytest.approx(expected_upsilon, rel=1e-12)
        assert cmd.psi == pytest.approx(
            math.atan2(sample.f_unit[1], sample.f_unit[0]))
        assert cmd.omega == pytest.approx(
            -gains.k_omega * wrap_angle(state.heading - cmd.psi), rel=1e-12)
        assert cmd.upsilon >= 0.0


def test_unicycle_control_stops_at_home():
    context = make_context()
    state = UnicycleState(position=np.array([2.0, 1.0]), heading=1.0)
    cmd = unicycle_control(context, state, ControlGains(), None, 0.01)
    assert cmd.upsilon == 0.0
    assert cmd.omega == 0.0


def test_unicycle_control_aligned_heading_gives_zero_turn():
    context = make_context()
    pos = np.array([3.5, -0.5])
    sample = context.sample(pos)
    psi = math.atan2(sample.f_unit[1], sample.f_unit[0])
    state = UnicycleState(position=pos, heading=wrap_angle(psi))
    cmd = unicycle_control(context, state, ControlGains(), None, 0.01)
    assert cmd.omega == pytest.approx(0.0, abs=1e-12)


def test_unicycle_control_feeds_forward_heading_rate():
    context = make_context()
    pos = np.array([3.5, -0.5])
    state = UnicycleState(position=pos, heading=0.2)
    gains = ControlGains()
    dt = 0.01
    first = unicycle_control(context, state, gains, None, dt)
    psi_prev = first.psi - 0.05   # pretend the target rotated last period
    second = unicycle_control(context, state, gains, psi_prev, dt)
    feedforward = wrap_angle(second.psi - psi_prev) / dt
    base = -gains.k_omega * wrap_angle(state.heading - second.psi)
    assert second.omega == pytest.approx(base + feedforward, rel=1e-12)


def test_unicycle_control_wraps_heading_error():
    # Heading and target on opposite sides of the pi seam must give a
    # small command, not one proportional to 2*pi.
    context = make_context()
    pos = np.array([3.5, -0.5])
    sample = context.sample(pos)
    psi = math.atan2(sample.f_unit[1], sample.f_unit[0])
    off = wrap_angle(psi + math.pi - 0.05)
    state = UnicycleState(position=pos, heading=off)
    cmd = unicycle_control(context, state, ControlGains(k_omega=2.0), None, 0.01)
    assert abs(cmd.omega) <= 2.0 * math.pi


def test_heading_error_decays_at_commanded_rate():
    # Frozen target: regulate theta to a constant psi and fit the decay
    # rate over one second; it must match k_omega within 5%.
    psi = 0.8
    k_omega = 2.0
    state = UnicycleState(position=np.zeros(2), heading=-1.2)
    dt = 1e-3
    e0 = abs(wrap_angle(state.heading - psi))
    for _ in range(1000):
        omega = -k_omega * wrap_angle(state.heading - psi)
        state = unicycle_step(state, dt, 0.0, omega)
    e1 = abs(wrap_angle(state.heading - psi))
    rate = -math.log(e1 / e0) / 1.0
    assert rate == pytest.approx(k_omega, rel=0.05)


def test_stepping_is_deterministic():
    context = make_context()
    gains = ControlGains()

    def run():
        state = UnicycleState(position=np.array([3.5, -0.5]), heading=2.0)
        psi_prev = None
        out = []
        for _ in range(500):
            cmd = unicycle_control(context, state, gains, psi_prev, 0.01)
            state = unicycle_step(state, 0.01, cmd.upsilon, cmd.omega)
            psi_prev = cmd.psi
            out.append((*state.position, state.heading))
        return np.array(out)

    a = run()
    b = run()
    assert np.array_equal(a, b)
