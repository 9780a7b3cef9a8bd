"""Kinematics and range-bearing sensing.

Targets follow a constant-velocity model driven by a simple velocity
controller; robots are single integrators.  Sensors return range and
bearing whose noise grows exponentially with distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .world import RobotState, TargetState, TargetEstimate, CapState


class DegenerateGeometryError(ValueError):
    """Robot and target (nearly) coincide; the measurement map is singular."""


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return float(-((-a + np.pi) % (2.0 * np.pi) - np.pi))


# ---------------------------------------------------------------------------
# target model


def cv_transition(dt: float) -> np.ndarray:
    """Constant-velocity transition for one [px, py, vx, vy] block."""
    a = np.eye(4)
    a[0, 2] = dt
    a[1, 3] = dt
    return a


def cv_control_matrix() -> np.ndarray:
    """Control enters as a velocity correction."""
    b = np.zeros((4, 2))
    b[2, 0] = 1.0
    b[3, 1] = 1.0
    return b


def cv_process_noise(dt: float, intensity: float) -> np.ndarray:
    """White-acceleration process noise for one target block."""
    q = float(intensity)
    pos = q * dt ** 3 / 3.0
    cross = q * dt ** 2 / 2.0
    vel = q * dt
    out = np.zeros((4, 4))
    out[0, 0] = out[1, 1] = pos
    out[0, 2] = out[2, 0] = cross
    out[1, 3] = out[3, 1] = cross
    out[2, 2] = out[3, 3] = vel
    return out


@dataclass
class WaypointPlan:
    """Cyclic waypoint route for one target."""

    waypoints: list[np.ndarray]
    current: int = 0


@dataclass
class TargetModel:
    """Shared dynamics plus the per-target controller.

    The controller produces a velocity correction v so that the velocity
    relaxes toward a clamped desired velocity: with a waypoint at the
    current position the speed decays by (1 - velocity_gain) per step.
    ``plans`` is None for drifting (zero-input) targets.
    """

    dt: float
    q_intensity: float = 0.005
    v_max: float = 0.35
    waypoint_gain: float = 0.7
    velocity_gain: float = 0.5
    capture_radius: float = 0.2
    plans: list[WaypointPlan] | None = None

    @property
    def A(self) -> np.ndarray:
        return cv_transition(self.dt)

    @property
    def B(self) -> np.ndarray:
        return cv_control_matrix()

    @property
    def Q(self) -> np.ndarray:
        return cv_process_noise(self.dt, self.q_intensity)

    def control_for(self, target: TargetState) -> np.ndarray:
        """Velocity correction for one target (zero when drifting)."""
        if self.plans is None:
            return np.zeros(2)
        plan = self.plans[target.id]
        if not plan.waypoints:
            return np.zeros(2)
        pos = target.state[:2]
        wp = plan.waypoints[plan.current]
        if float(np.linalg.norm(wp - pos)) < self.capture_radius:
            plan.current = (plan.current + 1) % len(plan.waypoints)
            wp = plan.waypoints[plan.current]
        v_des = self.waypoint_gain * (wp - pos)
        speed = float(np.linalg.norm(v_des))
        if speed > self.v_max:
            v_des *= self.v_max / speed
        return self.velocity_gain * (v_des - target.state[2:])


def step_targets(targets: list[TargetState], model: TargetModel,
                 rng: np.random.Generator) -> list[TargetState]:
    """Advance every target one step: y' = A y + B v + w, w ~ N(0, Q).

    Noise is drawn per target in id order.  The resulting speed is clamped
    to v_max (the low-level limiter of the target vehicle).
    """
    a, b, q = model.A, model.B, model.Q
    chol = _psd_sqrt(q)
    out = []
    for target in targets:
        v = model.control_for(target)
        noise = chol @ rng.standard_normal(4)
        state = a @ target.state + b @ v + noise
        speed = float(np.hypot(state[2], state[3]))
        if speed > model.v_max:
            state = state.copy()
            state[2:] *= model.v_max / speed
        out.append(TargetState(target.id, state))
    return out


def step_robot(robot: RobotState, u: np.ndarray, dt: float,
               u_max: float) -> RobotState:
    """Single-integrator robot update x' = x + dt * u with ||u|| <= u_max."""
    u = np.asarray(u, dtype=float)
    norm = float(np.linalg.norm(u))
    if norm > u_max * (1 + 1e-9):
        raise ValueError(f"control norm {norm:.6g} exceeds bound {u_max:.6g}")
    return RobotState(
        id=robot.id,
        position=robot.position + dt * u,
        failure_status=robot.failure_status,
        cooldown_remaining=robot.cooldown_remaining,
        sensing_trigger=robot.sensing_trigger,
        comm_trigger=robot.comm_trigger,
    )


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Symmetric square root that tolerates singular PSD matrices."""
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    vals = np.clip(vals, 0.0, None)
    return vecs @ np.diag(np.sqrt(vals))


# ---------------------------------------------------------------------------
# sensing


@dataclass
class NoiseParams:
    """Range/bearing noise, growing exponentially with distance.

    Variances are sigma^2 * exp(gamma * d); ``max_range`` of None means
    an unlimited sensor.  ``range_softness`` only affects planning: real
    measurements cut off hard at max_range, but the planner's
    information model rolls off over this length scale so a gradient
    solver can feel where coverage ends.
    """

    sigma_r: float = 0.05
    sigma_b: float = 0.05
    gamma: float = 0.1
    max_range: float | None = None
    range_softness: float = 0.25
    d_min: float = 1e-6


@dataclass
class Measurement:
    robot_id: int
    target_id: int
    range: float
    bearing: float
    noise_cov: np.ndarray      # (2, 2) diag, evaluated at the true distance
    robot_position: np.ndarray  # (2,) where the sensor was when it fired


def measurement_noise_cov(d: float, noise: NoiseParams) -> np.ndarray:
    scale = math.exp(noise.gamma * d)
    return np.diag([noise.sigma_r ** 2 * scale, noise.sigma_b ** 2 * scale])


def measure(robot: RobotState, target: TargetState, rng: np.random.Generator,
            noise: NoiseParams) -> Measurement | None:
    """One noisy range-bearing measurement, or None if the sensor is down
    or the target is out of range.

    Exactly two normal draws are consumed per successful measurement
    (range first, bearing second) so sequences stay reproducible.
    """
    if robot.failure_status.sensing is not CapState.OK:
        return None
    delta = target.state[:2] - robot.position
    d = float(np.linalg.norm(delta))
    if noise.max_range is not None and d > noise.max_range:
        return None
    cov = measurement_noise_cov(d, noise)
    eta = rng.standard_normal(2)
    rng_meas = max(d + math.sqrt(cov[0, 0]) * eta[0], 0.0)
    bearing = wrap_angle(math.atan2(delta[1], delta[0]) + math.sqrt(cov[1, 1]) * eta[1])
    return Measurement(robot.id, target.id, rng_meas, bearing, cov, robot.position.copy())


def measurement_jacobian(robot_pos: np.ndarray, target_state: np.ndarray,
                         d_min: float = 1e-6) -> np.ndarray:
    """2x4 Jacobian of [range, bearing] w.r.t. one target's state block."""
    dx = float(target_state[0] - robot_pos[0])
    dy = float(target_state[1] - robot_pos[1])
    d2 = dx * dx + dy * dy
    d = math.sqrt(d2)
    if d < d_min:
        raise DegenerateGeometryError(f"robot/target distance {d:.3e} below {d_min:.3e}")
    h = np.zeros((2, 4))
    h[0, 0] = dx / d
    h[0, 1] = dy / d
    h[1, 0] = -dy / d2
    h[1, 1] = dx / d2
    return h


@dataclass
class MeasurementStack:
    """Stacked measurement system ready for a filter update.

    ``z``/``H``/``R`` follow (robot id, target id) row ordering; two rows
    per measurement (range, then bearing).  ``predicted`` is the
    measurement map evaluated at the predicted estimate, ``angle_mask``
    flags the bearing rows whose innovations need wrapping.
    """

    z: np.ndarray
    H: np.ndarray
    R: np.ndarray
    predicted: np.ndarray
    angle_mask: np.ndarray


def stack_measurements(measurements: list[Measurement],
                       predicted: TargetEstimate,
                       standoff_floor: float = 1e-3) -> MeasurementStack:
    """Assemble the joint (z, H, R) system from individual measurements.

    A sensor sitting (nearly) on top of a predicted target would make the
    bearing Jacobian blow up, so the linearization point is pushed out to
    ``standoff_floor`` along the line of sight; the measurement itself is
    kept as taken.
    """
    n_states = predicted.mean.shape[0]
    ordered = sorted(measurements, key=lambda m: (m.robot_id, m.target_id))
    k = len(ordered)
    z = np.zeros(2 * k)
    pred_z = np.zeros(2 * k)
    big_h = np.zeros((2 * k, n_states))
    big_r = np.zeros((2 * k, 2 * k))
    angle_mask = np.zeros(2 * k, dtype=bool)
    for row, meas in enumerate(ordered):
        sl = slice(2 * row, 2 * row + 2)
        block = predicted.mean[4 * meas.target_id: 4 * meas.target_id + 4]
        delta = block[:2] - meas.robot_position
        d = float(np.linalg.norm(delta))
        if d < standoff_floor:
            direction = delta / d if d > 0.0 else np.array([1.0, 0.0])
            block = block.copy()
            block[:2] = meas.robot_position + standoff_floor * direction
            delta = block[:2] - meas.robot_position
        big_h[sl, 4 * meas.target_id: 4 * meas.target_id + 4] = \
            measurement_jacobian(meas.robot_position, block)
        big_r[sl, sl] = meas.noise_cov
        z[2 * row] = meas.range
        z[2 * row + 1] = meas.bearing
        pred_z[2 * row] = float(np.linalg.norm(delta))
        pred_z[2 * row + 1] = wrap_angle(math.atan2(delta[1], delta[0]))
        angle_mask[2 * row + 1] = True
    return MeasurementStack(z, big_h, big_r, pred_z, angle_mask)
