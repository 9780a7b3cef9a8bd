"""Danger-zone activation: who gets attacked, who recovers, what is learned.

Zones activate on a fixed step period.  Sensing zones attack a robot with
the probability that it sits inside the disc around the Gaussian-
distributed center (Monte Carlo estimate, with a floor: probabilities
below delta1 never fire).  Comm zones jam deterministically against one
shared center realization per tick.  Temporary outages re-evaluate their
triggering condition every tick and lift when it no longer fires;
permanent outages are absorbing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .world import (CapState, CommZone, FailureKind, KnowledgeBase, Provenance,
                    RobotState, SensingZone, WorldState, ZoneKind, ZoneRecord)


@dataclass
class HazardConfig:
    activation_period_steps: int = 10
    delta1: float = 0.1       # probability floor for sensing attacks
    mc_samples: int = 2000    # center samples per probability estimate


class AttackKind(Enum):
    SENSING = "sensing"
    COMM = "comm"


class Transition(Enum):
    ATTACKED = "attacked"
    RECOVERED = "recovered"


@dataclass(frozen=True)
class AttackEvent:
    step: int
    robot_id: int
    kind: AttackKind
    zone_id: int
    transition: Transition


@dataclass
class JamSample:
    position: np.ndarray
    jammed: bool


@dataclass
class HazardState:
    """Bookkeeping that outlives single ticks.

    ``held_centers`` is the comm-center realization drawn at the latest
    activation tick, one per zone; the attacker sits there until the next
    tick, so robots can sample their link state against it every step.
    """

    jam_history: dict[int, list[JamSample]] = field(default_factory=dict)
    held_centers: dict[int, np.ndarray] = field(default_factory=dict)

    def jammed_positions(self, robot_id: int) -> list[np.ndarray]:
        return [s.position for s in self.jam_history.get(robot_id, []) if s.jammed]


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None)))


def sample_centers(mean: np.ndarray, cov: np.ndarray, n: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Draw n center realizations from N(mean, cov); handles singular cov."""
    root = _psd_sqrt(cov)
    return mean[None, :] + rng.standard_normal((n, 2)) @ root.T


def attack_probability_sensing(robot_pos: np.ndarray, zone: SensingZone,
                               mc_samples: int, rng: np.random.Generator) -> float:
    """Monte Carlo estimate of P(||x - X|| <= r), X ~ N(mu, Sigma)."""
    centers = sample_centers(zone.mean_center, zone.center_cov, mc_samples, rng)
    d2 = np.sum((centers - robot_pos[None, :]) ** 2, axis=1)
    return float(np.mean(d2 <= zone.radius ** 2))


def jam_condition(robot_pos: np.ndarray, peer_pos: np.ndarray, zone: CommZone,
                  center_sample: np.ndarray) -> bool:
    """Jammed iff closer to the realized center than delta2 times the
    distance to the nearest teammate (boundary inclusive)."""
    to_center = float(np.linalg.norm(robot_pos - center_sample))
    to_peer = float(np.linalg.norm(robot_pos - peer_pos))
    return to_center <= zone.delta2 * to_peer


def nearest_peer_position(world: WorldState, robot_id: int) -> np.ndarray | None:
    """Position of the physically closest other robot (any health state)."""
    me = world.robots[robot_id].position
    best, best_d = None, np.inf
    for other in world.robots:
        if other.id == robot_id:
            continue
        d = float(np.linalg.norm(other.position - me))
        if d < best_d:
            best, best_d = other.position, d
    return best


def reveal_sensing_zone(kb: KnowledgeBase, robot_id: int, zone: SensingZone) -> None:
    kb.insert_record(robot_id, ZoneRecord(
        kind=ZoneKind.SENSING, zone_id=zone.id,
        center=zone.mean_center.copy(), center_cov=zone.center_cov.copy(),
        radius=zone.radius, provenance=Provenance.TRUE_PARAMS))


def reveal_comm_zone(kb: KnowledgeBase, robot_id: int, zone: CommZone) -> None:
    kb.insert_record(robot_id, ZoneRecord(
        kind=ZoneKind.COMM, zone_id=zone.id,
        center=zone.mean_center.copy(), center_cov=zone.center_cov.copy(),
        delta2=zone.delta2, provenance=Provenance.TRUE_PARAMS))


def activation_tick(world: WorldState, cfg: HazardConfig,
                    rng: np.random.Generator,
                    state: HazardState | None = None) -> list[AttackEvent]:
    """Run one activation tick; mutates robot statuses and knowledge.

    Order (fixed for reproducibility): comm center draws, sensing attacks,
    sensing recoveries, comm attacks/jam sampling, comm recoveries.

    Knowledge side effects: a sensing attack immediately reveals the
    zone's true parameters to the victim (it is still connected and can
    tell the team); recoveries of either kind reveal the triggering
    zone.  A jammed robot learns nothing at attack time - it cannot see
    the jammer, only experience it.
    """
    events: list[AttackEvent] = []
    if state is None:
        state = HazardState()

    # one shared center realization per comm zone per tick, held until the next
    comm_samples: dict[int, np.ndarray] = {}
    for zone in sorted(world.comm_zones, key=lambda z: z.id):
        comm_samples[zone.id] = sample_centers(zone.mean_center, zone.center_cov, 1, rng)[0]
    state.held_centers = comm_samples

    sensing_by_id = {z.id: z for z in world.sensing_zones}

    # --- sensing attacks (healthy robots only)
    struck_this_tick: set[int] = set()
    for robot in world.robots:
        if robot.failure_status.sensing is not CapState.OK:
            continue
        for zone in sorted(world.sensing_zones, key=lambda z: z.id):
            p = attack_probability_sensing(robot.position, zone, cfg.mc_samples, rng)
            if p < cfg.delta1:
                continue
            if rng.random() < p:
                robot.failure_status.sensing = (
                    CapState.TEMP_FAILED if zone.failure_kind is FailureKind.TEMPORARY
                    else CapState.PERM_FAILED)
                robot.sensing_trigger = zone.id
                struck_this_tick.add(robot.id)
                events.append(AttackEvent(world.t, robot.id, AttackKind.SENSING,
                                          zone.id, Transition.ATTACKED))
                reveal_sensing_zone(world.knowledge, robot.id, zone)
                break

    # --- sensing recoveries: the outage persists exactly as long as its
    # triggering condition (attack probability at or above the floor)
    # still holds at the robot's current position, so a robot that stays
    # parked in danger stays dark and one that withdraws comes back the
    # tick it crosses the threshold contour.  A robot struck on this very
    # tick stays down until at least the next one.
    for robot in world.robots:
        if robot.failure_status.sensing is not CapState.TEMP_FAILED:
            continue
        if robot.id in struck_this_tick:
            continue
        zone = sensing_by_id.get(robot.sensing_trigger)
        refire = False
        if zone is not None:
            p = attack_probability_sensing(robot.position, zone, cfg.mc_samples, rng)
            refire = p >= cfg.delta1
        if not refire:
            robot.failure_status.sensing = CapState.OK
            events.append(AttackEvent(world.t, robot.id, AttackKind.SENSING,
                                      robot.sensing_trigger, Transition.RECOVERED))
            if zone is not None:
                reveal_sensing_zone(world.knowledge, robot.id, zone)
            robot.sensing_trigger = None

    # --- comm attacks
    comm_by_id = {z.id: z for z in world.comm_zones}
    for robot in world.robots:
        peer = nearest_peer_position(world, robot.id)
        if peer is None or not world.comm_zones:
            continue
        jammed_by: int | None = None
        for zone in sorted(world.comm_zones, key=lambda z: z.id):
            if jam_condition(robot.position, peer, zone, comm_samples[zone.id]):
                jammed_by = zone.id
                break
        if jammed_by is not None and robot.failure_status.comm is CapState.OK:
            zone = comm_by_id[jammed_by]
            robot.failure_status.comm = (
                CapState.TEMP_FAILED if zone.failure_kind is FailureKind.TEMPORARY
                else CapState.PERM_FAILED)
            robot.comm_trigger = zone.id
            events.append(AttackEvent(world.t, robot.id, AttackKind.COMM,
                                      zone.id, Transition.ATTACKED))

    # --- comm recoveries
    for robot in world.robots:
        if robot.failure_status.comm is not CapState.TEMP_FAILED:
            continue
        zone = comm_by_id.get(robot.comm_trigger)
        peer = nearest_peer_position(world, robot.id)
        refire = (zone is not None and peer is not None and
                  jam_condition(robot.position, peer, zone, comm_samples[zone.id]))
        if not refire:
            robot.failure_status.comm = CapState.OK
            events.append(AttackEvent(world.t, robot.id, AttackKind.COMM,
                                      robot.comm_trigger, Transition.RECOVERED))
            if zone is not None:
                reveal_comm_zone(world.knowledge, robot.id, zone)
            robot.comm_trigger = None

    return events


def log_jam_samples(world: WorldState, state: HazardState) -> None:
    """Record each robot's link state for this step.

    The jammer stays at the center realization held since the last
    activation tick, so whether a robot's link is jammed right now is
    observable every step even though status transitions only happen on
    ticks.  Consumes no randomness.
    """
    if not world.comm_zones or not state.held_centers:
        return
    zones = sorted(world.comm_zones, key=lambda z: z.id)
    for robot in world.robots:
        peer = nearest_peer_position(world, robot.id)
        if peer is None:
            continue
        jammed = any(
            jam_condition(robot.position, peer, zone, state.held_centers[zone.id])
            for zone in zones)
        state.jam_history.setdefault(robot.id, []).append(
            JamSample(robot.position.copy(), jammed))
