"""Team coordination: who talks to whom, who plans how, and what the
connected robots can infer about an isolated teammate.

A robot that permanently loses communication switches to a circular
orbit around its best guess of the jammer.  Healthy teammates watch
out-of-league robots, keep a sliding window of observed positions, and
when a window traces a convincing circle they register the orbit as an
inferred comm danger zone for the whole league.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .estimation import ci_fuse
from .planner import CircleFit, estimate_circle
from .world import (CapState, KnowledgeBase, Provenance, TargetEstimate,
                    WorldState, ZoneKind, ZoneRecord)


class PlanMode(Enum):
    CENTRALIZED = "centralized"
    INDIVIDUAL = "individual"
    CIRCULAR = "circular"
    IDLE = "idle"


@dataclass(frozen=True)
class RobotDirective:
    robot_id: int
    mode: PlanMode
    league_index: int | None = None  # index into the component list


def build_comm_graph(world: WorldState) -> np.ndarray:
    """Adjacency matrix: an edge iff both endpoints' comm is healthy.

    Comm health itself is owned by the hazard activation; the graph never
    re-samples zones.
    """
    m = len(world.robots)
    ok = np.array([r.failure_status.comm is CapState.OK for r in world.robots])
    graph = np.outer(ok, ok)
    np.fill_diagonal(graph, False)
    return graph


def dispatch(world: WorldState, components: list[list[int]],
             vanilla: bool = False) -> list[RobotDirective]:
    """Assign a planning mode to every robot, exactly one directive each.

    Members of a component of size >= 2 plan jointly.  Isolated robots
    plan individually, except: permanent comm loss sends a robot into
    circular evasion (adaptive runs only), and in the baseline an isolated
    robot with permanently dead sensing has nothing left to do and idles.
    """
    directives: list[RobotDirective] = []
    league_of: dict[int, int] = {}
    for idx, comp in enumerate(components):
        if len(comp) >= 2:
            for rid in comp:
                league_of[rid] = idx
    for robot in world.robots:
        rid = robot.id
        if rid in league_of:
            directives.append(RobotDirective(rid, PlanMode.CENTRALIZED, league_of[rid]))
            continue
        status = robot.failure_status
        if not vanilla and status.comm is CapState.PERM_FAILED:
            directives.append(RobotDirective(rid, PlanMode.CIRCULAR))
        elif vanilla and status.sensing is CapState.PERM_FAILED:
            directives.append(RobotDirective(rid, PlanMode.IDLE))
        else:
            directives.append(RobotDirective(rid, PlanMode.INDIVIDUAL))
    return directives


def count_attacked(world: WorldState) -> int:
    """Robots with any capability not OK (the m in the weight slide)."""
    return sum(1 for r in world.robots if r.failure_status.any_failed())


# ---------------------------------------------------------------------------
# peer observation and circle inference


@dataclass
class ObservationBuffers:
    """Sliding windows of observed positions per (observer, observed)."""

    window: int = 30
    buffers: dict[tuple[int, int], deque] = field(default_factory=dict)

    def append(self, observer: int, observed: int, position: np.ndarray) -> None:
        key = (observer, observed)
        if key not in self.buffers:
            self.buffers[key] = deque(maxlen=self.window)
        self.buffers[key].append(position)

    def full_window(self, observer: int, observed: int) -> np.ndarray | None:
        buf = self.buffers.get((observer, observed))
        if buf is None or len(buf) < self.window:
            return None
        return np.stack(list(buf))

    def drop_observed(self, observed: int) -> None:
        for key in [k for k in self.buffers if k[1] == observed]:
            del self.buffers[key]


def observe_peers(world: WorldState, components: list[list[int]],
                  buffers: ObservationBuffers, rng: np.random.Generator,
                  sigma_peer: float = 0.02) -> None:
    """Healthy-sensing robots log noisy positions of out-of-league robots.

    Observation order is (observer asc, observed asc) so the noise stream
    is reproducible.
    """
    comp_of = {rid: tuple(comp) for comp in components for rid in comp}
    for observer in world.robots:
        if observer.failure_status.sensing is not CapState.OK:
            continue
        for observed in world.robots:
            if observed.id == observer.id:
                continue
            if comp_of.get(observer.id) == comp_of.get(observed.id) and \
                    len(comp_of.get(observer.id, ())) >= 2:
                continue  # same league: nothing to infer
            noisy = observed.position + sigma_peer * rng.standard_normal(2)
            buffers.append(observer.id, observed.id, noisy)


# synthetic ids for inferred zones: one slot per observed robot
INFERRED_ZONE_ID_BASE = 10_000


def infer_zone_from_circle(world: WorldState, league: list[int],
                           buffers: ObservationBuffers,
                           residual_frac: float = 0.05,
                           min_arc_deg: float = 270.0,
                           dedup_frac: float = 0.5) -> list[ZoneRecord]:
    """Fit circles to full observation windows and register inferred zones.

    A robot seen orbiting is assumed to be circling a jammer; the fitted
    circle becomes a deterministic keep-out shared with every league
    member.  A fit whose center lands within dedup_frac * radius of an
    already-known comm record merges into it (exact knowledge wins) rather
    than creating a duplicate.
    """
    new_records: list[ZoneRecord] = []
    for observed in sorted({r.id for r in world.robots} - set(league)):
        fit: CircleFit | None = None
        for observer in sorted(league):
            window = buffers.full_window(observer, observed)
            if window is None:
                continue
            fit = estimate_circle(window, residual_frac, min_arc_deg)
            if fit is not None:
                break
        if fit is None:
            continue
        record = ZoneRecord(
            kind=ZoneKind.COMM,
            zone_id=INFERRED_ZONE_ID_BASE + observed,
            center=fit.center.copy(),
            center_cov=np.zeros((2, 2)),
            radius=fit.radius,
            provenance=Provenance.CIRCLE_FIT,
        )
        if _is_duplicate(world.knowledge, league, record, dedup_frac):
            continue
        for rid in league:
            world.knowledge.insert_record(rid, record)
        new_records.append(record)
    return new_records


def _is_duplicate(kb: KnowledgeBase, league: list[int], record: ZoneRecord,
                  dedup_frac: float) -> bool:
    """True when a league member already knows a comm zone at this spot."""
    for rid in league:
        for (kind, zid), existing in kb.records_by_robot.get(rid, {}).items():
            if kind is not ZoneKind.COMM:
                continue
            if zid == record.zone_id:
                continue  # refreshing our own inferred slot is fine
            gap = float(np.linalg.norm(existing.center - record.center))
            if gap <= dedup_frac * record.radius:
                return True
    return False


def on_reconnect(league_estimate: TargetEstimate,
                 solo_estimate: TargetEstimate) -> TargetEstimate:
    """Fuse a rejoining robot's solo belief into the league belief.

    Covariance intersection, because the two filters share unknown common
    history; the solo filter is retired by the caller afterwards.
    """
    return ci_fuse(league_estimate, solo_estimate).estimate
