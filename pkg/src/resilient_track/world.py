"""Domain state: robots, targets, danger zones, and team knowledge.

The world is a plain mutable snapshot; only the simulator's step
transaction is supposed to mutate it.  Everything here is deliberately
dumb data plus a few pure queries (validation, league partitioning,
knowledge merging).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class CapState(Enum):
    """Health of one capability (sensing or communication)."""

    OK = "ok"
    TEMP_FAILED = "temp_failed"
    PERM_FAILED = "perm_failed"


class FailureKind(Enum):
    TEMPORARY = "temporary"
    PERMANENT = "permanent"


class ZoneKind(Enum):
    SENSING = "sensing"
    COMM = "comm"


class Provenance(Enum):
    TRUE_PARAMS = "true_params"   # revealed exactly (attack experienced / recovery)
    CIRCLE_FIT = "circle_fit"     # inferred by teammates from an orbiting robot


@dataclass
class FailureStatus:
    sensing: CapState = CapState.OK
    comm: CapState = CapState.OK

    def any_failed(self) -> bool:
        return self.sensing is not CapState.OK or self.comm is not CapState.OK


@dataclass
class RobotState:
    id: int
    position: np.ndarray  # [x, y]
    failure_status: FailureStatus = field(default_factory=FailureStatus)
    cooldown_remaining: int = 0
    # zone ids that caused the current outages (None when healthy);
    # needed to re-evaluate temporary failures at activation ticks.
    sensing_trigger: int | None = None
    comm_trigger: int | None = None


@dataclass
class TargetState:
    id: int
    state: np.ndarray  # [px, py, vx, vy]


@dataclass
class TargetEstimate:
    """Stacked Gaussian belief over all targets (4 states per target)."""

    mean: np.ndarray        # (4N,)
    covariance: np.ndarray  # (4N, 4N)

    @property
    def num_targets(self) -> int:
        return self.mean.shape[0] // 4

    def copy(self) -> "TargetEstimate":
        return TargetEstimate(self.mean.copy(), self.covariance.copy())


@dataclass
class SensingZone:
    """Disc-shaped sensor-attack region with a Gaussian-distributed center."""

    id: int
    mean_center: np.ndarray  # (2,)
    center_cov: np.ndarray   # (2, 2), PSD
    radius: float
    failure_kind: FailureKind = FailureKind.TEMPORARY


@dataclass
class CommZone:
    """Jamming source with a Gaussian-distributed center.

    A robot is jammed when it sits closer to the (sampled) center than
    delta2 times its distance to the nearest teammate.
    """

    id: int
    mean_center: np.ndarray  # (2,)
    center_cov: np.ndarray   # (2, 2), PSD
    delta2: float
    failure_kind: FailureKind = FailureKind.TEMPORARY


@dataclass
class ZoneRecord:
    """What some robot believes about one danger zone.

    ``radius`` is the keep-out radius (sensing zones, and comm zones
    inferred by circle fitting); ``delta2`` is set for comm zones known
    exactly.  Circle-fit records have zero center covariance by
    construction: the fit is treated as a deterministic keep-out.
    """

    kind: ZoneKind
    zone_id: int
    center: np.ndarray       # (2,)
    center_cov: np.ndarray   # (2, 2)
    radius: float | None = None
    delta2: float | None = None
    provenance: Provenance = Provenance.TRUE_PARAMS


RecordKey = tuple[ZoneKind, int]


@dataclass
class KnowledgeBase:
    """Per-robot revealed zone ids plus the league-shared view.

    ``league_sensing``/``league_comm`` mirror the most recent merge; with
    several simultaneous leagues, callers should rely on
    :func:`shared_zone_ids` for a specific league instead.
    """

    sensing_by_robot: dict[int, set[int]]
    comm_by_robot: dict[int, set[int]]
    league_sensing: set[int] = field(default_factory=set)
    league_comm: set[int] = field(default_factory=set)
    records_by_robot: dict[int, dict[RecordKey, ZoneRecord]] = field(default_factory=dict)

    @classmethod
    def empty(cls, num_robots: int) -> "KnowledgeBase":
        return cls(
            sensing_by_robot={i: set() for i in range(num_robots)},
            comm_by_robot={i: set() for i in range(num_robots)},
            records_by_robot={i: {} for i in range(num_robots)},
        )

    def insert_record(self, robot_id: int, record: ZoneRecord) -> None:
        """Add a record to one robot's store, honoring provenance preference."""
        store = self.records_by_robot.setdefault(robot_id, {})
        key = (record.kind, record.zone_id)
        store[key] = _prefer_record(store.get(key), record)
        ids = (self.sensing_by_robot if record.kind is ZoneKind.SENSING
               else self.comm_by_robot)
        ids.setdefault(robot_id, set()).add(record.zone_id)


def _prefer_record(old: ZoneRecord | None, new: ZoneRecord) -> ZoneRecord:
    # Exact knowledge beats an inferred circle; ties go to the newer record.
    if old is None:
        return new
    if old.provenance is Provenance.TRUE_PARAMS and new.provenance is Provenance.CIRCLE_FIT:
        return old
    return new


@dataclass
class WorldState:
    t: int
    robots: list[RobotState]
    targets: list[TargetState]
    sensing_zones: list[SensingZone]
    comm_zones: list[CommZone]
    knowledge: KnowledgeBase
    estimate_league: TargetEstimate
    estimate_solo: dict[int, TargetEstimate] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# queries


def validate_world(w: WorldState, cooldown_length: int = 10,
                   v_max: float | None = None) -> list[str]:
    """Return human-readable invariant violations (empty list when clean)."""
    problems: list[str] = []

    for idx, robot in enumerate(w.robots):
        if robot.id != idx:
            problems.append(f"robot at index {idx} has id {robot.id}; ids must be 0..M-1 in order")
        if robot.position.shape != (2,) or not np.all(np.isfinite(robot.position)):
            problems.append(f"robot {robot.id}: position must be a finite 2-vector")
        if not (0 <= robot.cooldown_remaining <= cooldown_length):
            problems.append(
                f"robot {robot.id}: cooldown_remaining {robot.cooldown_remaining} "
                f"outside [0, {cooldown_length}]")

    for idx, target in enumerate(w.targets):
        if target.id != idx:
            problems.append(f"target at index {idx} has id {target.id}; ids must be 0..N-1 in order")
        if target.state.shape != (4,) or not np.all(np.isfinite(target.state)):
            problems.append(f"target {target.id}: state must be a finite 4-vector")
        elif v_max is not None:
            speed = float(np.hypot(target.state[2], target.state[3]))
            if speed > v_max * (1 + 1e-9):
                problems.append(f"target {target.id}: speed {speed:.6g} exceeds v_max {v_max:.6g}")

    est = w.estimate_league
    problems += _check_estimate(est, "league estimate", len(w.targets))
    for rid, solo in sorted(w.estimate_solo.items()):
        problems += _check_estimate(solo, f"solo estimate (robot {rid})", len(w.targets))

    for zone in w.sensing_zones:
        if zone.radius <= 0:
            problems.append(f"sensing zone {zone.id}: radius {zone.radius} must be > 0")
        problems += _check_psd(zone.center_cov, f"sensing zone {zone.id} center_cov")
    for zone in w.comm_zones:
        if zone.delta2 <= 0:
            problems.append(f"comm zone {zone.id}: delta2 {zone.delta2} must be > 0")
        problems += _check_psd(zone.center_cov, f"comm zone {zone.id} center_cov")

    return problems


def _check_estimate(est: TargetEstimate, label: str, num_targets: int) -> list[str]:
    problems = []
    n = 4 * num_targets
    if est.mean.shape != (n,):
        problems.append(f"{label}: mean shape {est.mean.shape} != ({n},)")
        return problems
    if est.covariance.shape != (n, n):
        problems.append(f"{label}: covariance shape {est.covariance.shape} != ({n}, {n})")
        return problems
    asym = float(np.max(np.abs(est.covariance - est.covariance.T))) if n else 0.0
    if asym > 1e-9:
        problems.append(f"{label}: covariance asymmetry {asym:.3e} exceeds 1e-9")
        return problems
    if n:
        sym = 0.5 * (est.covariance + est.covariance.T)
        min_eig = float(np.linalg.eigvalsh(sym).min())
        if min_eig <= 0:
            problems.append(f"{label}: covariance not positive definite (min eig {min_eig:.3e})")
    return problems


def _check_psd(mat: np.ndarray, label: str) -> list[str]:
    if mat.shape != (2, 2):
        return [f"{label}: shape {mat.shape} != (2, 2)"]
    if float(np.max(np.abs(mat - mat.T))) > 1e-9:
        return [f"{label}: not symmetric"]
    if float(np.linalg.eigvalsh(0.5 * (mat + mat.T)).min()) < -1e-12:
        return [f"{label}: not positive semidefinite"]
    return []


def league_members(w: WorldState, comm_graph: np.ndarray) -> list[list[int]]:
    """Partition robot ids into connected components of the comm graph.

    Components are sorted by their smallest member; members are sorted.
    Size >= 2 components are leagues, singletons are isolated robots.
    """
    m = len(w.robots)
    seen = [False] * m
    components: list[list[int]] = []
    for start in range(m):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(m):
                if not seen[j] and comm_graph[i, j]:
                    seen[j] = True
                    stack.append(j)
        components.append(sorted(comp))
    components.sort(key=lambda c: c[0])
    return components


def shared_zone_ids(kb: KnowledgeBase, league: list[int],
                    kind: ZoneKind) -> set[int]:
    """Union of the members' individually revealed zone ids."""
    per_robot = kb.sensing_by_robot if kind is ZoneKind.SENSING else kb.comm_by_robot
    out: set[int] = set()
    for rid in league:
        out |= per_robot.get(rid, set())
    return out


def resolve_records(kb: KnowledgeBase, league: list[int]) -> dict[RecordKey, ZoneRecord]:
    """Combine the members' record stores with provenance preference."""
    merged: dict[RecordKey, ZoneRecord] = {}
    for rid in sorted(league):
        for key in sorted(kb.records_by_robot.get(rid, {}), key=lambda k: (k[0].value, k[1])):
            rec = kb.records_by_robot[rid][key]
            merged[key] = _prefer_record(merged.get(key), rec)
    return merged


def merge_knowledge(kb: KnowledgeBase, league: list[int]) -> KnowledgeBase:
    """Share everything the league members know with each other.

    Returns a new knowledge base; the input is left untouched.  Individual
    sets of the members become the member union, the league-shared sets
    mirror that union, and parameter records merge with provenance
    preference (exact knowledge wins over circle fits).
    """
    out = KnowledgeBase(
        sensing_by_robot={r: set(v) for r, v in kb.sensing_by_robot.items()},
        comm_by_robot={r: set(v) for r, v in kb.comm_by_robot.items()},
        league_sensing=set(kb.league_sensing),
        league_comm=set(kb.league_comm),
        records_by_robot={r: dict(v) for r, v in kb.records_by_robot.items()},
    )
    union_s = shared_zone_ids(kb, league, ZoneKind.SENSING)
    union_c = shared_zone_ids(kb, league, ZoneKind.COMM)
    merged_records = resolve_records(kb, league)
    for rid in league:
        out.sensing_by_robot[rid] = set(union_s)
        out.comm_by_robot[rid] = set(union_c)
        out.records_by_robot[rid] = dict(merged_records)
    out.league_sensing = set(union_s)
    out.league_comm = set(union_c)
    return out


def copy_world(w: WorldState) -> WorldState:
    """Deep snapshot (used by tests; the simulator mutates in place)."""
    return copy.deepcopy(w)
