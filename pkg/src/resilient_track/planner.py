"""Failure-aware motion planning.

One optimizer serves every planning flavor: it minimizes

    w1 * (trace of the one-step-lookahead posterior covariance)
  + w2 * (control effort)
  + w3 * (hinge slacks of sensing-zone keep-out margins)
  + w4 * (hinge slacks of comm-zone keep-out margins)

over the team controls, subject to per-robot speed bounds (projection).
Keep-out margins are chance constraints against the Gaussian-distributed
zone centers, tightened by erf_inv(1 - 2*eps).  The weight set slides
between a "risky" and a "safe" endpoint with the fraction of robots
currently suffering a failure.

Also here: the circular evasion controller used under permanent comm
failure, the circle fit teammates use to recognize it, and the jam-sample
centroid that seeds the orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimation import ekf_predict
from .motion import NoiseParams, TargetModel
from .world import (CapState, Provenance, RecordKey, TargetEstimate,
                    WorldState, ZoneKind, ZoneRecord)


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightSet:
    w1: float  # tracking
    w2: float  # effort
    w3: float  # sensing-zone slack penalty
    w4: float  # comm-zone slack penalty
    w5: float  # keep-out radius inflation

    def __post_init__(self):
        for name in ("w1", "w2", "w3", "w4", "w5"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


RISKY_DEFAULT = WeightSet(w1=1.0, w2=0.05, w3=2.0, w4=2.0, w5=0.0)
SAFE_DEFAULT = WeightSet(w1=0.3, w2=0.1, w3=20.0, w4=20.0, w5=0.5)


@dataclass
class AdaptiveWeightConfig:
    risky: WeightSet = RISKY_DEFAULT
    safe: WeightSet = SAFE_DEFAULT
    cooldown_length: int = 10


def adaptive_weights(cfg: AdaptiveWeightConfig, team_size: int,
                     num_attacked: int) -> WeightSet:
    """Interpolate between the endpoints by the attacked fraction.

    Each component follows  w = w_risky - (m/M) * (w_risky - w_safe);
    m = 0 and m = M return the configured endpoint sets bit-exactly.
    """
    if team_size < 1:
        raise ValueError("team_size must be >= 1")
    if not 0 <= num_attacked <= team_size:
        raise ValueError("num_attacked must be in [0, team_size]")
    if num_attacked == 0:
        return cfg.risky
    if num_attacked == team_size:
        return cfg.safe
    frac = num_attacked / team_size
    blend = lambda a, b: a - frac * (a - b)
    return WeightSet(
        w1=blend(cfg.risky.w1, cfg.safe.w1),
        w2=blend(cfg.risky.w2, cfg.safe.w2),
        w3=blend(cfg.risky.w3, cfg.safe.w3),
        w4=blend(cfg.risky.w4, cfg.safe.w4),
        w5=blend(cfg.risky.w5, cfg.safe.w5),
    )


# ---------------------------------------------------------------------------
# inverse error function


def erf_inv(y: float) -> float:
    """Inverse of erf on (-1, 1).

    A rational/log initial guess polished with Newton steps on math.erf;
    absolute error stays below 1e-9 across the domain.
    """
    if not -1.0 < y < 1.0:
        raise ValueError(f"erf_inv domain is (-1, 1); got {y}")
    if y == 0.0:
        return 0.0
    # Winitzki-style initializer
    a = 0.147
    ln1my2 = math.log1p(-y * y)
    t = 2.0 / (math.pi * a) + 0.5 * ln1my2
    x = math.copysign(math.sqrt(math.sqrt(t * t - ln1my2 / a) - t), y)
    half_sqrt_pi = 0.5 * math.sqrt(math.pi)
    for _ in range(4):
        x -= (math.erf(x) - y) * half_sqrt_pi * math.exp(x * x)
    return x


# ---------------------------------------------------------------------------
# chance-constraint margins


@dataclass
class RiskParams:
    eps1: float = 0.05  # sensing-zone violation budget
    eps2: float = 0.05  # comm-zone violation budget

    def __post_init__(self):
        for name in ("eps1", "eps2"):
            v = getattr(self, name)
            if not 0.0 < v < 0.5:
                raise ValueError(f"{name} must lie in (0, 0.5); got {v}")


def _directional_tighten(pos: np.ndarray, center: np.ndarray,
                         cov: np.ndarray, kappa: float) -> tuple[float, float]:
    """Distance to center and kappa * sqrt(2 a^T Sigma a), a the unit offset."""
    a = pos - center
    dist = float(np.linalg.norm(a))
    if dist < 1e-12:
        ahat = np.array([1.0, 0.0])
    else:
        ahat = a / dist
    quad = float(ahat @ cov @ ahat)
    return dist, kappa * math.sqrt(max(2.0 * quad, 0.0))


def sensing_margin(robot_pos: np.ndarray, center: np.ndarray,
                   center_cov: np.ndarray, eps1: float, r_safe: float) -> float:
    """Signed clearance from a sensing zone's tightened keep-out.

    g = ||x - mu|| - r_safe - erf_inv(1 - 2*eps1) * sqrt(2 a^T Sigma a);
    g >= 0 means the chance constraint holds at this position.
    """
    if not 0.0 < eps1 < 0.5:
        raise ValueError(f"eps1 must lie in (0, 0.5); got {eps1}")
    kappa = erf_inv(1.0 - 2.0 * eps1)
    dist, tighten = _directional_tighten(robot_pos, center, center_cov, kappa)
    return dist - r_safe - tighten


def comm_margin(robot_pos: np.ndarray, nearest_peer_pos: np.ndarray,
                center: np.ndarray, center_cov: np.ndarray, delta2: float,
                eps2: float) -> float:
    """Signed clearance from a comm zone's tightened jam region.

    The deterministic jam radius is delta2 times the distance to the
    nearest league member; the Gaussian center adds the same directional
    tightening as the sensing case.
    """
    if not 0.0 < eps2 < 0.5:
        raise ValueError(f"eps2 must lie in (0, 0.5); got {eps2}")
    kappa = erf_inv(1.0 - 2.0 * eps2)
    cstar = float(np.linalg.norm(robot_pos - nearest_peer_pos))
    dist, tighten = _directional_tighten(robot_pos, center, center_cov, kappa)
    return dist - delta2 * cstar - tighten


# ---------------------------------------------------------------------------
# tracking objective


class _TrackingCore:
    """One-step-lookahead posterior trace, batched over candidate positions.

    The prediction does not depend on the controls, so it is computed once;
    only the information added by the candidate sensor positions varies.
    Per-target blocks are used when the predicted covariance is block
    diagonal (always true in this pipeline), with a dense fallback.

    With a finite sensing range the hard cutoff is relaxed to a smooth
    per-sensor success probability, and the score for each target is the
    expectation over arrival: ``p_miss * prior + (1 - p_miss) * measured``
    where ``p_miss`` is the chance no sensor returns anything.  Folding
    the cutoff into the noise floor instead would let an arbitrarily
    unlikely measurement collapse an arbitrarily large prior, which makes
    the score indifferent to distance exactly when a target is about to
    be lost; the mixture keeps the incentive to close back in.
    """

    def __init__(self, est: TargetEstimate, model: TargetModel,
                 noise: NoiseParams):
        pred = ekf_predict(est, model)
        self.noise = noise
        n = pred.num_targets
        self.num_targets = n
        self.pred_trace = float(np.trace(pred.covariance))
        self.target_pos = pred.mean.reshape(n, 4)[:, :2].copy()
        cov = pred.covariance
        off_block = cov.copy()
        for j in range(n):
            off_block[4 * j:4 * j + 4, 4 * j:4 * j + 4] = 0.0
        self._blockwise = float(np.max(np.abs(off_block))) < 1e-12 if n else True
        if self._blockwise:
            self.pinv_blocks = np.stack([
                np.linalg.inv(cov[4 * j:4 * j + 4, 4 * j:4 * j + 4])
                for j in range(n)]) if n else np.zeros((0, 4, 4))
            self.block_traces = np.array([
                float(np.trace(cov[4 * j:4 * j + 4, 4 * j:4 * j + 4]))
                for j in range(n)])
        else:
            self.pinv_full = np.linalg.inv(cov)

    def posterior_trace(self, sensor_pos: np.ndarray) -> np.ndarray:
        """sensor_pos: (K, S, 2) candidate positions of the active sensors."""
        k, s, _ = sensor_pos.shape
        if s == 0 or self.num_targets == 0:
            return np.full(k, self.pred_trace)
        if self._blockwise:
            total = np.zeros(k)
            for j in range(self.num_targets):
                acc, p_miss = self._position_info(j, sensor_pos)
                info = np.broadcast_to(self.pinv_blocks[j], (k, 4, 4)).copy()
                info[:, :2, :2] += acc
                measured = np.linalg.inv(info).trace(axis1=1, axis2=2)
                total += p_miss * self.block_traces[j] + (1.0 - p_miss) * measured
            return total
        # dense fallback: cross-target correlations make a per-target
        # mixture ill-defined, so the arrival probabilities scale the
        # information contributions directly
        info = np.broadcast_to(self.pinv_full, (k,) + self.pinv_full.shape).copy()
        for j in range(self.num_targets):
            acc, p_miss = self._position_info(j, sensor_pos)
            info[:, 4 * j:4 * j + 2, 4 * j:4 * j + 2] += (
                (1.0 - p_miss)[:, None, None] * acc)
        return np.linalg.inv(info).trace(axis1=1, axis2=2)

    def _position_info(self, j: int, sensor_pos: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray]:
        """Measurement information on target j's position, plus miss odds.

        Returns the sum over sensors of H^T R^-1 H (2x2 position part,
        one per candidate) and the probability that no sensor gets a
        measurement at all.
        """
        noise = self.noise
        k = sensor_pos.shape[0]
        acc = np.zeros((k, 2, 2))
        p_miss = np.ones(k)
        soft = max(noise.range_softness, 1e-9)
        for i in range(sensor_pos.shape[1]):
            delta = self.target_pos[j][None, :] - sensor_pos[:, i, :]
            d = np.maximum(np.linalg.norm(delta, axis=1), noise.d_min)
            u = delta / d[:, None]
            decay = np.exp(-noise.gamma * d)
            if noise.max_range is not None:
                # smooth stand-in for the hard measurement cutoff
                p_miss *= 1.0 / (1.0 + np.exp(-(d - noise.max_range) / soft))
            else:
                # unbounded range: the measurement always arrives
                p_miss *= 0.0
            w_range = decay / noise.sigma_r ** 2
            w_bearing = decay / noise.sigma_b ** 2
            row_b = np.stack([-u[:, 1] / d, u[:, 0] / d], axis=1)
            acc += w_range[:, None, None] * np.einsum("ka,kb->kab", u, u)
            acc += w_bearing[:, None, None] * np.einsum("ka,kb->kab", row_b, row_b)
        return acc, p_miss


def tracking_objective(candidate_positions: dict[int, np.ndarray],
                       est: TargetEstimate, model: TargetModel,
                       noise: NoiseParams,
                       active_sensors: list[int]) -> float:
    """Trace of the one-step-lookahead posterior covariance.

    ``candidate_positions`` maps robot id to its next position; only
    robots in ``active_sensors`` contribute measurement information.  With
    no active sensors this is the trace of the pure prediction.
    """
    core = _TrackingCore(est, model, noise)
    active = [rid for rid in sorted(candidate_positions) if rid in set(active_sensors)]
    if not active:
        return core.pred_trace
    pos = np.stack([candidate_positions[rid] for rid in active])[None, :, :]
    return float(core.posterior_trace(pos)[0])


# ---------------------------------------------------------------------------
# constraint assembly


@dataclass
class _Disc:
    """One keep-out term: hinge on ||x - center|| - offset - kappa*sqrt(2 a'Σa)."""

    center: np.ndarray
    cov: np.ndarray | None      # None => deterministic keep-out
    offset: float
    kappa: float
    kind: ZoneKind
    zone_id: int


def _margin_batch(x: np.ndarray, disc: _Disc) -> np.ndarray:
    """Margins for a (K, 2) batch of positions."""
    a = x - disc.center[None, :]
    dist = np.linalg.norm(a, axis=1)
    safe = np.maximum(dist, 1e-12)
    ahat = a / safe[:, None]
    if disc.cov is None:
        tighten = 0.0
    else:
        quad = np.einsum("ka,ab,kb->k", ahat, disc.cov, ahat)
        tighten = disc.kappa * np.sqrt(np.maximum(2.0 * quad, 0.0))
    return dist - disc.offset - tighten


def build_constraints(world: WorldState, league: list[int],
                      view: dict[RecordKey, ZoneRecord], weights: WeightSet,
                      risk: RiskParams) -> dict[int, list[_Disc]]:
    """Per-robot keep-out terms from a resolved zone-record view.

    Sensing records keep all members r_l + w5 away (chance-tightened).
    Comm records with exact parameters use the deterministic jam radius
    delta2 * (distance to nearest league member, frozen at the current
    positions); circle-fit comm records act as deterministic keep-outs of
    their fitted radius + w5.
    """
    kappa1 = erf_inv(1.0 - 2.0 * risk.eps1)
    kappa2 = erf_inv(1.0 - 2.0 * risk.eps2)
    shared: list[_Disc] = []
    comm_exact: list[ZoneRecord] = []
    for key in sorted(view, key=lambda k: (k[0].value, k[1])):
        rec = view[key]
        if rec.kind is ZoneKind.SENSING:
            shared.append(_Disc(rec.center, rec.center_cov, rec.radius + weights.w5,
                                kappa1, ZoneKind.SENSING, rec.zone_id))
        elif rec.provenance is Provenance.CIRCLE_FIT:
            shared.append(_Disc(rec.center, None, rec.radius + weights.w5,
                                0.0, ZoneKind.COMM, rec.zone_id))
        else:
            comm_exact.append(rec)

    out: dict[int, list[_Disc]] = {}
    for rid in league:
        cons = list(shared)
        if comm_exact:
            cstar = _nearest_league_distance(world, league, rid)
            if cstar is not None:
                for rec in comm_exact:
                    cons.append(_Disc(rec.center, rec.center_cov,
                                      rec.delta2 * cstar, kappa2,
                                      ZoneKind.COMM, rec.zone_id))
        out[rid] = cons
    return out


def _nearest_league_distance(world: WorldState, league: list[int],
                             rid: int) -> float | None:
    peers = [i for i in league if i != rid]
    if not peers:
        peers = [r.id for r in world.robots if r.id != rid]
    if not peers:
        return None
    me = world.robots[rid].position
    return min(float(np.linalg.norm(world.robots[i].position - me)) for i in peers)


# ---------------------------------------------------------------------------
# the solver


@dataclass
class SolverConfig:
    max_iter: int = 60
    step_tol: float = 1e-6
    fd_step: float = 1e-4
    initial_step: float | None = None  # None => 0.25 * u_max


@dataclass
class PlanResult:
    controls: dict[int, np.ndarray]
    objective_terms: tuple[float, float, float, float]  # tracking, effort, slacks
    weights: WeightSet
    iterations: int
    converged: bool
    active_slacks: list[tuple[int, tuple[str, int], float]] = field(default_factory=list)
    objective_value: float = 0.0


class _Objective:
    """Batched evaluation of the full planning objective."""

    def __init__(self, positions0: np.ndarray, dt: float, weights: WeightSet,
                 core: _TrackingCore | None, active_idx: list[int],
                 constraints: list[list[_Disc]]):
        self.positions0 = positions0
        self.dt = dt
        self.w = weights
        self.core = core
        self.active_idx = active_idx
        self.constraints = constraints
        self.m = positions0.shape[0]

    def positions(self, u_flat: np.ndarray) -> np.ndarray:
        u = u_flat.reshape(-1, self.m, 2)
        return self.positions0[None, :, :] + self.dt * u

    def batch(self, u_flat: np.ndarray) -> np.ndarray:
        x = self.positions(u_flat)
        k = x.shape[0]
        if self.core is not None and self.active_idx:
            tracking = self.core.posterior_trace(x[:, self.active_idx, :])
        else:
            tracking = np.full(k, self.core.pred_trace if self.core else 0.0)
        effort = np.sum(u_flat.reshape(k, -1) ** 2, axis=1)
        slack_s = np.zeros(k)
        slack_c = np.zeros(k)
        for i in range(self.m):
            for disc in self.constraints[i]:
                violation = np.maximum(0.0, -_margin_batch(x[:, i, :], disc))
                if disc.kind is ZoneKind.SENSING:
                    slack_s += violation
                else:
                    slack_c += violation
        return (self.w.w1 * tracking + self.w.w2 * effort
                + self.w.w3 * slack_s + self.w.w4 * slack_c)

    def components(self, u_flat: np.ndarray):
        """Raw terms and per-constraint slacks at a single point."""
        x = self.positions(u_flat[None, :])[0]
        if self.core is not None and self.active_idx:
            tracking = float(self.core.posterior_trace(x[None, self.active_idx, :])[0])
        else:
            tracking = self.core.pred_trace if self.core else 0.0
        effort = float(np.sum(u_flat ** 2))
        slack_s = slack_c = 0.0
        active: list[tuple[int, tuple[str, int], float]] = []
        for i in range(self.m):
            for disc in self.constraints[i]:
                v = float(max(0.0, -_margin_batch(x[i][None, :], disc)[0]))
                if v > 0.0:
                    active.append((i, (disc.kind.value, disc.zone_id), v))
                if disc.kind is ZoneKind.SENSING:
                    slack_s += v
                else:
                    slack_c += v
        return (tracking, effort, slack_s, slack_c), active


def _project(u_flat: np.ndarray, u_max: float) -> np.ndarray:
    """Clip each robot's control to the speed ball (batched or single)."""
    shaped = u_flat.reshape(-1, u_flat.shape[-1] // 2, 2)
    norms = np.linalg.norm(shaped, axis=2)
    scale = np.ones_like(norms)
    over = norms > u_max
    scale[over] = u_max / norms[over]
    out = shaped * scale[:, :, None]
    return out.reshape(u_flat.shape)


_LADDER = np.array([2.0, 1.0, 0.5, 0.2, 0.05])


def _descend(objective: _Objective, u0: np.ndarray, u_max: float,
             cfg: SolverConfig) -> tuple[np.ndarray, int, bool]:
    """Projected descent along the normalized finite-difference gradient.

    The step length adapts through a trial ladder each iteration (a
    backtracking line search with memory).  Using the normalized direction
    makes the iterate path invariant to a common positive scaling of the
    weights.
    """
    dim = u0.size
    u = _project(u0.copy(), u_max)
    f = float(objective.batch(u[None, :])[0])
    alpha = cfg.initial_step if cfg.initial_step is not None else 0.25 * u_max
    h = cfg.fd_step
    iterations = 0
    converged = False
    for _ in range(cfg.max_iter):
        iterations += 1
        pts = np.repeat(u[None, :], 2 * dim, axis=0)
        for j in range(dim):
            pts[2 * j, j] += h
            pts[2 * j + 1, j] -= h
        fv = objective.batch(pts)
        grad = (fv[0::2] - fv[1::2]) / (2.0 * h)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < 1e-14:
            converged = True
            break
        direction = grad / gnorm
        steps = alpha * _LADDER
        trials = _project(u[None, :] - steps[:, None] * direction[None, :], u_max)
        ftrials = objective.batch(trials)
        best = int(np.argmin(ftrials))
        if ftrials[best] < f:
            moved = float(np.linalg.norm(trials[best] - u))
            u, f = trials[best], float(ftrials[best])
            alpha = float(min(max(steps[best], 1e-7), u_max))
            if moved < cfg.step_tol:
                converged = True
                break
        else:
            alpha *= 0.05
            if alpha * _LADDER[0] < cfg.step_tol:
                converged = True
                break
    return u, iterations, converged


# ---------------------------------------------------------------------------
# planning entry points


def plan_centralized(league: list[int], world: WorldState,
                     weights: WeightSet, *, estimate: TargetEstimate,
                     model: TargetModel, noise: NoiseParams,
                     risk: RiskParams,
                     view: dict[RecordKey, ZoneRecord],
                     u_max: float = 1.0, dt: float = 0.1,
                     solver: SolverConfig | None = None,
                     warm_start: dict[int, np.ndarray] | None = None,
                     active_sensors: list[int] | None = None) -> PlanResult:
    """Joint plan for one league (or a single robot when league == [rid]).

    ``view`` is the league's resolved zone knowledge; pass {} to plan
    blind.  ``active_sensors`` defaults to the members whose sensing is
    healthy; members outside it contribute no tracking information but are
    still steered jointly.
    """
    solver = solver or SolverConfig()
    league = sorted(league)
    positions0 = np.stack([world.robots[rid].position for rid in league])
    if active_sensors is None:
        active_sensors = [rid for rid in league
                          if world.robots[rid].failure_status.sensing is CapState.OK]
    active_idx = [k for k, rid in enumerate(league) if rid in set(active_sensors)]
    core = _TrackingCore(estimate, model, noise)
    cons_map = build_constraints(world, league, view, weights, risk)
    objective = _Objective(positions0, dt, weights, core, active_idx,
                           [cons_map[rid] for rid in league])
    u0 = np.zeros(2 * len(league))
    if warm_start:
        for k, rid in enumerate(league):
            if rid in warm_start:
                u0[2 * k:2 * k + 2] = warm_start[rid]
    u, iterations, converged = _descend(objective, u0, u_max, solver)
    terms, slacks_raw = objective.components(u)
    controls = {rid: u[2 * k:2 * k + 2].copy() for k, rid in enumerate(league)}
    active_slacks = [(league[i], zone, v) for i, zone, v in slacks_raw]
    value = float(objective.batch(u[None, :])[0])
    return PlanResult(controls, terms, weights, iterations, converged,
                      active_slacks, value)


def plan_individual(robot_id: int, world: WorldState, weights: WeightSet, *,
                    estimate: TargetEstimate, model: TargetModel,
                    noise: NoiseParams, risk: RiskParams,
                    view: dict[RecordKey, ZoneRecord],
                    u_max: float = 1.0, dt: float = 0.1,
                    solver: SolverConfig | None = None,
                    warm_start: dict[int, np.ndarray] | None = None) -> PlanResult:
    """Isolated-robot plan over its own knowledge and solo estimate."""
    return plan_centralized([robot_id], world, weights, estimate=estimate,
                            model=model, noise=noise, risk=risk, view=view,
                            u_max=u_max, dt=dt, solver=solver,
                            warm_start=warm_start)


def plan_vanilla(league: list[int], world: WorldState, weights: WeightSet, *,
                 estimate: TargetEstimate, model: TargetModel,
                 noise: NoiseParams, u_max: float = 1.0, dt: float = 0.1,
                 solver: SolverConfig | None = None,
                 warm_start: dict[int, np.ndarray] | None = None) -> PlanResult:
    """Failure-oblivious baseline: same optimizer, no zone knowledge."""
    risk = RiskParams()  # irrelevant with an empty view
    return plan_centralized(league, world, weights, estimate=estimate,
                            model=model, noise=noise, risk=risk, view={},
                            u_max=u_max, dt=dt, solver=solver,
                            warm_start=warm_start)


# ---------------------------------------------------------------------------
# circular evasion and circle recognition


def circular_mode_control(position: np.ndarray, center: np.ndarray,
                          radius: float, angular_rate: float, u_max: float,
                          k_r: float = 3.0) -> np.ndarray:
    """Velocity command orbiting ``center`` counter-clockwise at ``radius``.

    Radial proportional correction plus a tangential term of magnitude
    radius * angular_rate, clamped to the speed bound.  At the center the
    radial push dominates along a fixed fallback direction.
    """
    rvec = position - center
    dist = float(np.linalg.norm(rvec))
    rhat = rvec / dist if dist > 1e-9 else np.array([1.0, 0.0])
    that = np.array([-rhat[1], rhat[0]])  # counter-clockwise
    u = k_r * (radius - dist) * rhat + radius * angular_rate * that
    norm = float(np.linalg.norm(u))
    if norm > u_max:
        u *= u_max / norm
    return u


@dataclass
class CircleFit:
    center: np.ndarray
    radius: float
    rms_residual: float


def estimate_circle(points: np.ndarray, residual_frac: float = 0.05,
                    min_arc_deg: float = 270.0) -> CircleFit | None:
    """Algebraic least-squares circle through an ordered point sequence.

    Returns None ("not circular") when there are fewer than 6 points, the
    normal system is singular (collinear points), the rms radial residual
    is >= residual_frac * radius, or the swept arc is <= min_arc_deg.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 6:
        return None
    x, y = pts[:, 0], pts[:, 1]
    # x^2 + y^2 = a*x + b*y + c  =>  center (a/2, b/2), radius^2 = c + (a^2+b^2)/4
    design = np.column_stack([x, y, np.ones_like(x)])
    rhs = x * x + y * y
    try:
        sol, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=None)
    except np.linalg.LinAlgError:
        return None
    if rank < 3:
        return None
    center = 0.5 * sol[:2]
    r2 = sol[2] + float(center @ center)
    if r2 <= 0.0 or not np.isfinite(r2):
        return None
    radius = math.sqrt(r2)
    dists = np.linalg.norm(pts - center[None, :], axis=1)
    rms = float(np.sqrt(np.mean((dists - radius) ** 2)))
    if rms >= residual_frac * radius:
        return None
    angles = np.unwrap(np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0]))
    swept = abs(float(angles[-1] - angles[0]))
    if swept <= math.radians(min_arc_deg):
        return None
    return CircleFit(center, radius, rms)


def estimate_attacker_center(jam_history) -> np.ndarray:
    """Centroid of the positions where the robot found itself jammed.

    ``jam_history`` is a sequence of (position, jammed) pairs or objects
    with .position/.jammed; at least one jammed sample is required.
    """
    jammed = []
    for sample in jam_history:
        if isinstance(sample, tuple):
            pos, flag = sample
        else:
            pos, flag = sample.position, sample.jammed
        if flag:
            jammed.append(np.asarray(pos, dtype=float))
    if not jammed:
        raise ValueError("jam history contains no jammed samples")
    return np.mean(np.stack(jammed), axis=0)
