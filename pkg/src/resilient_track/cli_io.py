"""Config round-tripping, batch execution, CSV/JSON outputs, CLI.

Config files are flat ``key = value`` lines (``#`` comments, blank lines
allowed).  Unknown keys are hard errors.  ``serialize_config`` emits a
canonical form (sorted keys, shortest round-trip floats) whose sha256 is
the config hash recorded in run manifests; re-running a batch from the
same config and seeds reproduces every output file byte for byte.

Key schema (``<i>``/``<j>``/``<k>`` are integer indices):

  scenario.preset | scenario.name | scenario.mode | scenario.steps |
  scenario.dt | scenario.seed
  team.num_robots | team.num_targets
  robot.<i>.start = x,y
  target.<j>.start = px,py,vx,vy
  target.<j>.waypoints = x1,y1; x2,y2; ...   (all targets or none)
  szone.<k>.center = x,y ; szone.<k>.cov = s | a,b,c,d ;
  szone.<k>.radius ; szone.<k>.kind = temporary|permanent
  czone.<k>.center ; czone.<k>.cov ; czone.<k>.delta2 ; czone.<k>.kind
  risk.eps1 | risk.eps2
  weights.risky = w1,w2,w3,w4,w5 | weights.safe | weights.cooldown_length
  hazard.activation_period_steps | hazard.delta1 | hazard.mc_samples
  noise.sigma_r | noise.sigma_b | noise.gamma | noise.max_range | noise.d_min
  motion.q_intensity | motion.v_max | motion.u_max | motion.waypoint_gain |
  motion.velocity_gain | motion.capture_radius
  estimate.init_pos_std | estimate.p0
  coord.observation_window | coord.sigma_peer | coord.r_circ |
  coord.omega_circ
  solver.max_iter | solver.step_tol | solver.fd_step | solver.initial_step
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import simulator
from .hazards import HazardConfig
from .motion import NoiseParams
from .planner import (AdaptiveWeightConfig, RiskParams, SolverConfig,
                      WeightSet)
from .simulator import ScenarioConfig, preset, preset_names
from .world import CommZone, FailureKind, SensingZone

log = logging.getLogger("resilient_track")


class ConfigError(Exception):
    """Bad config content: unknown key, bad value, failed validation."""


class CliUsageError(Exception):
    """Bad command-line invocation."""


# ---------------------------------------------------------------------------
# value formatting / parsing


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _fmt_vec(vec) -> str:
    return ",".join(repr(float(v)) for v in np.asarray(vec, dtype=float).ravel())


def _fmt_waypoints(route) -> str:
    return "; ".join(_fmt_vec(p) for p in route)


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


def _parse_optional_float(raw: str, key: str) -> float | None:
    return None if raw.strip().lower() == "none" else _parse_float(raw, key)


def _parse_vec(raw: str, n: int, key: str) -> np.ndarray:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != n:
        raise ConfigError(f"{key}: expected {n} comma-separated numbers, got {raw!r}")
    return np.array([_parse_float(p, key) for p in parts])


def _parse_cov(raw: str, key: str) -> np.ndarray:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) == 1:
        cov = _parse_float(parts[0], key) * np.eye(2)
    elif len(parts) == 4:
        cov = np.array([_parse_float(p, key) for p in parts]).reshape(2, 2)
    else:
        raise ConfigError(f"{key}: expected 1 (scalar*I) or 4 numbers, got {raw!r}")
    if np.min(np.linalg.eigvalsh(0.5 * (cov + cov.T))) < -1e-12:
        raise ConfigError(f"{key}: covariance must be positive semidefinite")
    return cov


def _parse_waypoints(raw: str, key: str) -> list[np.ndarray]:
    segments = [s.strip() for s in raw.split(";") if s.strip()]
    if not segments:
        raise ConfigError(f"{key}: expected at least one 'x,y' waypoint")
    return [_parse_vec(s, 2, key) for s in segments]


def _parse_kind(raw: str, key: str) -> FailureKind:
    try:
        return FailureKind(raw.strip().lower())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected temporary|permanent, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# canonical serialization


def serialize_config(sc: ScenarioConfig) -> str:
    """Canonical flat key/value text for a scenario (sorted keys)."""
    pairs: dict[str, str] = {
        "scenario.name": sc.name,
        "scenario.mode": sc.mode,
        "scenario.steps": _fmt(sc.steps),
        "scenario.dt": _fmt(sc.dt),
        "scenario.seed": _fmt(sc.seed),
        "team.num_robots": _fmt(sc.num_robots),
        "team.num_targets": _fmt(sc.num_targets),
        "risk.eps1": _fmt(sc.risk.eps1),
        "risk.eps2": _fmt(sc.risk.eps2),
        "weights.risky": _fmt_vec([sc.weights.risky.w1, sc.weights.risky.w2,
                                   sc.weights.risky.w3, sc.weights.risky.w4,
                                   sc.weights.risky.w5]),
        "weights.safe": _fmt_vec([sc.weights.safe.w1, sc.weights.safe.w2,
                                  sc.weights.safe.w3, sc.weights.safe.w4,
                                  sc.weights.safe.w5]),
        "weights.cooldown_length": _fmt(sc.weights.cooldown_length),
        "hazard.activation_period_steps": _fmt(sc.hazard.activation_period_steps),
        "hazard.delta1": _fmt(sc.hazard.delta1),
        "hazard.mc_samples": _fmt(sc.hazard.mc_samples),
        "noise.sigma_r": _fmt(sc.noise.sigma_r),
        "noise.sigma_b": _fmt(sc.noise.sigma_b),
        "noise.gamma": _fmt(sc.noise.gamma),
        "noise.max_range": _fmt(sc.noise.max_range),
        "noise.range_softness": _fmt(sc.noise.range_softness),
        "noise.d_min": _fmt(sc.noise.d_min),
        "motion.q_intensity": _fmt(sc.q_intensity),
        "motion.v_max": _fmt(sc.v_max),
        "motion.u_max": _fmt(sc.u_max),
        "motion.waypoint_gain": _fmt(sc.waypoint_gain),
        "motion.velocity_gain": _fmt(sc.velocity_gain),
        "motion.capture_radius": _fmt(sc.capture_radius),
        "estimate.init_pos_std": _fmt(sc.init_pos_std),
        "estimate.p0": _fmt(sc.p0),
        "estimate.p0_vel": _fmt(sc.p0_vel),
        "coord.observation_window": _fmt(sc.observation_window),
        "coord.sigma_peer": _fmt(sc.sigma_peer),
        "coord.r_circ": _fmt(sc.r_circ),
        "coord.omega_circ": _fmt(sc.omega_circ),
        "solver.max_iter": _fmt(sc.solver.max_iter),
        "solver.step_tol": _fmt(sc.solver.step_tol),
        "solver.fd_step": _fmt(sc.solver.fd_step),
        "solver.initial_step": _fmt(sc.solver.initial_step),
    }
    starts = sc.robot_starts or simulator.default_robot_starts(sc.num_robots)
    for i, p in enumerate(starts):
        pairs[f"robot.{i}.start"] = _fmt_vec(p)
    tstarts = sc.target_starts or simulator.default_target_starts(sc.num_targets)
    for j, s in enumerate(tstarts):
        pairs[f"target.{j}.start"] = _fmt_vec(s)
    if sc.target_waypoints is not None:
        for j, route in enumerate(sc.target_waypoints):
            pairs[f"target.{j}.waypoints"] = _fmt_waypoints(route)
    for zone in sc.sensing_zones:
        pairs[f"szone.{zone.id}.center"] = _fmt_vec(zone.mean_center)
        pairs[f"szone.{zone.id}.cov"] = _fmt_vec(zone.center_cov)
        pairs[f"szone.{zone.id}.radius"] = _fmt(zone.radius)
        pairs[f"szone.{zone.id}.kind"] = zone.failure_kind.value
    for zone in sc.comm_zones:
        pairs[f"czone.{zone.id}.center"] = _fmt_vec(zone.mean_center)
        pairs[f"czone.{zone.id}.cov"] = _fmt_vec(zone.center_cov)
        pairs[f"czone.{zone.id}.delta2"] = _fmt(zone.delta2)
        pairs[f"czone.{zone.id}.kind"] = zone.failure_kind.value
    return "".join(f"{k} = {pairs[k]}\n" for k in sorted(pairs))


def config_hash(sc: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_config(sc).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# parsing


def _read_pairs(text: str) -> dict[str, tuple[int, str]]:
    """key -> (line number, raw value); duplicate keys are errors."""
    pairs: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} "
                              f"(first set on line {pairs[key][0]})")
        pairs[key] = (lineno, raw)
    return pairs


_SCALAR_KEYS = {
    "scenario.name", "scenario.mode", "scenario.steps", "scenario.dt",
    "scenario.seed", "team.num_robots", "team.num_targets",
    "risk.eps1", "risk.eps2",
    "weights.risky", "weights.safe", "weights.cooldown_length",
    "hazard.activation_period_steps", "hazard.delta1", "hazard.mc_samples",
    "noise.sigma_r", "noise.sigma_b", "noise.gamma", "noise.max_range",
    "noise.range_softness", "noise.d_min",
    "motion.q_intensity", "motion.v_max", "motion.u_max",
    "motion.waypoint_gain", "motion.velocity_gain", "motion.capture_radius",
    "estimate.init_pos_std", "estimate.p0", "estimate.p0_vel",
    "coord.observation_window", "coord.sigma_peer", "coord.r_circ",
    "coord.omega_circ",
    "solver.max_iter", "solver.step_tol", "solver.fd_step",
    "solver.initial_step",
}

_ROBOT_RE = re.compile(r"^robot\.(\d+)\.start$")
_TARGET_START_RE = re.compile(r"^target\.(\d+)\.start$")
_TARGET_WP_RE = re.compile(r"^target\.(\d+)\.waypoints$")
_SZONE_RE = re.compile(r"^szone\.(\d+)\.(center|cov|radius|kind)$")
_CZONE_RE = re.compile(r"^czone\.(\d+)\.(center|cov|delta2|kind)$")


def _check_known(key: str, lineno: int | None) -> None:
    if key in _SCALAR_KEYS:
        return
    for pattern in (_ROBOT_RE, _TARGET_START_RE, _TARGET_WP_RE,
                    _SZONE_RE, _CZONE_RE):
        if pattern.match(key):
            return
    where = f"line {lineno}: " if lineno is not None else ""
    raise ConfigError(f"{where}unknown config key {key!r}")


def _contiguous(indexed: dict[int, object], count: int, what: str) -> list:
    missing = [i for i in range(count) if i not in indexed]
    extra = [i for i in indexed if not 0 <= i < count]
    if missing or extra:
        raise ConfigError(f"{what} must cover indices 0..{count - 1} exactly "
                          f"(missing {missing}, unexpected {extra})")
    return [indexed[i] for i in range(count)]


def _build_from_pairs(pairs: dict[str, tuple[int | None, str]]) -> ScenarioConfig:
    for key, (lineno, _) in pairs.items():
        _check_known(key, lineno)

    def take(key: str, default: str | None = None) -> str | None:
        if key in pairs:
            return pairs[key][1]
        return default

    weights_vec = {}
    for which in ("risky", "safe"):
        raw = take(f"weights.{which}")
        if raw is not None:
            v = _parse_vec(raw, 5, f"weights.{which}")
            weights_vec[which] = WeightSet(*[float(x) for x in v])
    base_weights = AdaptiveWeightConfig()
    try:
        weights = AdaptiveWeightConfig(
            risky=weights_vec.get("risky", base_weights.risky),
            safe=weights_vec.get("safe", base_weights.safe),
            cooldown_length=_parse_int(take("weights.cooldown_length", "10"),
                                       "weights.cooldown_length"),
        )
        risk = RiskParams(eps1=_parse_float(take("risk.eps1", "0.05"), "risk.eps1"),
                          eps2=_parse_float(take("risk.eps2", "0.05"), "risk.eps2"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    hazard = HazardConfig(
        activation_period_steps=_parse_int(
            take("hazard.activation_period_steps", "10"),
            "hazard.activation_period_steps"),
        delta1=_parse_float(take("hazard.delta1", "0.1"), "hazard.delta1"),
        mc_samples=_parse_int(take("hazard.mc_samples", "2000"),
                              "hazard.mc_samples"),
    )
    noise = NoiseParams(
        sigma_r=_parse_float(take("noise.sigma_r", "0.05"), "noise.sigma_r"),
        sigma_b=_parse_float(take("noise.sigma_b", "0.05"), "noise.sigma_b"),
        gamma=_parse_float(take("noise.gamma", "0.1"), "noise.gamma"),
        max_range=_parse_optional_float(take("noise.max_range", "none"),
                                        "noise.max_range"),
        range_softness=_parse_float(take("noise.range_softness", "0.25"),
                                    "noise.range_softness"),
        d_min=_parse_float(take("noise.d_min", "1e-06"), "noise.d_min"),
    )
    solver = SolverConfig(
        max_iter=_parse_int(take("solver.max_iter", "60"), "solver.max_iter"),
        step_tol=_parse_float(take("solver.step_tol", "1e-06"), "solver.step_tol"),
        fd_step=_parse_float(take("solver.fd_step", "0.0001"), "solver.fd_step"),
        initial_step=_parse_optional_float(take("solver.initial_step", "none"),
                                           "solver.initial_step"),
    )

    num_robots = _parse_int(take("team.num_robots", "3"), "team.num_robots")
    num_targets = _parse_int(take("team.num_targets", "3"), "team.num_targets")

    robot_starts: dict[int, np.ndarray] = {}
    target_starts: dict[int, np.ndarray] = {}
    target_wps: dict[int, list[np.ndarray]] = {}
    szones: dict[int, dict[str, str]] = {}
    czones: dict[int, dict[str, str]] = {}
    for key, (_, raw) in pairs.items():
        if m := _ROBOT_RE.match(key):
            robot_starts[int(m.group(1))] = _parse_vec(raw, 2, key)
        elif m := _TARGET_START_RE.match(key):
            target_starts[int(m.group(1))] = _parse_vec(raw, 4, key)
        elif m := _TARGET_WP_RE.match(key):
            target_wps[int(m.group(1))] = _parse_waypoints(raw, key)
        elif m := _SZONE_RE.match(key):
            szones.setdefault(int(m.group(1)), {})[m.group(2)] = raw
        elif m := _CZONE_RE.match(key):
            czones.setdefault(int(m.group(1)), {})[m.group(2)] = raw

    starts_list = (_contiguous(robot_starts, num_robots, "robot.<i>.start")
                   if robot_starts else None)
    tstarts_list = (_contiguous(target_starts, num_targets, "target.<j>.start")
                    if target_starts else None)
    wps_list = None
    if target_wps:
        wps_list = _contiguous(target_wps, num_targets, "target.<j>.waypoints")

    sensing_zones = []
    for zid in sorted(szones):
        fields = szones[zid]
        for required in ("center", "radius"):
            if required not in fields:
                raise ConfigError(f"szone.{zid}: missing szone.{zid}.{required}")
        sensing_zones.append(SensingZone(
            id=zid,
            mean_center=_parse_vec(fields["center"], 2, f"szone.{zid}.center"),
            center_cov=_parse_cov(fields.get("cov", "0.0"), f"szone.{zid}.cov"),
            radius=_parse_float(fields["radius"], f"szone.{zid}.radius"),
            failure_kind=_parse_kind(fields.get("kind", "permanent"),
                                     f"szone.{zid}.kind"),
        ))
    comm_zones = []
    for zid in sorted(czones):
        fields = czones[zid]
        for required in ("center", "delta2"):
            if required not in fields:
                raise ConfigError(f"czone.{zid}: missing czone.{zid}.{required}")
        comm_zones.append(CommZone(
            id=zid,
            mean_center=_parse_vec(fields["center"], 2, f"czone.{zid}.center"),
            center_cov=_parse_cov(fields.get("cov", "0.0"), f"czone.{zid}.cov"),
            delta2=_parse_float(fields["delta2"], f"czone.{zid}.delta2"),
            failure_kind=_parse_kind(fields.get("kind", "permanent"),
                                     f"czone.{zid}.kind"),
        ))

    sc = ScenarioConfig(
        name=take("scenario.name", "custom"),
        num_robots=num_robots, num_targets=num_targets,
        robot_starts=starts_list, target_starts=tstarts_list,
        target_waypoints=wps_list,
        sensing_zones=sensing_zones, comm_zones=comm_zones,
        dt=_parse_float(take("scenario.dt", "0.1"), "scenario.dt"),
        steps=_parse_int(take("scenario.steps", "300"), "scenario.steps"),
        seed=_parse_int(take("scenario.seed", "0"), "scenario.seed"),
        mode=take("scenario.mode", simulator.ADAPTIVE),
        risk=risk, weights=weights, hazard=hazard, noise=noise, solver=solver,
        q_intensity=_parse_float(take("motion.q_intensity", "0.005"),
                                 "motion.q_intensity"),
        v_max=_parse_float(take("motion.v_max", "0.35"), "motion.v_max"),
        u_max=_parse_float(take("motion.u_max", "1.0"), "motion.u_max"),
        waypoint_gain=_parse_float(take("motion.waypoint_gain", "0.7"),
                                   "motion.waypoint_gain"),
        velocity_gain=_parse_float(take("motion.velocity_gain", "0.5"),
                                   "motion.velocity_gain"),
        capture_radius=_parse_float(take("motion.capture_radius", "0.2"),
                                    "motion.capture_radius"),
        init_pos_std=_parse_float(take("estimate.init_pos_std", "0.1"),
                                  "estimate.init_pos_std"),
        p0=_parse_float(take("estimate.p0", "0.5"), "estimate.p0"),
        p0_vel=_parse_optional_float(take("estimate.p0_vel", "none"),
                                     "estimate.p0_vel"),
        observation_window=_parse_int(take("coord.observation_window", "30"),
                                      "coord.observation_window"),
        sigma_peer=_parse_float(take("coord.sigma_peer", "0.02"),
                                "coord.sigma_peer"),
        r_circ=_parse_optional_float(take("coord.r_circ", "none"),
                                     "coord.r_circ"),
        omega_circ=_parse_float(take("coord.omega_circ", "2.0"),
                                "coord.omega_circ"),
    )
    problems = simulator.validate_scenario(sc)
    if problems:
        raise ConfigError("; ".join(problems))
    return sc


def parse_config_text(text: str, preset_override: str | None = None) -> ScenarioConfig:
    """Parse flat config text into a scenario.

    ``scenario.preset`` (or ``preset_override``, which wins) supplies
    defaults for every other key; explicit keys override the preset's.
    """
    user_pairs = _read_pairs(text)
    preset_entry = user_pairs.pop("scenario.preset", None)
    preset_name = preset_override or (preset_entry[1] if preset_entry else None)
    merged: dict[str, tuple[int | None, str]] = {}
    if preset_name is not None:
        try:
            base = preset(preset_name)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from exc
        for key, (_, raw) in _read_pairs(serialize_config(base)).items():
            merged[key] = (None, raw)
    merged.update(user_pairs)
    return _build_from_pairs(merged)


def parse_config_file(path: str | Path,
                      preset_override: str | None = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, preset_override)


# ---------------------------------------------------------------------------
# output files


def _steps_header(m: int, n: int) -> list[str]:
    header = ["t"]
    for i in range(m):
        header += [f"rx{i}", f"ry{i}", f"sensing{i}", f"comm{i}",
                   f"mode{i}", f"unorm{i}"]
    for j in range(n):
        header += [f"tx{j}", f"ty{j}", f"tvx{j}", f"tvy{j}",
                   f"ex{j}", f"ey{j}", f"evx{j}", f"evy{j}"]
    header += ["mse", "trace", "effort"]
    return header


def write_steps_csv(path: Path, result: simulator.RunResult) -> None:
    sc = result.config
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_steps_header(sc.num_robots, sc.num_targets))
        for rec in result.records:
            row: list[str] = [str(rec.t)]
            for i in range(sc.num_robots):
                row += [repr(float(rec.robot_positions[i, 0])),
                        repr(float(rec.robot_positions[i, 1])),
                        rec.sensing_status[i], rec.comm_status[i],
                        rec.modes[i], repr(float(rec.control_norms[i]))]
            for j in range(sc.num_targets):
                row += [repr(float(v)) for v in rec.target_truth[j]]
                row += [repr(float(v)) for v in rec.target_estimates[j]]
            row += [repr(rec.mse), repr(rec.trace), repr(rec.effort)]
            writer.writerow(row)


def write_events_csv(path: Path, result: simulator.RunResult) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "robot_id", "kind", "zone_id", "transition"])
        for event in result.events:
            writer.writerow([event.step, event.robot_id, event.kind.value,
                             event.zone_id, event.transition.value])


def run_seed(config_text: str, seed: int, outdir: str) -> dict:
    """Worker entry: simulate one seed, write its CSVs, return a summary."""
    sc = replace(parse_config_text(config_text), seed=seed)
    result = simulator.run(sc)
    out = Path(outdir)
    write_steps_csv(out / f"steps_{seed}.csv", result)
    write_events_csv(out / f"events_{seed}.csv", result)
    mse_series = [rec.mse for rec in result.records]
    trace_series = [rec.trace for rec in result.records]
    effort_series = [rec.effort for rec in result.records]
    attacks = sum(1 for e in result.events if e.transition.value == "attacked")
    recoveries = sum(1 for e in result.events if e.transition.value == "recovered")
    all_sensing_failed = any(all(s != "ok" for s in rec.sensing_status)
                             for rec in result.records)
    return {
        "seed": seed,
        "mse": mse_series,
        "trace": trace_series,
        "effort": effort_series,
        "attacks": attacks,
        "recoveries": recoveries,
        "mean_mse": float(np.mean(mse_series)),
        "final_mse": mse_series[-1],
        "mean_trace": float(np.mean(trace_series)),
        "final_trace": trace_series[-1],
        "total_effort": float(np.sum(effort_series)),
        "all_sensing_failed": bool(all_sensing_failed),
    }


def _aggregate(per_seed: list[dict]) -> dict:
    def series(name: str) -> np.ndarray:
        return np.array([entry[name] for entry in per_seed])

    out = {}
    for name in ("mse", "trace", "effort"):
        values = series(name)
        out[f"{name}_mean"] = [float(v) for v in values.mean(axis=0)]
        out[f"{name}_std"] = [float(v) for v in values.std(axis=0)]
    return out


def run_batch(sc: ScenarioConfig, seeds: list[int], outdir: str | Path,
              parallel: int = 1) -> dict:
    """Run one scenario over several seeds; write all output files."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    config_text = serialize_config(sc)
    if parallel > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            per_seed = list(pool.map(run_seed, [config_text] * len(seeds),
                                     seeds, [str(out)] * len(seeds)))
    else:
        per_seed = [run_seed(config_text, seed, str(out)) for seed in seeds]
    for entry in per_seed:
        log.info("seed %s: mean_mse=%.6g mean_trace=%.6g attacks=%d",
                 entry["seed"], entry["mean_mse"], entry["mean_trace"],
                 entry["attacks"])

    summary = {
        "scenario": sc.name,
        "mode": sc.mode,
        "steps": sc.steps,
        "num_robots": sc.num_robots,
        "num_targets": sc.num_targets,
        "seeds": seeds,
        "per_seed": [{k: v for k, v in entry.items()
                      if k not in ("mse", "trace", "effort")}
                     for entry in per_seed],
        "series": _aggregate(per_seed),
    }
    (out / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    manifest = {
        "package": "resilient-track",
        "config_sha256": config_hash(sc),
        "config": config_text,
        "seeds": seeds,
        "files": sorted([f"steps_{s}.csv" for s in seeds]
                        + [f"events_{s}.csv" for s in seeds]
                        + ["summary.json"]),
    }
    (out / "run_manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return summary


# ---------------------------------------------------------------------------
# exports


def _read_steps(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def export_series(run_dir: Path, column: str, out_path: Path) -> None:
    """step,mean,std across every steps_<seed>.csv in ``run_dir``."""
    files = sorted(run_dir.glob("steps_*.csv"),
                   key=lambda p: int(p.stem.split("_")[1]))
    if not files:
        raise ConfigError(f"no steps_<seed>.csv files in {run_dir}")
    columns = []
    for path in files:
        _, rows = _read_steps(path)
        columns.append([float(row[column]) for row in rows])
    data = np.array(columns)
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "mean", "std"])
        for t in range(data.shape[1]):
            writer.writerow([t, repr(float(data[:, t].mean())),
                             repr(float(data[:, t].std()))])


def export_trajectories(run_dir: Path, seed: int | None, out_path: Path) -> None:
    """Long-form t,entity,id,x,y for one seed's run."""
    files = sorted(run_dir.glob("steps_*.csv"),
                   key=lambda p: int(p.stem.split("_")[1]))
    if not files:
        raise ConfigError(f"no steps_<seed>.csv files in {run_dir}")
    if seed is None:
        path = files[0]
    else:
        path = run_dir / f"steps_{seed}.csv"
        if not path.exists():
            raise ConfigError(f"no steps file for seed {seed} in {run_dir}")
    header, rows = _read_steps(path)
    robot_ids = sorted(int(h[2:]) for h in header if re.fullmatch(r"rx\d+", h))
    target_ids = sorted(int(h[2:]) for h in header if re.fullmatch(r"tx\d+", h))
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "entity", "id", "x", "y"])
        for row in rows:
            t = row["t"]
            for i in robot_ids:
                writer.writerow([t, "robot", i, row[f"rx{i}"], row[f"ry{i}"]])
            for j in target_ids:
                writer.writerow([t, "target", j, row[f"tx{j}"], row[f"ty{j}"]])
            for j in target_ids:
                writer.writerow([t, "estimate", j, row[f"ex{j}"], row[f"ey{j}"]])


def export_boxplot(runs_dir: Path, out_path: Path) -> None:
    """num_robots,num_targets,seed,mean_trace rows from vary-team-* batches."""
    rows = []
    for sub in sorted(runs_dir.iterdir()):
        m = re.fullmatch(r"vary-team-(\d+)x(\d+)", sub.name)
        if m is None or not (sub / "summary.json").exists():
            continue
        summary = json.loads((sub / "summary.json").read_text(encoding="utf-8"))
        for entry in summary["per_seed"]:
            rows.append((int(m.group(1)), int(m.group(2)),
                         entry["seed"], entry["mean_trace"]))
    if not rows:
        raise ConfigError(f"no vary-team-MxN batch outputs under {runs_dir}")
    rows.sort()
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["num_robots", "num_targets", "seed", "mean_trace"])
        for m_, n_, seed, val in rows:
            writer.writerow([m_, n_, seed, repr(float(val))])


# ---------------------------------------------------------------------------
# CLI


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def _parse_seeds(raw: str) -> list[int]:
    raw = raw.strip()
    if ":" in raw:
        lo_str, hi_str = raw.split(":", 1)
        try:
            lo, hi = int(lo_str), int(hi_str)
        except ValueError as exc:
            raise CliUsageError(f"bad --seeds range {raw!r}") from exc
        if hi <= lo:
            raise CliUsageError(f"--seeds range {raw!r} is empty")
        return list(range(lo, hi))
    try:
        return [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliUsageError(f"bad --seeds list {raw!r}") from exc


def _scenario_from_args(args) -> ScenarioConfig:
    if args.config:
        sc = parse_config_file(args.config, preset_override=args.preset)
    elif args.preset:
        sc = parse_config_text("", preset_override=args.preset)
    else:
        sc = parse_config_text("")
    if args.mode:
        sc = replace(sc, mode=args.mode)
        problems = simulator.validate_scenario(sc)
        if problems:
            raise ConfigError("; ".join(problems))
    return sc


def _cmd_simulate(args) -> int:
    sc = _scenario_from_args(args)
    seed = args.seed if args.seed is not None else sc.seed
    run_batch(sc, [seed], args.out)
    print(f"wrote steps_{seed}.csv, events_{seed}.csv, summary.json, "
          f"run_manifest.json to {args.out}")
    return 0


def _cmd_batch(args) -> int:
    sc = _scenario_from_args(args)
    seeds = _parse_seeds(args.seeds)
    if not seeds:
        raise CliUsageError("--seeds resolved to an empty list")
    run_batch(sc, seeds, args.out, parallel=args.parallel)
    print(f"ran {len(seeds)} seeds of {sc.name!r} ({sc.mode}) into {args.out}")
    return 0


def _cmd_preset_list(args) -> int:
    for name in preset_names():
        print(name)
    return 0


def _cmd_export(args) -> int:
    out_path = Path(args.out)
    runs = Path(args.runs)
    if args.kind in ("mse", "trace", "effort"):
        export_series(runs, args.kind, out_path)
    elif args.kind == "trajectories":
        export_trajectories(runs, args.seed, out_path)
    elif args.kind == "boxplot":
        export_boxplot(runs, out_path)
    print(f"wrote {out_path}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="resilient-track",
                     description="Failure-aware multi-robot target tracking "
                                 "simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario_flags(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--preset", help="preset name (see preset-list)")
        p.add_argument("--mode", choices=(simulator.ADAPTIVE, simulator.VANILLA),
                       help="override planner mode")
        p.add_argument("--out", default="runs", help="output directory")

    p_sim = sub.add_parser("simulate", help="run a single seed")
    add_scenario_flags(p_sim)
    p_sim.add_argument("--seed", type=int, help="master seed (default: config's)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_batch = sub.add_parser("batch", help="run a batch of seeds")
    add_scenario_flags(p_batch)
    p_batch.add_argument("--seeds", required=True,
                         help="'lo:hi' (hi exclusive) or comma list")
    p_batch.add_argument("--parallel", type=int, default=1,
                         help="worker processes")
    p_batch.set_defaults(func=_cmd_batch)

    p_list = sub.add_parser("preset-list", help="list preset names")
    p_list.set_defaults(func=_cmd_preset_list)

    p_exp = sub.add_parser("export", help="post-process batch outputs")
    p_exp.add_argument("--kind", required=True,
                       choices=("mse", "trace", "effort", "trajectories",
                                "boxplot"))
    p_exp.add_argument("--runs", required=True,
                       help="run directory (boxplot: parent of vary-team dirs)")
    p_exp.add_argument("--out", required=True, help="output csv path")
    p_exp.add_argument("--seed", type=int, help="trajectories: which seed")
    p_exp.set_defaults(func=_cmd_export)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("RESILIENT_TRACK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # simulation/runtime failures
        log.exception("run failed")
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
