"""Team estimation: EKF over the stacked target state, and covariance
intersection for fusing beliefs with unknown cross-correlation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .motion import MeasurementStack, TargetModel, wrap_angle
from .world import TargetEstimate


class EstimationError(RuntimeError):
    """Numerically unusable update (singular / ill-conditioned innovation)."""


_COND_LIMIT = 1e12


def _symmetrize(p: np.ndarray) -> np.ndarray:
    return 0.5 * (p + p.T)


def block_replicate(block: np.ndarray, n: int) -> np.ndarray:
    """Block-diagonal replication of one per-target matrix."""
    return np.kron(np.eye(n), block)


def ekf_predict(est: TargetEstimate, model: TargetModel,
                v: np.ndarray | None = None) -> TargetEstimate:
    """Propagate the belief one step through the target dynamics.

    ``v`` is the stacked (2N,) control input; the tracking filter does not
    know the targets' intent, so the simulator passes None (zero input)
    and lets the process noise absorb the mismatch.
    """
    n = est.num_targets
    a = block_replicate(model.A, n)
    q = block_replicate(model.Q, n)
    mean = a @ est.mean
    if v is not None:
        mean = mean + block_replicate(model.B, n) @ np.asarray(v, dtype=float)
    cov = _symmetrize(a @ est.covariance @ a.T + q)
    return TargetEstimate(mean, cov)


def ekf_update(est: TargetEstimate, z: np.ndarray, H: np.ndarray,
               R: np.ndarray, predicted: np.ndarray | None = None,
               angle_mask: np.ndarray | None = None) -> TargetEstimate:
    """Measurement update in Joseph form.

    ``predicted`` is the nonlinear measurement map evaluated at the prior
    mean (defaults to H @ mean, the linear case); innovations flagged by
    ``angle_mask`` are wrapped to (-pi, pi].  An empty z is a no-op.
    """
    if z.shape[0] == 0:
        return est.copy()
    innovation = z - (H @ est.mean if predicted is None else predicted)
    if angle_mask is not None and angle_mask.any():
        innovation = innovation.copy()
        for i in np.flatnonzero(angle_mask):
            innovation[i] = wrap_angle(innovation[i])
    p = est.covariance
    s = _symmetrize(H @ p @ H.T + R)
    cond = float(np.linalg.cond(s))
    if not math.isfinite(cond) or cond > _COND_LIMIT:
        raise EstimationError(f"innovation covariance condition {cond:.3e} exceeds {_COND_LIMIT:.1e}")
    gain = np.linalg.solve(s, H @ p).T
    mean = est.mean + gain @ innovation
    ikh = np.eye(p.shape[0]) - gain @ H
    cov = _symmetrize(ikh @ p @ ikh.T + gain @ R @ gain.T)
    return TargetEstimate(mean, cov)


def apply_stack(est: TargetEstimate, stack: MeasurementStack) -> TargetEstimate:
    """Convenience: update with a stacked range-bearing system."""
    return ekf_update(est, stack.z, stack.H, stack.R,
                      predicted=stack.predicted, angle_mask=stack.angle_mask)


# ---------------------------------------------------------------------------
# covariance intersection


@dataclass
class FusionResult:
    estimate: TargetEstimate
    weight: float  # lambda assigned to the first input


def _ci_combine(inv1: np.ndarray, inv2: np.ndarray, y1: np.ndarray,
                y2: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    info = lam * inv1 + (1.0 - lam) * inv2
    cov = np.linalg.inv(info)
    mean = cov @ (lam * inv1 @ y1 + (1.0 - lam) * inv2 @ y2)
    return mean, _symmetrize(cov)


def ci_fuse(est1: TargetEstimate, est2: TargetEstimate,
            tol: float = 1e-6) -> FusionResult:
    """Covariance intersection of two beliefs.

    The mixing weight lambda in [0, 1] minimizes the fused trace; found by
    golden-section search since the trace is unimodal in lambda.
    """
    inv1 = np.linalg.inv(est1.covariance)
    inv2 = np.linalg.inv(est2.covariance)

    def fused_trace(lam: float) -> float:
        return float(np.trace(np.linalg.inv(lam * inv1 + (1.0 - lam) * inv2)))

    lam = _golden_section(fused_trace, 0.0, 1.0, tol)
    # endpoints can win when one input dominates everywhere
    candidates = [(fused_trace(c), c) for c in (0.0, lam, 1.0)]
    _, lam = min(candidates, key=lambda pair: pair[0])
    mean, cov = _ci_combine(inv1, inv2, est1.mean, est2.mean, lam)
    return FusionResult(TargetEstimate(mean, cov), lam)


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
