"""
Guided reverse-diffusion tour construction.

A waypoint trajectory X (H x 2, normalized to [-1, 1]^2) is sampled by
ancestral DDPM steps. After every step the guidance gradient of a
differentiable tour loss is subtracted. The RP visiting order is read off
the trajectory by first visit and refined with 2-opt.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..config import DenoiserKind, DiffusionConfig
from ..models.network_models import IntentWeights, NetworkScenario, RpPlan
from ..models.planning_models import DenoiserSpec, NoiseSchedule, WaypointTrajectory
from ..utils.exceptions import InvalidArgumentError
from ..utils.validators import validate_permutation, validate_xy
from .baseline_planners import distance_matrix, nearest_neighbor_tour
from .rng import DIFFUSION_STREAM, make_rng

log = logger.bind(component="diffusion_planner")

# Added under every square root of a norm so coincident points stay differentiable.
SAFE_NORM_EPS = 1e-12
# Minimum length decrease for a 2-opt exchange to count as an improvement.
TWO_OPT_TOLERANCE = 1e-12


def _safe_norm(d: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(d * d, axis=-1) + SAFE_NORM_EPS)


def _soft_terms(x: np.ndarray, rp: np.ndarray, beta_soft: float):
    """Distances D (H x M), softmin per RP, soft first-visit weights A and soft index per RP."""
    diff = x[:, None, :] - rp[None, :, :]
    dist = _safe_norm(diff)
    logits = -beta_soft * dist
    peak = logits.max(axis=0)
    weights = np.exp(logits - peak)
    total = weights.sum(axis=0)
    softmin = -(peak + np.log(total)) / beta_soft
    attention = weights / total
    index = np.arange(x.shape[0], dtype=float) @ attention
    return diff, dist, softmin, attention, index


def guidance_loss(x: np.ndarray, rp_normalized: np.ndarray, weights: IntentWeights,
                  beta_soft: float = 50.0) -> float:
    """
    Tour surrogate L(X).

    eta_t * path length + eta_p * sum_j w_j softmin_h |X_h - p_j|
    + eta_f * sum_j w_j (soft first-visit index of RP j) / H
    """
    x = validate_xy(x, "trajectory")
    rp = validate_xy(rp_normalized, "rp_positions")
    if x.shape[0] < 2:
        raise InvalidArgumentError("guidance needs at least two waypoints")
    w = weights.importance(len(rp))
    h = x.shape[0]

    loss = 0.0
    if weights.eta_t:
        loss += weights.eta_t * float(np.sum(_safe_norm(np.diff(x, axis=0))))
    if weights.eta_p or weights.eta_f:
        _, _, softmin, _, index = _soft_terms(x, rp, beta_soft)
        loss += weights.eta_p * float(np.dot(w, softmin))
        loss += weights.eta_f * float(np.dot(w, index)) / h
    return loss


def guidance_gradient(x: np.ndarray, rp_normalized: np.ndarray, weights: IntentWeights,
                      beta_soft: float = 50.0) -> np.ndarray:
    """Exact gradient of guidance_loss with respect to X, shape (H, 2)."""
    x = validate_xy(x, "trajectory")
    rp = validate_xy(rp_normalized, "rp_positions")
    if x.shape[0] < 2:
        raise InvalidArgumentError("guidance needs at least two waypoints")
    w = weights.importance(len(rp))
    h = x.shape[0]
    grad = np.zeros_like(x)

    if weights.eta_t:
        seg = np.diff(x, axis=0)
        unit = seg / _safe_norm(seg)[:, None]
        grad[1:] += weights.eta_t * unit
        grad[:-1] -= weights.eta_t * unit

    if weights.eta_p or weights.eta_f:
        diff, dist, _, attention, index = _soft_terms(x, rp, beta_soft)
        # dL/dD_hj for the softmin and the soft index terms
        d_loss = weights.eta_p * attention * w[None, :]
        positions = np.arange(h, dtype=float)[:, None]
        d_loss += (weights.eta_f / h) * (-beta_soft) * attention * (positions - index[None, :]) * w[None, :]
        grad += np.einsum("hj,hjk->hk", d_loss / dist, diff)

    return grad


def build_schedule(config: DiffusionConfig) -> NoiseSchedule:
    """Linear noise schedule from the diffusion config."""
    return NoiseSchedule.linear(config.k_steps, config.beta_start, config.beta_end, config.gamma0)


def resample_polyline(points: np.ndarray, h: int) -> np.ndarray:
    """h points at equal arc-length spacing along a polyline, both ends included."""
    points = validate_xy(points, "polyline")
    if len(points) == 1:
        return np.repeat(points, h, axis=0)
    cumulative = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))])
    if cumulative[-1] == 0.0:
        return np.repeat(points[:1], h, axis=0)
    targets = np.linspace(0.0, cumulative[-1], h)
    return np.column_stack([
        np.interp(targets, cumulative, points[:, 0]),
        np.interp(targets, cumulative, points[:, 1]),
    ])


def reference_trajectory(rp_normalized: np.ndarray, order: Sequence[int], h: int, closed: bool) -> np.ndarray:
    """Tour polyline through the RPs in the given order, resampled to h waypoints."""
    rp = validate_xy(rp_normalized, "rp_positions")
    idx = validate_permutation(order, len(rp))
    path = rp[idx]
    if closed and len(idx) > 1:
        path = np.vstack([path, path[:1]])
    return resample_polyline(path, h)


class _Denoiser:
    """Noise predictor bound to one sampling run."""

    def __init__(self, spec: DenoiserSpec, rp_normalized: np.ndarray, weights: IntentWeights,
                 h: int, closed: bool):
        self.spec = spec
        self.rp = rp_normalized
        self.weights = weights
        self.h = h
        self.reference: Optional[np.ndarray] = None

        if spec.kind == DenoiserKind.ANALYTIC_REFERENCE:
            if spec.reference_order is None:
                raise InvalidArgumentError("analytic_reference denoiser needs a reference order")
            if len(spec.reference_order) != len(rp_normalized):
                raise InvalidArgumentError(
                    f"reference order has {len(spec.reference_order)} entries for {len(rp_normalized)} RPs"
                )
            self.reference = reference_trajectory(rp_normalized, spec.reference_order, h, closed)
        elif spec.kind == DenoiserKind.EXTERNAL:
            if spec.handle is None or not hasattr(spec.handle, "predict"):
                raise InvalidArgumentError("external denoiser needs a handle with a predict() method")

    def __call__(self, x: np.ndarray, k: int, alpha_bar_k: float) -> np.ndarray:
        if self.spec.kind == DenoiserKind.ZERO:
            return np.zeros_like(x)
        if self.spec.kind == DenoiserKind.ANALYTIC_REFERENCE:
            return (x - np.sqrt(alpha_bar_k) * self.reference) / np.sqrt(1.0 - alpha_bar_k)
        eps = np.asarray(self.spec.handle.predict(x, k, alpha_bar_k, self.rp, self.weights), dtype=float)
        if eps.shape != x.shape:
            raise InvalidArgumentError(f"external denoiser returned shape {eps.shape}, expected {x.shape}")
        return eps


def sample_trajectory(seed: int, rp_normalized: np.ndarray, weights: IntentWeights,
                      schedule: NoiseSchedule, denoiser: DenoiserSpec, h: int,
                      beta_soft: float = 50.0, closed: bool = True,
                      snapshot_every: Optional[int] = None) -> WaypointTrajectory:
    """
    Run the guided reverse loop from k = K down to 1.

    All Gaussian draws (X_K and every z_k) are taken from the diffusion
    stream before the loop, so they do not depend on the weights or the
    denoiser. z_1 is zero.

    Args:
        seed: Experiment seed
        rp_normalized: RP coordinates in normalized space, shape (M, 2)
        weights: Intent weights bound to M RPs
        schedule: Noise schedule with K steps
        denoiser: Noise predictor choice
        h: Waypoint count H (>= M)
        beta_soft: Softmin temperature
        closed: Whether the analytic reference tour is closed
        snapshot_every: Keep X_k for k = K, K - s, ..., 0

    Returns:
        WaypointTrajectory in normalized coordinates

    Raises:
        InvalidArgumentError: If H < M or the denoiser does not match the RP set
    """
    rp = validate_xy(rp_normalized, "rp_positions")
    m = len(rp)
    if m < 1:
        raise InvalidArgumentError("sampling needs at least one RP")
    if h < max(m, 2):
        raise InvalidArgumentError(f"waypoint count {h} must be >= max(M, 2) = {max(m, 2)}")
    if snapshot_every is not None and snapshot_every < 1:
        raise InvalidArgumentError("snapshot_every must be >= 1")

    weights = weights.bind(m)
    predict = _Denoiser(denoiser, rp, weights, h, closed)
    k_steps = schedule.k_steps

    rng = make_rng(seed, DIFFUSION_STREAM)
    x = rng.standard_normal((h, 2))
    noise = rng.standard_normal((k_steps, h, 2))
    noise[0] = 0.0

    snapshots: Dict[int, np.ndarray] = {}
    if snapshot_every:
        snapshots[k_steps] = x.copy()

    for k in range(k_steps, 0, -1):
        i = k - 1
        alpha, alpha_bar = schedule.alpha[i], schedule.alpha_bar[i]
        eps = predict(x, k, alpha_bar)
        x_tilde = (x - (1.0 - alpha) / np.sqrt(1.0 - alpha_bar) * eps) / np.sqrt(alpha) \
            + schedule.sigma[i] * noise[i]
        if schedule.gamma[i] > 0:
            x = x_tilde - schedule.gamma[i] * guidance_gradient(x_tilde, rp, weights, beta_soft)
        else:
            x = x_tilde
        if snapshot_every and ((k_steps - (k - 1)) % snapshot_every == 0 or k == 1):
            snapshots[k - 1] = x.copy()

    return WaypointTrajectory(points=x, normalized=True, snapshots=snapshots)


def extract_order(x: np.ndarray, rp_positions: np.ndarray) -> List[int]:
    """
    Visiting order by first visit along the trajectory.

    q_j is the first waypoint nearest to RP j; RPs are sorted by q_j, then
    by their distance to that waypoint, then by index.
    """
    x = validate_xy(x, "trajectory")
    rp = validate_xy(rp_positions, "rp_positions")
    if len(x) == 0 or len(rp) == 0:
        raise InvalidArgumentError("extract_order needs waypoints and RPs")
    diff = x[:, None, :] - rp[None, :, :]
    dist = np.sqrt(np.einsum("hjk,hjk->hj", diff, diff))
    first = np.argmin(dist, axis=0)
    nearest = dist[first, np.arange(len(rp))]
    order = np.lexsort((np.arange(len(rp)), nearest, first))
    return [int(j) for j in order]


def two_opt(order: Sequence[int], rp_positions, closed: bool = True, max_passes: int = 64) -> List[int]:
    """
    First-improvement 2-opt.

    Pairs (i, j) are scanned in lexicographic order and an improving segment
    reversal is applied as soon as it is found. Passes repeat until one makes
    no improvement or max_passes is reached.

    Returns:
        Improved order; never longer than the input
    """
    rp = validate_xy(np.asarray(rp_positions, dtype=float) if not isinstance(rp_positions, np.ndarray)
                     else rp_positions, "rp_positions")
    tour = validate_permutation(order, len(rp))
    m = len(tour)
    if max_passes <= 0 or m < 3 or (closed and m < 4):
        return tour

    dist = distance_matrix(rp)
    passes = 0
    improved = True
    while improved and passes < max_passes:
        improved = False
        passes += 1
        for i in range(m - 1):
            for j in range(i + 1, m):
                if closed:
                    if i == 0 and j == m - 1:
                        continue
                    a, d = tour[i - 1], tour[(j + 1) % m]
                    if a == d:
                        continue
                    b, c = tour[i], tour[j]
                    delta = dist[a, c] + dist[b, d] - dist[a, b] - dist[c, d]
                else:
                    b, c = tour[i], tour[j]
                    delta = 0.0
                    if i > 0:
                        a = tour[i - 1]
                        delta += dist[a, c] - dist[a, b]
                    if j < m - 1:
                        d = tour[j + 1]
                        delta += dist[b, d] - dist[c, d]
                if delta < -TWO_OPT_TOLERANCE:
                    tour[i:j + 1] = tour[i:j + 1][::-1]
                    improved = True
    log.debug(f"2-opt finished after {passes} passes (converged={not improved})")
    return tour


def plan_tour(seed: int, scenario: NetworkScenario, plan: RpPlan, weights: IntentWeights,
              config: Optional[DiffusionConfig] = None,
              denoiser: Optional[DenoiserSpec] = None) -> Tuple[List[int], WaypointTrajectory]:
    """
    Sample a trajectory, read off the visiting order and refine it.

    Args:
        seed: Experiment seed
        scenario: Area, sink and closed-tour flag
        plan: Selected RPs
        weights: Intent weights (bound to the plan's M)
        config: Diffusion parameters
        denoiser: Override of the configured noise predictor

    Returns:
        (order, trajectory) with the trajectory in meters
    """
    config = config or DiffusionConfig()
    area = scenario.area
    rp_xy = plan.positions()
    rp_norm = area.normalize(rp_xy)

    if denoiser is None:
        reference = None
        if config.denoiser == DenoiserKind.ANALYTIC_REFERENCE:
            reference = nearest_neighbor_tour(rp_xy, start=scenario.sink)
        denoiser = DenoiserSpec(kind=config.denoiser, reference_order=reference)

    h = max(config.waypoints, plan.m, 2)
    trajectory = sample_trajectory(
        seed, rp_norm, weights, build_schedule(config), denoiser, h,
        beta_soft=config.beta_soft, closed=scenario.closed_tour,
        snapshot_every=config.snapshot_every,
    )

    waypoints = area.denormalize(trajectory.points)
    order = extract_order(waypoints, rp_xy)
    if config.two_opt:
        order = two_opt(order, rp_xy, scenario.closed_tour, config.max_passes)

    snapshots = {k: area.denormalize(v) for k, v in trajectory.snapshots.items()}
    return order, WaypointTrajectory(points=waypoints, normalized=False, snapshots=snapshots)
