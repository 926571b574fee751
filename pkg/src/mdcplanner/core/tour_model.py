"""
Tour arithmetic shared by every planner: tour length, travel time, the
early-visit importance score and the intent objective J.
"""

import math
from typing import Optional, Sequence

import numpy as np

from ..config import IntentConfig
from ..models.metric_models import MetricReport
from ..models.network_models import IntentWeights, Point2D, RpPlan, points_to_array
from ..models.planning_models import TourSchedule
from ..utils.exceptions import InvalidArgumentError
from ..utils.validators import validate_permutation, validate_positive, validate_xy


def _as_xy(rp_positions) -> np.ndarray:
    if isinstance(rp_positions, np.ndarray):
        return validate_xy(rp_positions, "rp_positions")
    points = list(rp_positions)
    if points and isinstance(points[0], Point2D):
        return points_to_array(points)
    return validate_xy(np.asarray(points, dtype=float).reshape(-1, 2), "rp_positions")


def segment_lengths(order: Sequence[int], rp_positions, closed: bool) -> np.ndarray:
    """Euclidean length of each leg of the tour, in visiting order."""
    xy = _as_xy(rp_positions)
    idx = validate_permutation(order, len(xy))
    path = xy[idx]
    if closed and len(idx) > 1:
        path = np.vstack([path, path[:1]])
    return np.linalg.norm(np.diff(path, axis=0), axis=1)


def tour_length(order: Sequence[int], rp_positions, closed: bool = True) -> float:
    """
    Total length of a tour through the RPs.

    Args:
        order: Permutation of RP indices
        rp_positions: RP coordinates, Point2D list or (M, 2) array
        closed: Whether the return leg to the first RP is included

    Returns:
        Length in meters

    Raises:
        InvalidArgumentError: If order is not a permutation or there are no RPs
    """
    return float(math.fsum(segment_lengths(order, rp_positions, closed)))


def travel_time(order: Sequence[int], rp_positions, speed_mps: float, closed: bool = True) -> float:
    """Tour length divided by the MDC speed."""
    validate_positive(speed_mps, "speed")
    return tour_length(order, rp_positions, closed) / speed_mps


def importance_score(order: Sequence[int], importance: Sequence[float]) -> float:
    """
    Importance-weighted early-visit score in [0, 1].

    The RP at visit position p contributes w_j * (1 - p/M); 1 means every unit
    of importance is visited first. With all weights zero the score is 1.
    """
    w = np.asarray(importance, dtype=float)
    idx = validate_permutation(order, len(w))
    total = w.sum()
    if total <= 0:
        return 1.0
    m = len(idx)
    position = np.empty(m, dtype=float)
    position[idx] = np.arange(m)
    return float(np.dot(w, 1.0 - position / m) / total)


def objective(schedule: TourSchedule, weights: IntentWeights, metrics: MetricReport,
              importance: Optional[Sequence[float]] = None) -> float:
    """
    Dimensionless intent objective J.

    J = eta_t*T/T_ref + eta_e*E/E_ref + eta_f*freshness/Delta_ref + eta_p*(1 - score)

    Args:
        schedule: Tour schedule the metrics were computed for
        weights: Intent weights; rp_importance is bound to the schedule's M
        metrics: Report carrying the reference values
        importance: Optional explicit w_j overriding weights.rp_importance

    Raises:
        InvalidArgumentError: If any reference value is <= 0
    """
    refs = {"t_ref_s": metrics.t_ref_s, "e_ref_j": metrics.e_ref_j, "delta_ref_s": metrics.delta_ref_s}
    for name, value in refs.items():
        if not value > 0:
            raise InvalidArgumentError(f"reference value {name} must be > 0, got {value}",
                                       details={name: value})

    m = len(schedule.order)
    w = np.asarray(importance, dtype=float) if importance is not None else weights.importance(m)
    score = importance_score(schedule.order, w)

    return float(
        weights.eta_t * metrics.tour_time_s / metrics.t_ref_s
        + weights.eta_e * metrics.total_energy_j / metrics.e_ref_j
        + weights.eta_f * metrics.freshness_s / metrics.delta_ref_s
        + weights.eta_p * (1.0 - score)
    )


def bind_intent(intent: IntentConfig, plan: RpPlan) -> IntentWeights:
    """
    Resolve the configured importance rule into weights for a plan.

    "uniform" gives w_j = 1, "load" gives w_j = Lambda_j / mean(Lambda)
    and an explicit list must have one entry per RP.
    """
    m = plan.m
    rule = intent.rp_importance
    if isinstance(rule, list):
        importance = [float(w) for w in rule]
    elif rule == "load":
        rates = plan.rates()
        mean = rates.mean()
        importance = (rates / mean).tolist() if mean > 0 else [1.0] * m
    else:
        importance = [1.0] * m
    return IntentWeights(
        eta_t=intent.eta_t,
        eta_e=intent.eta_e,
        eta_f=intent.eta_f,
        eta_p=intent.eta_p,
        rp_importance=importance,
    ).bind(m)
