"""
Service-time model: the dwell-time fixed point, its closed form, buffered
data per RP and arrival times along a tour.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..config import ServiceConfig
from ..models.network_models import NetworkScenario, RpPlan
from ..models.planning_models import BufferState, ServiceSolution, TourSchedule
from ..utils.exceptions import InfeasibleSystemError, InvalidArgumentError
from ..utils.validators import validate_non_negative, validate_permutation, validate_positive
from .tour_model import segment_lengths, tour_length

log = logger.bind(component="service_model")


def _rates(plan_or_rates) -> np.ndarray:
    if isinstance(plan_or_rates, RpPlan):
        return plan_or_rates.rates()
    return np.asarray(plan_or_rates, dtype=float)


def _upload_rates(upload_rates, m: int) -> np.ndarray:
    c = np.asarray(upload_rates, dtype=float)
    if c.ndim == 0:
        c = np.full(m, float(c))
    if len(c) != m:
        raise InvalidArgumentError(f"got {len(c)} upload rates for {m} RPs")
    if np.any(~np.isfinite(c)) or np.any(c <= 0):
        raise InvalidArgumentError("upload rates must be finite and > 0", details={"upload_rates": c.tolist()})
    return c


def utilization(plan_or_rates, upload_rates) -> float:
    """rho = sum_j Lambda_j / C_j; the fluid system is stable iff rho < 1."""
    lam = _rates(plan_or_rates)
    return float(math.fsum(lam / _upload_rates(upload_rates, len(lam))))


def solve_dwell(plan_or_rates, travel_time_s: float, upload_rates,
                epsilon_s: float = 1e-6, max_iter: int = 10_000) -> ServiceSolution:
    """
    Iterate T <- T_tr + sum_j Lambda_j T / C_j from T = T_tr.

    Stops when two successive tour times differ by at most epsilon_s. The
    distance to the exact fixed point is then at most epsilon_s * rho / (1 - rho).

    Args:
        plan_or_rates: RpPlan or the aggregate rates Lambda_j
        travel_time_s: Travel-only time T_tr
        upload_rates: C_j per RP, or one rate for all
        epsilon_s: Convergence tolerance in seconds
        max_iter: Iteration cap

    Returns:
        ServiceSolution; converged is False when rho >= 1 (after one
        iteration) or when max_iter is reached

    Raises:
        InvalidArgumentError: If any C_j <= 0, T_tr < 0 or epsilon_s <= 0
    """
    validate_non_negative(travel_time_s, "travel_time")
    validate_positive(epsilon_s, "epsilon")
    if max_iter < 1:
        raise InvalidArgumentError(f"max_iter must be >= 1, got {max_iter}")

    lam = _rates(plan_or_rates)
    c = _upload_rates(upload_rates, len(lam))
    share = lam / c
    rho = float(math.fsum(share))

    t_prev = float(travel_time_s)
    dwell = np.zeros(len(lam))
    t = t_prev
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        dwell = share * t_prev
        t = float(travel_time_s) + math.fsum(dwell)
        if rho >= 1.0:
            # diverging iteration: keep the first iterate
            break
        if abs(t - t_prev) <= epsilon_s:
            converged = True
            break
        t_prev = t

    if rho >= 1.0:
        log.warning(f"Service fixed point infeasible: utilization {rho:.4f} >= 1")
    elif not converged:
        log.warning(f"Service fixed point not converged after {iterations} iterations (rho={rho:.4f})")
    else:
        log.debug(f"Service fixed point: T={t:.6f} s after {iterations} iterations (rho={rho:.4f})")

    return ServiceSolution(
        dwell_s=[float(v) for v in dwell],
        tour_time_s=t,
        travel_time_s=float(travel_time_s),
        iterations=iterations,
        converged=converged,
        utilization=rho,
    )


def closed_form_tour_time(travel_time_s: float, plan_or_rates, upload_rates) -> float:
    """
    Exact fixed point T* = T_tr / (1 - rho).

    Raises:
        InfeasibleSystemError: If rho >= 1
    """
    validate_non_negative(travel_time_s, "travel_time")
    rho = utilization(plan_or_rates, upload_rates)
    if rho >= 1.0:
        raise InfeasibleSystemError(f"utilization {rho:.6f} >= 1 has no finite tour time",
                                    details={"utilization": rho})
    return float(travel_time_s) / (1.0 - rho)


def iteration_bound(travel_time_s: float, rho: float, epsilon_s: float) -> int:
    """Upper bound on solve_dwell's iteration count for rho in (0, 1)."""
    if not 0.0 < rho < 1.0 or travel_time_s <= 0:
        return 1
    return max(1, math.ceil(math.log(epsilon_s / (travel_time_s * rho)) / math.log(rho)) + 2)


def buffered_data(plan_or_rates, tour_time_s: float, capacities_bits) -> BufferState:
    """
    Data each RP accumulates over one tour, capped at its buffer.

    Data beyond the capacity is lost, not carried to the next tour. A load
    that exactly fills the buffer does not overflow.
    """
    validate_non_negative(tour_time_s, "tour_time")
    lam = _rates(plan_or_rates)
    caps = np.asarray(capacities_bits, dtype=float)
    if caps.ndim == 0:
        caps = np.full(len(lam), float(caps))
    if len(caps) != len(lam):
        raise InvalidArgumentError(f"got {len(caps)} buffer capacities for {len(lam)} RPs")

    offered = lam * tour_time_s
    stored = np.minimum(offered, caps)
    overflow = offered > caps
    if overflow.any():
        log.warning(f"{int(overflow.sum())} RP buffers overflow over a {tour_time_s:.1f} s tour")
    return BufferState(
        offered_bits=offered.tolist(),
        stored_bits=stored.tolist(),
        overflow_bits=(offered - stored).tolist(),
        overflow=overflow.tolist(),
    )


def visit_times(order: Sequence[int], rp_positions, dwell_s: Sequence[float], speed_mps: float) -> np.ndarray:
    """
    Arrival time of the MDC at each RP, indexed by RP id.

    The tour starts at its first RP at t = 0; each later arrival adds the
    preceding legs' travel and the dwell spent at earlier stops.
    """
    validate_positive(speed_mps, "speed")
    idx = validate_permutation(order, len(dwell_s))
    legs = segment_lengths(idx, rp_positions, closed=False) / speed_mps
    dwell = np.asarray(dwell_s, dtype=float)
    arrival = np.zeros(len(idx))
    if len(idx) > 1:
        arrival[1:] = np.cumsum(legs + dwell[idx[:-1]])
    times = np.empty(len(idx))
    times[idx] = arrival
    return times


def build_schedule(order: Sequence[int], scenario: NetworkScenario, plan: RpPlan,
                   config: Optional[ServiceConfig] = None) -> Tuple[TourSchedule, ServiceSolution]:
    """
    Turn a visiting order into a full schedule.

    Computes travel time, solves the dwell fixed point and derives arrival times.
    """
    config = config or ServiceConfig()
    idx = validate_permutation(order, plan.m)
    rp_xy = plan.positions()
    length = tour_length(idx, rp_xy, scenario.closed_tour)
    t_tr = length / scenario.mdc_speed_mps

    solution = solve_dwell(plan, t_tr, scenario.upload_rates(plan.m),
                           epsilon_s=config.epsilon_s, max_iter=config.max_iter)
    arrivals = visit_times(idx, rp_xy, solution.dwell_s, scenario.mdc_speed_mps)

    schedule = TourSchedule(
        order=idx,
        dwell_s=solution.dwell_s,
        travel_time_s=t_tr,
        tour_time_s=solution.tour_time_s,
        tour_length_m=length,
        visit_times_s=arrivals.tolist(),
        converged=solution.converged,
        iterations=solution.iterations,
        utilization=solution.utilization,
    )
    return schedule, solution
