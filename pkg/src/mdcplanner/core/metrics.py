"""
Evaluation metrics for one (scenario, plan, schedule) triple.

Loss is fluid: fractions of generated data are removed by buffer caps and
per-hop link failures, never sampled per packet. The formula set is tagged
by MetricConfig.model_version.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from ..config import LinkModelConfig, MetricConfig, RadioModelConfig
from ..models.metric_models import MetricReport
from ..models.network_models import NetworkScenario, RpPlan
from ..models.planning_models import BufferState, ServiceSolution, TourSchedule
from ..utils.exceptions import InvalidArgumentError
from .service_model import buffered_data

log = logger.bind(component="metrics")


@dataclass(frozen=True)
class DeliveryProfile:
    """Per-sensor delivery model, arrays in sensor order."""

    distance_m: np.ndarray
    hops: np.ndarray
    reachable: np.ndarray
    accept: np.ndarray
    delivered_fraction: np.ndarray


def freshness(schedule: TourSchedule, stored_bits: Sequence[float]) -> float:
    """
    Data-weighted mean age of collected data at delivery.

    Each RP's data is on average T/2 old when collected and waits T - t_j
    more until the tour ends at the sink. Zero when nothing is stored.
    """
    d = np.asarray(stored_bits, dtype=float)
    total = d.sum()
    if total <= 0:
        return 0.0
    t = schedule.tour_time_s
    visits = np.asarray(schedule.visit_times_s, dtype=float)
    if len(visits) != len(d):
        raise InvalidArgumentError("schedule has no arrival time for every RP")
    age = 0.5 * t + (t - visits)
    return float(np.dot(d / total, age))


def hop_count(distance_m: np.ndarray, comm_range_m: float) -> np.ndarray:
    """max(1, ceil(d / R_c)) per sensor."""
    ratio = np.asarray(distance_m, dtype=float) / comm_range_m
    # absorb rounding so a sensor at exactly k * R_c needs k hops
    return np.maximum(1, np.ceil(ratio - 1e-12)).astype(int)


def delivery_model(scenario: NetworkScenario, plan: RpPlan, buffer: BufferState,
                   link: LinkModelConfig = LinkModelConfig()) -> DeliveryProfile:
    """
    Fraction of each sensor's data that reaches the sink.

    fraction = p_link ** hops * accept_j, zero beyond hop_max, where accept_j
    is the share of RP j's offered data its buffer kept.
    """
    positions = scenario.positions()
    assignment = plan.assignment(scenario.sensor_ids())
    rp_xy = plan.positions()
    distance = np.linalg.norm(positions - rp_xy[assignment], axis=1) if len(positions) else np.zeros(0)
    hops = hop_count(distance, scenario.comm_range_m)
    reachable = hops <= link.hop_max
    accept = buffer.accept_fraction()[assignment] if len(positions) else np.zeros(0)

    fraction = np.where(reachable, np.power(link.p_link, hops) * accept, 0.0)
    if (~reachable).any():
        log.warning(f"{int((~reachable).sum())} sensors need more than {link.hop_max} hops and deliver nothing")
    return DeliveryProfile(distance, hops, reachable, accept, fraction)


def tx_energy_per_bit(distance_m, radio: RadioModelConfig = RadioModelConfig()):
    """First-order radio transmit energy e(d) = E_elec + eps_fs * d^2."""
    d = np.asarray(distance_m, dtype=float)
    return radio.e_elec_j_per_bit + radio.eps_fs_j_per_bit_m2 * d * d


def energy_report(scenario: NetworkScenario, profile: DeliveryProfile, offered_bits: np.ndarray,
                  delivered_bits: float, metric_config: MetricConfig = MetricConfig()):
    """
    Sensor-side radio energy over one tour and the resulting efficiency.

    Each hop transmits over d / hops and is received once; hop k carries
    the p_link ** (k - 1) share that survived the earlier hops. Sensors past
    the hop cap do not transmit.

    Args:
        scenario: Scenario supplying R_c
        profile: Per-sensor delivery profile
        offered_bits: Bits each sensor generates over the tour
        delivered_bits: Bits delivered at the sink
        metric_config: Link and radio parameters

    Returns:
        (total_energy_j, efficiency) with efficiency in [0, 1]
    """
    radio, link = metric_config.radio, metric_config.link
    offered = np.asarray(offered_bits, dtype=float)
    total = 0.0
    for bits, dist, hops, ok in zip(offered, profile.distance_m, profile.hops, profile.reachable):
        if not ok or bits <= 0:
            continue
        per_hop = float(tx_energy_per_bit(dist / hops, radio)) + radio.e_elec_j_per_bit
        survived = math.fsum(link.p_link ** k for k in range(int(hops)))
        total += bits * per_hop * survived

    if total <= 0 or delivered_bits <= 0:
        return total, 0.0
    reference = delivered_bits * float(tx_energy_per_bit(scenario.comm_range_m, radio))
    return total, float(min(1.0, max(0.0, reference / total)))


def throughput(delivered_bits: float, tour_time_s: float) -> float:
    """Delivered bits per second of tour."""
    if not tour_time_s > 0:
        raise InvalidArgumentError(f"tour_time must be > 0, got {tour_time_s}")
    return float(delivered_bits) / float(tour_time_s)


def fairness(fractions: Sequence[float]) -> float:
    """
    Jain's index (sum x)^2 / (N sum x^2).

    An all-zero vector is perfectly fair by convention.
    """
    x = np.asarray(fractions, dtype=float)
    if x.size == 0:
        raise InvalidArgumentError("fairness needs at least one value")
    squares = float(np.dot(x, x))
    if squares == 0.0:
        return 1.0
    return float(min(1.0, x.sum() ** 2 / (x.size * squares)))


def reference_values(scenario: NetworkScenario, generated_bits: float,
                     radio: RadioModelConfig = RadioModelConfig()):
    """
    Normalizers of the objective.

    T_ref is the time to drive the area's perimeter, Delta_ref equals T_ref
    and E_ref is the one-hop-at-full-range cost of all generated bits
    (floored at one bit so it stays positive).
    """
    area = scenario.area
    t_ref = 2.0 * (area.width + area.height) / scenario.mdc_speed_mps
    per_bit = float(tx_energy_per_bit(scenario.comm_range_m, radio)) + radio.e_elec_j_per_bit
    e_ref = max(generated_bits, 1.0) * per_bit
    return t_ref, e_ref, t_ref


def full_report(scenario: NetworkScenario, plan: RpPlan, schedule: TourSchedule,
                solution: Optional[ServiceSolution] = None,
                metric_config: MetricConfig = MetricConfig()) -> MetricReport:
    """
    Compute every metric for a scheduled tour.

    Returns:
        MetricReport with reference values for the objective
    """
    t = schedule.tour_time_s
    m = plan.m
    buffer = buffered_data(plan, t, scenario.buffer_capacities(m))
    profile = delivery_model(scenario, plan, buffer, metric_config.link)

    rates = scenario.rates()
    offered = rates * t
    generated = float(math.fsum(offered))
    collected_per_sensor = np.where(profile.reachable, offered * profile.accept, 0.0)
    collected = float(math.fsum(collected_per_sensor))
    delivered = float(math.fsum(offered * profile.delivered_fraction))

    if generated > 0:
        collection_ratio = min(1.0, collected / generated)
        pdr = min(collection_ratio, delivered / generated)
    else:
        collection_ratio, pdr = 1.0, 1.0

    total_energy, efficiency = energy_report(scenario, profile, offered, delivered, metric_config)
    t_ref, e_ref, delta_ref = reference_values(scenario, generated, metric_config.radio)

    converged = solution.converged if solution is not None else schedule.converged
    utilization = solution.utilization if solution is not None else schedule.utilization

    return MetricReport(
        tour_time_s=t,
        tour_length_m=schedule.tour_length_m,
        travel_time_s=schedule.travel_time_s,
        total_dwell_s=schedule.total_dwell_s,
        freshness_s=freshness(schedule, buffer.stored_bits),
        collection_ratio=collection_ratio,
        pdr=pdr,
        energy_efficiency=efficiency,
        throughput_bps=throughput(delivered, t) if t > 0 else 0.0,
        fairness=fairness(profile.delivered_fraction) if scenario.n_sensors else 1.0,
        total_energy_j=total_energy,
        generated_bits=generated,
        collected_bits=collected,
        delivered_bits=delivered,
        utilization=utilization,
        service_converged=converged,
        t_ref_s=t_ref,
        e_ref_j=e_ref,
        delta_ref_s=delta_ref,
        model_version=metric_config.model_version,
    )
