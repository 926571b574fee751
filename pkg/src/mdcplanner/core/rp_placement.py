"""
Load-aware rendezvous-point placement.

Greedy selection: at every step pick the candidate whose communication disc
holds the largest uncovered offered load, then drop those sensors from the
uncovered set. Afterwards every sensor is associated with its nearest RP.
"""

import math
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
from loguru import logger

from ..models.network_models import (
    PLAN_SCHEMA_VERSION,
    CandidateSet,
    NetworkScenario,
    RpPlan,
    array_to_points,
)
from ..utils.exceptions import (
    ConfigurationError,
    InvalidArgumentError,
    InvariantViolationError,
    StorageError,
)
from ..utils.validators import validate_positive, validate_xy

log = logger.bind(component="rp_placement")

# Candidate sets above this size skip the per-pick brute-force argmax check.
VERIFY_MAX_CANDIDATES = 500


def _squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def coverage_neighborhood(c, sensor_positions: np.ndarray, uncovered: Iterable[int], r_c: float) -> List[int]:
    """
    Uncovered sensors within r_c of location c (boundary inclusive).

    Args:
        c: Candidate location, Point2D or (x, y)
        sensor_positions: (N, 2) sensor coordinates
        uncovered: Indices into sensor_positions still uncovered
        r_c: Communication range in meters

    Returns:
        Sorted sensor indices
    """
    validate_positive(r_c, "comm_range")
    idx = np.array(sorted(int(i) for i in uncovered), dtype=int)
    if idx.size == 0:
        return []
    center = np.array(c.as_tuple() if hasattr(c, "as_tuple") else c, dtype=float)
    diff = np.asarray(sensor_positions, dtype=float)[idx] - center
    inside = np.einsum("ij,ij->i", diff, diff) <= r_c * r_c
    return idx[inside].tolist()


def offered_load(c, sensor_positions: np.ndarray, rates: np.ndarray, uncovered: Iterable[int],
                 r_c: float) -> float:
    """Total generation rate of the uncovered sensors that c can hear."""
    members = coverage_neighborhood(c, sensor_positions, uncovered, r_c)
    return float(math.fsum(np.asarray(rates, dtype=float)[members]))


def associate(scenario: NetworkScenario, rp_positions) -> np.ndarray:
    """
    Nearest-RP index of every sensor, in sensor order.

    Ties go to the lowest RP index.
    """
    rp_xy = validate_xy(rp_positions if isinstance(rp_positions, np.ndarray)
                        else np.array([p.as_tuple() for p in rp_positions], dtype=float).reshape(-1, 2),
                        "rp_positions")
    if len(rp_xy) == 0:
        raise InvalidArgumentError("association needs at least one RP")
    if scenario.n_sensors == 0:
        return np.zeros(0, dtype=int)
    d2 = _squared_distances(scenario.positions(), rp_xy)
    return np.argmin(d2, axis=1)


def _verify_pick(candidates_xy: np.ndarray, positions: np.ndarray, rates: np.ndarray,
                 pool: np.ndarray, selected: List[int], picked: int, r_c: float) -> None:
    """Recompute W for every candidate with the scalar routine and check the pick."""
    members = np.flatnonzero(pool)
    loads = np.array([
        -math.inf if j in selected else offered_load(c, positions, rates, members, r_c)
        for j, c in enumerate(candidates_xy)
    ])
    best = loads.max()
    if loads[picked] < best - 1e-9 * max(1.0, abs(best)):
        raise InvariantViolationError(
            f"greedy pick {picked} has W={loads[picked]} below the maximum {best}",
            details={"picked": picked, "best": int(np.argmax(loads))},
        )


def select_rps(scenario: NetworkScenario, candidates: CandidateSet, m: int,
               verify: bool = False) -> RpPlan:
    """
    Greedily place m RPs and associate every sensor.

    Args:
        scenario: Sensors, rates and communication range
        candidates: Feasible RP locations
        m: Number of RPs
        verify: Recompute each pick's argmax by brute force (small candidate sets only)

    Returns:
        RpPlan with positions, association, aggregate rates and coverage flags

    Raises:
        InvalidArgumentError: If m < 1 or m exceeds the candidate count
        InvariantViolationError: If a greedy or conservation check fails
    """
    n_candidates = len(candidates)
    if m < 1:
        raise InvalidArgumentError(f"m must be >= 1, got {m}")
    if m > n_candidates:
        raise InvalidArgumentError(
            f"cannot place {m} RPs on {n_candidates} candidates",
            details={"m": m, "candidates": n_candidates},
        )

    r_c = scenario.comm_range_m
    c_xy = candidates.as_array()
    positions = scenario.positions()
    rates = scenario.rates()
    n = scenario.n_sensors

    cover = (_squared_distances(c_xy, positions) <= r_c * r_c) if n else np.zeros((n_candidates, 0), bool)
    cover_f = cover.astype(float)

    uncovered = np.ones(n, dtype=bool)
    available = np.ones(n_candidates, dtype=bool)
    selected: List[int] = []
    loads: List[float] = []
    coverage_picks = 0

    for it in range(m):
        in_coverage_phase = bool(uncovered.any())
        pool = uncovered if in_coverage_phase else np.ones(n, dtype=bool)
        w = cover_f @ (rates * pool)
        w = np.where(available, w, -np.inf)
        pick = int(np.argmax(w))  # first maximum = lowest candidate index

        if verify and n_candidates <= VERIFY_MAX_CANDIDATES:
            _verify_pick(c_xy, positions, rates, pool, selected, pick, r_c)

        selected.append(pick)
        loads.append(float(w[pick]))
        available[pick] = False
        if in_coverage_phase:
            coverage_picks += 1
            uncovered &= ~cover[pick]
        log.debug(f"pick {it + 1}/{m}: candidate {pick} W={w[pick]:.1f} b/s, "
                  f"{int(uncovered.sum())} sensors uncovered")

    # Within each phase the pool is fixed or shrinking, so W cannot grow.
    for phase in (loads[:coverage_picks], loads[coverage_picks:]):
        if any(b > a for a, b in zip(phase, phase[1:])):
            raise InvariantViolationError("greedy offered loads increased between picks",
                                          details={"loads": loads})

    if coverage_picks < m:
        log.debug(f"All sensors covered after {coverage_picks} picks; "
                  f"{m - coverage_picks} RPs placed on load over all sensors")
    if uncovered.any():
        log.warning(f"{int(uncovered.sum())} sensors lie outside every RP's range")

    rp_xy = c_xy[selected]
    assignment = associate(scenario, rp_xy)
    rp_rate = np.bincount(assignment, weights=rates, minlength=m) if n else np.zeros(m)

    if not math.isclose(math.fsum(rp_rate), math.fsum(rates), rel_tol=1e-12, abs_tol=1e-9):
        raise InvariantViolationError(
            "aggregate RP rates do not sum to the total sensor rate",
            details={"rp_total": math.fsum(rp_rate), "sensor_total": math.fsum(rates)},
        )

    if n:
        assigned_d2 = np.einsum("ij,ij->i", positions - rp_xy[assignment], positions - rp_xy[assignment])
        covered = assigned_d2 <= r_c * r_c
    else:
        covered = np.zeros(0, dtype=bool)

    ids = scenario.sensor_ids()
    plan = RpPlan(
        rp_positions=array_to_points(rp_xy),
        assoc={sid: int(j) for sid, j in zip(ids, assignment)},
        rp_rate_bps=[float(v) for v in rp_rate],
        coverage_flag={sid: bool(f) for sid, f in zip(ids, covered)},
        selected_loads_bps=loads,
        candidate_indices=selected,
        coverage_picks=coverage_picks,
    )
    log.info(f"Placed {m} RPs for {n} sensors ({int(covered.sum())} covered)")
    return plan


def save_rp_plan(plan: RpPlan, path: Union[str, Path]) -> Path:
    """Write an RP plan as schema-versioned JSON."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(plan.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Failed to write RP plan to {path}: {e}")
    return path


def load_rp_plan(path: Union[str, Path], scenario: Optional[NetworkScenario] = None) -> RpPlan:
    """
    Read an RP plan written by save_rp_plan.

    When a scenario is given, the plan must associate exactly its sensors.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Failed to read RP plan from {path}: {e}")
    try:
        plan = RpPlan.model_validate_json(text)
    except ValueError as e:
        raise ConfigurationError(f"Invalid RP plan document {path}: {e}")
    if plan.schema_version != PLAN_SCHEMA_VERSION:
        raise ConfigurationError(f"Unsupported RP plan schema version {plan.schema_version}")
    if scenario is not None and set(plan.assoc) != set(scenario.sensor_ids()):
        raise ConfigurationError("RP plan does not match the scenario's sensors")
    return plan
