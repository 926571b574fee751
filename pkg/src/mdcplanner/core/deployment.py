"""
Seeded scenario generation and RP candidate construction.
"""

import math
from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger

from ..config import CandidateConfig, CandidateMode
from ..models.network_models import (
    SCENARIO_SCHEMA_VERSION,
    CandidateSet,
    DeploymentLayout,
    NetworkScenario,
    ScenarioTemplate,
    SensorNode,
    array_to_points,
)
from ..utils.exceptions import ConfigurationError, InvalidArgumentError, StorageError
from .rng import SCENARIO_STREAM, make_rng

log = logger.bind(component="deployment")


def _uniform_positions(rng: np.random.Generator, n: int, template: ScenarioTemplate) -> np.ndarray:
    area = template.area
    xs = rng.uniform(area.x_min, area.x_max, size=n)
    ys = rng.uniform(area.y_min, area.y_max, size=n)
    return np.column_stack([xs, ys])


def _clustered_positions(rng: np.random.Generator, n: int, template: ScenarioTemplate) -> np.ndarray:
    area = template.area
    centers = np.column_stack([
        rng.uniform(area.x_min, area.x_max, size=template.n_clusters),
        rng.uniform(area.y_min, area.y_max, size=template.n_clusters),
    ])
    membership = rng.integers(0, template.n_clusters, size=n)
    xy = centers[membership] + rng.normal(0.0, template.cluster_spread_m, size=(n, 2))
    xy[:, 0] = np.clip(xy[:, 0], area.x_min, area.x_max)
    xy[:, 1] = np.clip(xy[:, 1], area.y_min, area.y_max)
    return xy


def generate_scenario(seed: int, n_sensors: int, template: ScenarioTemplate) -> NetworkScenario:
    """
    Place n_sensors sensors in the template's area.

    Args:
        seed: Experiment seed; the scenario stream is derived from it
        n_sensors: Number of sensors N
        template: Everything except the sensor positions

    Returns:
        NetworkScenario; equal inputs give an identical scenario

    Raises:
        InvalidArgumentError: If n_sensors < 1 or the area is degenerate
    """
    if n_sensors < 1:
        raise InvalidArgumentError(f"n_sensors must be >= 1, got {n_sensors}")
    if template.area.is_degenerate:
        raise InvalidArgumentError("deployment area is degenerate",
                                   details={"width": template.area.width, "height": template.area.height})

    rng = make_rng(seed, SCENARIO_STREAM)
    if template.layout == DeploymentLayout.CLUSTERED:
        xy = _clustered_positions(rng, n_sensors, template)
    else:
        xy = _uniform_positions(rng, n_sensors, template)

    sensors = [
        SensorNode(id=i, position=p, rate_bps=template.rate_bps)
        for i, p in enumerate(array_to_points(xy))
    ]
    log.debug(f"Generated {template.layout.value} scenario: seed={seed}, N={n_sensors}")

    return NetworkScenario(
        area=template.area,
        sensors=sensors,
        comm_range_m=template.comm_range_m,
        sink=template.sink,
        mdc_speed_mps=template.mdc_speed_mps,
        upload_rate_bps=template.upload_rate_bps,
        buffer_bits=template.buffer_bits,
        closed_tour=template.closed_tour,
    )


def _lattice(start: float, stop: float, spacing: float) -> np.ndarray:
    # the tolerance keeps the far boundary line when the extent is a multiple of
    # spacing; that line is snapped onto the boundary so rounding never leaves the area
    count = int(math.floor((stop - start) / spacing + 1e-9)) + 1
    points = np.minimum(start + spacing * np.arange(count), stop)
    if count > 1 and stop - points[-1] <= 1e-9 * spacing:
        points[-1] = stop
    return points


def build_candidates(scenario: NetworkScenario, config: CandidateConfig = CandidateConfig()) -> CandidateSet:
    """
    Build the feasible RP locations.

    Grid mode returns every lattice point of the closed area, ordered by
    (x, y). Sensor mode copies the sensor coordinates in sensor order.

    Raises:
        InvalidArgumentError: If the grid spacing is <= 0 or there are no candidates
    """
    if config.mode == CandidateMode.SENSOR_POSITIONS:
        if not scenario.sensors:
            raise InvalidArgumentError("sensor_positions candidates need at least one sensor")
        return CandidateSet(points=[s.position for s in scenario.sensors], source=config.mode)

    spacing = config.spacing_m
    if not (math.isfinite(spacing) and spacing > 0):
        raise InvalidArgumentError(f"grid spacing must be > 0, got {spacing}")

    area = scenario.area
    xs = _lattice(area.x_min, area.x_max, spacing)
    ys = _lattice(area.y_min, area.y_max, spacing)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    xy = np.column_stack([gx.ravel(), gy.ravel()])
    log.debug(f"Built {len(xy)} grid candidates at {spacing} m spacing")
    return CandidateSet(points=array_to_points(xy), source=config.mode, spacing_m=spacing)


def save_scenario(scenario: NetworkScenario, path: Union[str, Path]) -> Path:
    """Write a scenario as schema-versioned JSON."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(scenario.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Failed to write scenario to {path}: {e}")
    return path


def load_scenario(path: Union[str, Path]) -> NetworkScenario:
    """
    Read a scenario written by save_scenario.

    Raises:
        StorageError: If the file cannot be read
        ConfigurationError: If the document is not a valid scenario
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Failed to read scenario from {path}: {e}")
    try:
        scenario = NetworkScenario.model_validate_json(text)
    except ValueError as e:
        raise ConfigurationError(f"Invalid scenario document {path}: {e}")
    if scenario.schema_version != SCENARIO_SCHEMA_VERSION:
        raise ConfigurationError(
            f"Unsupported scenario schema version {scenario.schema_version}",
            details={"expected": SCENARIO_SCHEMA_VERSION},
        )
    return scenario