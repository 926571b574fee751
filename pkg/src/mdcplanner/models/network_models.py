"""
Pydantic models for the network world: positions, sensors, scenarios,
candidate sets, RP plans and intent weights.
All models are frozen value objects in canonical SI units.
"""

import math
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config import CandidateMode
from ..utils.exceptions import InvalidArgumentError

SCENARIO_SCHEMA_VERSION = "1"
PLAN_SCHEMA_VERSION = "1"


class Point2D(BaseModel):
    """A planar position in meters."""
    model_config = ConfigDict(frozen=True)

    x: float = Field(..., description="x coordinate (m)")
    y: float = Field(..., description="y coordinate (m)")

    @field_validator("x", "y")
    @classmethod
    def finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("coordinates must be finite")
        return v

    def as_tuple(self) -> tuple:
        return (self.x, self.y)


def points_to_array(points: List[Point2D]) -> np.ndarray:
    """Stack points into an (n, 2) float array."""
    if not points:
        return np.zeros((0, 2))
    return np.array([(p.x, p.y) for p in points], dtype=float)


def array_to_points(xy: np.ndarray) -> List[Point2D]:
    """Convert an (n, 2) array into a list of Point2D."""
    return [Point2D(x=float(x), y=float(y)) for x, y in np.asarray(xy, dtype=float)]


class Area(BaseModel):
    """Axis-aligned deployment rectangle."""
    model_config = ConfigDict(frozen=True)

    x_min: float = Field(default=0.0, description="Left edge (m)")
    y_min: float = Field(default=0.0, description="Bottom edge (m)")
    width: float = Field(..., description="Extent along x (m)")
    height: float = Field(..., description="Extent along y (m)")

    @property
    def x_max(self) -> float:
        return self.x_min + self.width

    @property
    def y_max(self) -> float:
        return self.y_min + self.height

    @property
    def is_degenerate(self) -> bool:
        return not (self.width > 0 and self.height > 0
                    and math.isfinite(self.width) and math.isfinite(self.height))

    def contains(self, xy: np.ndarray) -> np.ndarray:
        """Boolean mask of rows of xy inside the closed rectangle."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        return ((xy[:, 0] >= self.x_min) & (xy[:, 0] <= self.x_max)
                & (xy[:, 1] >= self.y_min) & (xy[:, 1] <= self.y_max))

    def normalize(self, xy: np.ndarray) -> np.ndarray:
        """Affine map of the rectangle onto [-1, 1]^2."""
        xy = np.asarray(xy, dtype=float)
        scale = np.array([self.width, self.height])
        origin = np.array([self.x_min, self.y_min])
        return 2.0 * (xy - origin) / scale - 1.0

    def denormalize(self, uv: np.ndarray) -> np.ndarray:
        """Inverse of normalize."""
        uv = np.asarray(uv, dtype=float)
        scale = np.array([self.width, self.height])
        origin = np.array([self.x_min, self.y_min])
        return (uv + 1.0) * 0.5 * scale + origin


class SensorNode(BaseModel):
    """A static sensor generating data at a constant rate."""
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., description="Sensor index, unique in a scenario")
    position: Point2D = Field(..., description="Sensor position")
    rate_bps: float = Field(..., ge=0, description="Generation rate lambda_i (bits/s)")


class DeploymentLayout(str, Enum):
    """Spatial distribution of generated sensors."""
    UNIFORM = "uniform"
    CLUSTERED = "clustered"


class ScenarioTemplate(BaseModel):
    """Everything a scenario needs except the sensor positions."""
    model_config = ConfigDict(frozen=True)

    area: Area = Field(default_factory=lambda: Area(width=200.0, height=200.0))
    rate_bps: float = Field(default=500.0, ge=0, description="Per-sensor generation rate")
    comm_range_m: float = Field(default=25.0, gt=0, description="Communication range R_c")
    sink: Point2D = Field(default_factory=lambda: Point2D(x=0.0, y=0.0))
    mdc_speed_mps: float = Field(default=2.0, gt=0, description="MDC speed v")
    upload_rate_bps: float = Field(default=2e6, gt=0, description="RP-to-MDC upload rate C")
    buffer_bits: float = Field(default=4e8, ge=0, description="RP buffer capacity B_j")
    closed_tour: bool = Field(default=True, description="Whether the tour returns to its first RP")
    layout: DeploymentLayout = Field(default=DeploymentLayout.UNIFORM)
    n_clusters: int = Field(default=4, ge=1, description="Cluster count (clustered layout)")
    cluster_spread_m: float = Field(default=20.0, gt=0, description="Cluster standard deviation")


class NetworkScenario(BaseModel):
    """The world an experiment runs in."""
    model_config = ConfigDict(frozen=True)

    schema_version: str = Field(default=SCENARIO_SCHEMA_VERSION)
    area: Area
    sensors: List[SensorNode]
    comm_range_m: float = Field(..., gt=0)
    sink: Point2D
    mdc_speed_mps: float = Field(..., gt=0)
    upload_rate_bps: float = Field(..., gt=0)
    upload_rates_bps: Optional[List[float]] = Field(
        default=None, description="Per-RP override of the upload rate"
    )
    buffer_bits: float = Field(..., ge=0)
    closed_tour: bool = True

    @model_validator(mode="after")
    def check_world(self) -> "NetworkScenario":
        if self.area.is_degenerate:
            raise ValueError("scenario area is degenerate")
        ids = [s.id for s in self.sensors]
        if len(set(ids)) != len(ids):
            raise ValueError("sensor ids must be unique")
        if self.sensors and not bool(np.all(self.area.contains(self.positions()))):
            raise ValueError("every sensor must lie inside the area")
        if self.upload_rates_bps is not None and any(c <= 0 for c in self.upload_rates_bps):
            raise ValueError("per-RP upload rates must be > 0")
        return self

    @property
    def n_sensors(self) -> int:
        return len(self.sensors)

    def positions(self) -> np.ndarray:
        """Sensor coordinates, shape (N, 2)."""
        return points_to_array([s.position for s in self.sensors])

    def rates(self) -> np.ndarray:
        """Sensor generation rates, shape (N,)."""
        return np.array([s.rate_bps for s in self.sensors], dtype=float)

    def sensor_ids(self) -> List[int]:
        return [s.id for s in self.sensors]

    def upload_rates(self, m: int) -> np.ndarray:
        """Per-RP upload rates C_j for an M-RP plan."""
        if self.upload_rates_bps is not None:
            if len(self.upload_rates_bps) != m:
                raise InvalidArgumentError(
                    f"scenario lists {len(self.upload_rates_bps)} upload rates for {m} RPs"
                )
            return np.array(self.upload_rates_bps, dtype=float)
        return np.full(m, self.upload_rate_bps)

    def buffer_capacities(self, m: int) -> np.ndarray:
        return np.full(m, self.buffer_bits)

    def total_rate(self) -> float:
        return float(self.rates().sum())


class CandidateSet(BaseModel):
    """Feasible RP locations."""
    model_config = ConfigDict(frozen=True)

    points: List[Point2D] = Field(..., min_length=1)
    source: CandidateMode
    spacing_m: Optional[float] = Field(default=None, description="Grid spacing (grid source only)")

    def as_array(self) -> np.ndarray:
        return points_to_array(self.points)

    def __len__(self) -> int:
        return len(self.points)


class RpPlan(BaseModel):
    """Selected RP locations and the sensor-to-RP association."""
    model_config = ConfigDict(frozen=True)

    schema_version: str = Field(default=PLAN_SCHEMA_VERSION)
    rp_positions: List[Point2D] = Field(..., min_length=1)
    assoc: Dict[int, int] = Field(..., description="sensor id -> RP index (phi)")
    rp_rate_bps: List[float] = Field(..., description="Aggregate rate Lambda_j per RP")
    coverage_flag: Dict[int, bool] = Field(..., description="sensor id -> within R_c of its RP")
    selected_loads_bps: List[float] = Field(
        default_factory=list, description="Offered load W of each greedy pick, in pick order"
    )
    candidate_indices: List[int] = Field(default_factory=list, description="Candidate index of each RP")
    coverage_picks: int = Field(
        default=0, ge=0, description="Leading picks made while uncovered sensors remained"
    )

    @model_validator(mode="after")
    def check_plan(self) -> "RpPlan":
        m = len(self.rp_positions)
        if len(self.rp_rate_bps) != m:
            raise ValueError("rp_rate_bps must have one entry per RP")
        if any(j < 0 or j >= m for j in self.assoc.values()):
            raise ValueError("association refers to a non-existent RP")
        if set(self.assoc) != set(self.coverage_flag):
            raise ValueError("coverage_flag must cover exactly the associated sensors")
        return self

    @property
    def m(self) -> int:
        return len(self.rp_positions)

    def positions(self) -> np.ndarray:
        return points_to_array(self.rp_positions)

    def rates(self) -> np.ndarray:
        return np.array(self.rp_rate_bps, dtype=float)

    def assignment(self, sensor_ids: List[int]) -> np.ndarray:
        """RP index per sensor, in the given sensor order."""
        return np.array([self.assoc[i] for i in sensor_ids], dtype=int)


class IntentWeights(BaseModel):
    """Intent weight vector eta and per-RP importance w_j."""
    model_config = ConfigDict(frozen=True)

    eta_t: float = Field(default=0.0, ge=0)
    eta_e: float = Field(default=0.0, ge=0)
    eta_f: float = Field(default=0.0, ge=0)
    eta_p: float = Field(default=0.0, ge=0)
    rp_importance: List[float] = Field(default_factory=list)

    @field_validator("rp_importance")
    @classmethod
    def non_negative(cls, v: List[float]) -> List[float]:
        if any(w < 0 or not math.isfinite(w) for w in v):
            raise ValueError("rp_importance entries must be finite and >= 0")
        return v

    def bind(self, m: int) -> "IntentWeights":
        """Return weights whose importance vector has exactly m entries (ones by default)."""
        if not self.rp_importance:
            return self.model_copy(update={"rp_importance": [1.0] * m})
        if len(self.rp_importance) != m:
            raise InvalidArgumentError(f"rp_importance has {len(self.rp_importance)} entries for {m} RPs")
        return self

    def importance(self, m: int) -> np.ndarray:
        return np.array(self.bind(m).rp_importance, dtype=float)
