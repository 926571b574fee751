"""
Pydantic models for experiment campaigns: the campaign document, the
background job wrapping a campaign run, and its progress tracking.
"""

import math
import uuid
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config import (
    CandidateConfig,
    DiffusionConfig,
    IntentConfig,
    MetricConfig,
    ServiceConfig,
    settings,
)
from ..utils.helpers import kbps_to_bps, mbps_to_bps, megabytes_to_bits
from .network_models import Area, DeploymentLayout, Point2D, ScenarioTemplate


class PlannerName(str, Enum):
    """Tour constructors a campaign can compare."""
    DIFFUSION = "diffusion"
    NN = "nn"
    NN_2OPT = "nn+2opt"
    GREEDY_INSERTION = "greedy_insertion"
    RANDOM = "random"


class MRule(str, Enum):
    FIXED = "fixed"
    PROPORTIONAL = "proportional"


class RpCountRule(BaseModel):
    """How many RPs to place for a given sensor count."""
    model_config = ConfigDict(frozen=True)

    rule: MRule = Field(default=MRule.FIXED)
    value: int = Field(default=15, ge=1, description="M for the fixed rule")
    minimum: int = Field(default=15, ge=1, description="Lower bound for the proportional rule")
    fraction: float = Field(default=0.15, gt=0, description="M / N for the proportional rule")

    def m_for(self, n_sensors: int) -> int:
        if self.rule == MRule.FIXED:
            return self.value
        # round half up, independent of Python's banker's rounding
        return max(self.minimum, int(math.floor(self.fraction * n_sensors + 0.5)))


class ScenarioSection(BaseModel):
    """
    Scenario template as written in a campaign document.

    Keys carry their unit. `rate_kbps`, `upload_rate_mbps` and `buffer_mb`
    are accepted as alternates and converted to bits on ingest.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    area_width_m: float = Field(default=200.0, gt=0)
    area_height_m: float = Field(default=200.0, gt=0)
    area_x_min_m: float = Field(default=0.0)
    area_y_min_m: float = Field(default=0.0)
    rate_bps: float = Field(default=500.0, ge=0)
    comm_range_m: float = Field(default=25.0, gt=0)
    sink_x_m: float = Field(default=0.0)
    sink_y_m: float = Field(default=0.0)
    speed_mps: float = Field(default=2.0, gt=0)
    upload_rate_bps: float = Field(default=2e6, gt=0)
    buffer_bits: float = Field(default=4e8, ge=0)
    closed_tour: bool = Field(default=True)
    layout: DeploymentLayout = Field(default=DeploymentLayout.UNIFORM)
    n_clusters: int = Field(default=4, ge=1)
    cluster_spread_m: float = Field(default=20.0, gt=0)

    @model_validator(mode="before")
    @classmethod
    def convert_units(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        conversions = {
            "rate_kbps": ("rate_bps", kbps_to_bps),
            "upload_rate_mbps": ("upload_rate_bps", mbps_to_bps),
            "buffer_mb": ("buffer_bits", megabytes_to_bits),
        }
        for alt_key, (key, convert) in conversions.items():
            if alt_key in data:
                if key in data:
                    raise ValueError(f"give either '{key}' or '{alt_key}', not both")
                data[key] = convert(float(data.pop(alt_key)))
        return data

    def to_template(self) -> ScenarioTemplate:
        return ScenarioTemplate(
            area=Area(x_min=self.area_x_min_m, y_min=self.area_y_min_m,
                      width=self.area_width_m, height=self.area_height_m),
            rate_bps=self.rate_bps,
            comm_range_m=self.comm_range_m,
            sink=Point2D(x=self.sink_x_m, y=self.sink_y_m),
            mdc_speed_mps=self.speed_mps,
            upload_rate_bps=self.upload_rate_bps,
            buffer_bits=self.buffer_bits,
            closed_tour=self.closed_tour,
            layout=self.layout,
            n_clusters=self.n_clusters,
            cluster_spread_m=self.cluster_spread_m,
        )


class OutputSection(BaseModel):
    """Where and what a campaign writes."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    out_dir: Optional[Path] = Field(default=None, description="Output directory (defaults to settings.results_dir/<name>)")
    dump_geometry: bool = Field(default=False)
    snapshot_every: Optional[int] = Field(default=None, ge=1, description="Diffusion snapshot interval")


class CampaignConfig(BaseModel):
    """A complete campaign document."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(default="campaign", min_length=1)
    seed_set: str = Field(default="WSN-1", description="Label of the deployment seed set")
    base_seed: int = Field(default=0, ge=0)
    scenario: ScenarioSection = Field(default_factory=ScenarioSection)
    sweep: List[int] = Field(default_factory=lambda: [100], min_length=1, description="Sensor counts N")
    m_rps: RpCountRule = Field(default_factory=RpCountRule)
    seeds: int = Field(default_factory=lambda: settings.default_seeds, ge=1)
    planners: List[PlannerName] = Field(
        default_factory=lambda: [PlannerName.DIFFUSION, PlannerName.NN_2OPT, PlannerName.RANDOM],
        min_length=1,
    )
    candidates: CandidateConfig = Field(default_factory=CandidateConfig)
    diffusion: DiffusionConfig = Field(default_factory=DiffusionConfig)
    service: ServiceConfig = Field(default_factory=ServiceConfig)
    metrics: MetricConfig = Field(default_factory=MetricConfig)
    intent: IntentConfig = Field(default_factory=IntentConfig)
    output: OutputSection = Field(default_factory=OutputSection)

    @field_validator("sweep")
    @classmethod
    def positive_counts(cls, v: List[int]) -> List[int]:
        if any(n < 1 for n in v):
            raise ValueError("every sweep value must be >= 1")
        return v

    @field_validator("planners")
    @classmethod
    def unique_planners(cls, v: List[PlannerName]) -> List[PlannerName]:
        if len(set(v)) != len(v):
            raise ValueError("planners must not repeat")
        return v

    @property
    def total_cells(self) -> int:
        return len(self.sweep) * self.seeds


class CampaignStatus(str, Enum):
    """Campaign job status enumeration."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class CampaignProgress(BaseModel):
    """Progress of a running campaign, counted in (N, seed) cells."""

    job_id: str = Field(..., description="Campaign job ID")
    total_cells: int = Field(default=0, description="Cells to evaluate")
    completed_cells: int = Field(default=0, description="Cells evaluated so far")
    infeasible_rows: int = Field(default=0, description="Rows whose service fixed point diverged")

    def get_progress_percentage(self) -> float:
        if self.total_cells == 0:
            return 0.0
        return (self.completed_cells / self.total_cells) * 100


class CampaignJob(BaseModel):
    """A campaign executed in the background by the HTTP service."""

    job_id: str = Field(default_factory=lambda: uuid.uuid4().hex[:12], description="Unique job ID")
    config: CampaignConfig
    status: CampaignStatus = Field(default=CampaignStatus.PENDING)
    progress: Optional[CampaignProgress] = Field(default=None)

    created_at: datetime = Field(default_factory=datetime.utcnow)
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None

    output_dir: Optional[str] = Field(default=None, description="Directory holding the CSVs")
    run_ids: List[str] = Field(default_factory=list)
    error_message: Optional[str] = None

    @model_validator(mode="after")
    def create_progress(self) -> "CampaignJob":
        if self.progress is None:
            self.progress = CampaignProgress(job_id=self.job_id, total_cells=self.config.total_cells)
        return self

    def update_status(self, status: CampaignStatus, error_message: Optional[str] = None) -> None:
        """Update job status with timestamp."""
        self.status = status
        if status == CampaignStatus.RUNNING and not self.started_at:
            self.started_at = datetime.utcnow()
        elif status in (CampaignStatus.COMPLETED, CampaignStatus.FAILED):
            self.completed_at = datetime.utcnow()
        if error_message:
            self.error_message = error_message

    def get_duration(self) -> Optional[int]:
        if not self.started_at:
            return None
        end_time = self.completed_at or datetime.utcnow()
        return int((end_time - self.started_at).total_seconds())


class CampaignJobResponse(BaseModel):
    """API response model for campaign jobs."""

    job_id: str
    name: str
    status: CampaignStatus
    progress_percentage: float
    total_cells: int
    completed_cells: int
    infeasible_rows: int
    created_at: datetime
    duration_seconds: Optional[int] = None
    summary_url: Optional[str] = None
    run_ids: List[str] = Field(default_factory=list)
    error_message: Optional[str] = None

    @classmethod
    def from_campaign_job(cls, job: CampaignJob) -> "CampaignJobResponse":
        progress = job.progress or CampaignProgress(job_id=job.job_id)
        summary_url = (
            f"/api/v1/campaigns/{job.job_id}/summary"
            if job.status == CampaignStatus.COMPLETED else None
        )
        return cls(
            job_id=job.job_id,
            name=job.config.name,
            status=job.status,
            progress_percentage=progress.get_progress_percentage(),
            total_cells=progress.total_cells,
            completed_cells=progress.completed_cells,
            infeasible_rows=progress.infeasible_rows,
            created_at=job.created_at,
            duration_seconds=job.get_duration(),
            summary_url=summary_url,
            run_ids=job.run_ids,
            error_message=job.error_message,
        )


class CampaignResult(BaseModel):
    """What a finished campaign produced."""

    name: str
    output_dir: str
    runs_csv: str
    summary_csv: str
    manifest_json: str
    n_rows: int
    n_summary_rows: int
    infeasible_rows: int
    run_ids: List[str] = Field(default_factory=list)
    geometry: Dict[str, str] = Field(default_factory=dict, description="run id -> geometry directory")
