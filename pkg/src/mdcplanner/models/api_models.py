"""
API request and response models for the MDC planner service.
"""

from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from .campaign_models import CampaignJobResponse


class ErrorResponse(BaseModel):
    """Generic error response model."""

    success: bool = Field(default=False, description="Success status")
    error: str = Field(..., description="Error message")
    error_code: Optional[str] = Field(None, description="Error code")
    details: Optional[Dict[str, Any]] = Field(None, description="Error details")
    timestamp: datetime = Field(default_factory=datetime.utcnow, description="Response timestamp")


class CampaignListResponse(BaseModel):
    """Response model for campaign listing."""

    jobs: List[CampaignJobResponse] = Field(..., description="List of campaign jobs")
    total_count: int = Field(..., description="Total number of jobs")
    page: int = Field(default=1, description="Current page number")
    page_size: int = Field(default=10, description="Items per page")
    has_next: bool = Field(default=False, description="Whether there are more pages")


class GeometryLayersResponse(BaseModel):
    """Layers available in one run's geometry dump."""

    job_id: str
    run_id: str
    layers: List[str] = Field(..., description="Layer names, each downloadable as CSV")


class ValidationResponse(BaseModel):
    """Result of validating a campaign document without running it."""

    valid: bool = Field(..., description="Whether the document is a valid campaign")
    name: Optional[str] = Field(None, description="Campaign name")
    total_cells: int = Field(default=0, description="(N, seed) cells the campaign would evaluate")
    total_rows: int = Field(default=0, description="Per-run rows the campaign would write")
    config_hash: Optional[str] = Field(None, description="Stable hash of the normalized document")
    errors: List[Dict[str, Any]] = Field(default_factory=list, description="Validation errors")


class HealthCheckResponse(BaseModel):
    """Health check response model."""

    status: str = Field(default="healthy", description="Service status")
    version: str = Field(..., description="Application version")
    timestamp: datetime = Field(default_factory=datetime.utcnow, description="Check timestamp")
    storage_status: str = Field(default="ok", description="Results directory status")
    active_jobs: int = Field(default=0, description="Campaigns pending or running")
    total_jobs: int = Field(default=0, description="Campaigns submitted since start")
