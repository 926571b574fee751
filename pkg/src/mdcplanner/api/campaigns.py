"""
Campaign API endpoints for the MDC planner.
Handles campaign submission, status monitoring and result downloads.
"""

from typing import Any, Dict, Optional

from fastapi import APIRouter, BackgroundTasks, Body, HTTPException, Query
from fastapi.responses import FileResponse
from loguru import logger

from ..core.campaign_service import check_campaign, get_campaign_service
from ..models.api_models import CampaignListResponse, GeometryLayersResponse, ValidationResponse
from ..models.campaign_models import CampaignConfig, CampaignJobResponse, CampaignStatus
from ..utils.exceptions import PlannerError, http_status_for

router = APIRouter()
log = logger.bind(component="api")


def _raise_http(error: PlannerError) -> None:
    raise HTTPException(status_code=http_status_for(error), detail=error.message)


@router.post("/campaigns", response_model=CampaignJobResponse, status_code=202)
async def create_campaign(config: CampaignConfig, background_tasks: BackgroundTasks):
    """
    Submit a campaign; it runs in the background.

    Args:
        config: Campaign document
        background_tasks: FastAPI background tasks

    Returns:
        CampaignJobResponse in pending status
    """
    service = get_campaign_service()
    job = service.create_job(config)
    background_tasks.add_task(service.run_job, job.job_id)
    return CampaignJobResponse.from_campaign_job(job)


@router.post("/validate", response_model=ValidationResponse)
async def validate_campaign(document: Dict[str, Any] = Body(...)):
    """Validate a campaign document without running it."""
    return check_campaign(document)


@router.get("/campaigns", response_model=CampaignListResponse)
async def list_campaigns(
    status: Optional[CampaignStatus] = Query(None, description="Filter by status"),
    page: int = Query(1, ge=1),
    page_size: int = Query(10, ge=1, le=100),
):
    """List submitted campaigns, newest first."""
    service = get_campaign_service()
    jobs = service.get_jobs_by_status(status) if status else service.get_all_jobs()
    jobs.sort(key=lambda j: j.created_at, reverse=True)

    offset = (page - 1) * page_size
    window = jobs[offset:offset + page_size]
    return CampaignListResponse(
        jobs=[CampaignJobResponse.from_campaign_job(j) for j in window],
        total_count=len(jobs),
        page=page,
        page_size=page_size,
        has_next=offset + page_size < len(jobs),
    )


@router.get("/campaigns/{job_id}", response_model=CampaignJobResponse)
async def get_campaign(job_id: str):
    try:
        job = get_campaign_service().get_job(job_id)
    except PlannerError as e:
        _raise_http(e)
    return CampaignJobResponse.from_campaign_job(job)


@router.get("/campaigns/{job_id}/summary")
async def download_summary(job_id: str):
    """Seed-averaged summary CSV of a completed campaign."""
    try:
        store = get_campaign_service().get_store(job_id)
    except PlannerError as e:
        _raise_http(e)
    if not store.summary_path.exists():
        raise HTTPException(status_code=404, detail=f"Campaign {job_id} has no summary table")
    return FileResponse(path=str(store.summary_path), filename=f"{job_id}_summary.csv",
                        media_type="text/csv", headers={"X-Job-ID": job_id})


@router.get("/campaigns/{job_id}/runs")
async def download_runs(job_id: str):
    """Per-run CSV of a completed campaign."""
    try:
        store = get_campaign_service().get_store(job_id)
    except PlannerError as e:
        _raise_http(e)
    if not store.runs_path.exists():
        raise HTTPException(status_code=404, detail=f"Campaign {job_id} has no runs table")
    return FileResponse(path=str(store.runs_path), filename=f"{job_id}_runs.csv",
                        media_type="text/csv", headers={"X-Job-ID": job_id})


@router.get("/campaigns/{job_id}/geometry/{run_id}", response_model=GeometryLayersResponse)
async def list_geometry(job_id: str, run_id: str):
    """Layers of one run's geometry dump."""
    try:
        layers = get_campaign_service().get_store(job_id).emit_geometry(run_id)
    except PlannerError as e:
        _raise_http(e)
    return GeometryLayersResponse(job_id=job_id, run_id=run_id, layers=sorted(layers))


@router.get("/campaigns/{job_id}/geometry/{run_id}/{layer}")
async def download_geometry_layer(job_id: str, run_id: str, layer: str):
    try:
        path = get_campaign_service().get_store(job_id).layer_path(run_id, layer)
    except PlannerError as e:
        _raise_http(e)
    log.info(f"Serving {layer} of {run_id} for campaign {job_id}")
    return FileResponse(path=str(path), filename=f"{run_id}_{layer}.csv", media_type="text/csv")
