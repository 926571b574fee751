"""
FastAPI application for the MDC planner service.
Runs campaigns in the background and serves their tables and geometry.
"""

from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Request
from fastapi.encoders import jsonable_encoder
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from loguru import logger

from .api import campaigns
from .config import settings
from .core.campaign_service import get_campaign_service
from .models.api_models import ErrorResponse, HealthCheckResponse
from .models.campaign_models import CampaignStatus
from .utils.exceptions import PlannerError, http_status_for


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan management."""
    logger.info(f"Starting {settings.app_name} {settings.app_version}")
    logger.info(f"Results directory: {settings.results_dir}")
    settings.ensure_results_dir()

    yield

    logger.info(f"Shutting down {settings.app_name}")


app = FastAPI(
    title=settings.app_name,
    version=settings.app_version,
    description="""
    Mobile data collector planning service.

    ## Quick Start
    1. Validate a campaign document via `/api/v1/validate`
    2. Submit it with `POST /api/v1/campaigns`
    3. Monitor progress via `/api/v1/campaigns/{job_id}`
    4. Download `/api/v1/campaigns/{job_id}/summary` and `/runs`
    """,
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    """Handle HTTP exceptions with structured response."""
    error_response = ErrorResponse(error=str(exc.detail), error_code=f"HTTP_{exc.status_code}")
    return JSONResponse(status_code=exc.status_code, content=jsonable_encoder(error_response))


@app.exception_handler(PlannerError)
async def planner_error_handler(request: Request, exc: PlannerError):
    logger.error(f"{exc.error_code} in {request.url}: {exc.message}")
    error_response = ErrorResponse(error=exc.message, error_code=exc.error_code, details=exc.details or None)
    return JSONResponse(status_code=http_status_for(exc), content=jsonable_encoder(error_response))


@app.exception_handler(ValueError)
async def value_error_handler(request: Request, exc: ValueError):
    """Handle value errors."""
    logger.error(f"ValueError in {request.url}: {exc}")
    error_response = ErrorResponse(error=str(exc), error_code="VALIDATION_ERROR")
    return JSONResponse(status_code=400, content=jsonable_encoder(error_response))


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    """Handle all other exceptions."""
    logger.exception(f"Unhandled exception in {request.url}: {exc}")
    error_response = ErrorResponse(
        error="Internal server error" if not settings.debug else str(exc),
        error_code="INTERNAL_ERROR",
    )
    return JSONResponse(status_code=500, content=jsonable_encoder(error_response))


@app.get("/health", response_model=HealthCheckResponse)
async def health_check():
    """Health check endpoint."""
    service = get_campaign_service()
    active = [
        j for j in service.get_all_jobs()
        if j.status in (CampaignStatus.PENDING, CampaignStatus.RUNNING)
    ]
    return HealthCheckResponse(
        version=settings.app_version,
        storage_status="ok" if settings.results_dir.exists() else "missing",
        active_jobs=len(active),
        total_jobs=len(service.get_all_jobs()),
    )


@app.get("/api", tags=["API Info"])
async def api_root():
    """API root endpoint with overview and links."""
    return {
        "name": settings.app_name,
        "version": settings.app_version,
        "docs_url": "/docs",
        "endpoints": {
            "campaigns": "/api/v1/campaigns",
            "validate": "/api/v1/validate",
        },
        "health_check": "/health",
    }


app.include_router(campaigns.router, prefix="/api/v1", tags=["Campaigns"])


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "mdcplanner.main:app",
        host=settings.host,
        port=settings.port,
        log_level=settings.log_level.lower(),
    )
