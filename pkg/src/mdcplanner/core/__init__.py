"""
Core planning package for the MDC planner.
Deployment, RP placement, tour construction, service model, metrics and
campaign execution.
"""

from .campaign_service import CampaignService, get_campaign_service, run_campaign
from .planners import TourPlanner, build_planners, get_planner
from .result_store import ResultStore

__all__ = [
    "CampaignService",
    "get_campaign_service",
    "run_campaign",
    "TourPlanner",
    "build_planners",
    "get_planner",
    "ResultStore",
]
