"""
Models package for the MDC planner.
Contains Pydantic models for the network world, planning state, metrics,
campaigns and API requests/responses.
"""

from .network_models import (
    Area,
    CandidateSet,
    DeploymentLayout,
    IntentWeights,
    NetworkScenario,
    Point2D,
    RpPlan,
    ScenarioTemplate,
    SensorNode,
)
from .planning_models import (
    BufferState,
    DenoiserSpec,
    NoiseSchedule,
    ServiceSolution,
    TourSchedule,
    WaypointTrajectory,
)
from .metric_models import METRIC_COLUMNS, METRIC_COLUMNS_VERSION, MetricReport
from .campaign_models import (
    CampaignConfig,
    CampaignJob,
    CampaignJobResponse,
    CampaignProgress,
    CampaignResult,
    CampaignStatus,
    PlannerName,
)

__all__ = [
    # Network models
    "Area",
    "CandidateSet",
    "DeploymentLayout",
    "IntentWeights",
    "NetworkScenario",
    "Point2D",
    "RpPlan",
    "ScenarioTemplate",
    "SensorNode",

    # Planning models
    "BufferState",
    "DenoiserSpec",
    "NoiseSchedule",
    "ServiceSolution",
    "TourSchedule",
    "WaypointTrajectory",

    # Metric models
    "METRIC_COLUMNS",
    "METRIC_COLUMNS_VERSION",
    "MetricReport",

    # Campaign models
    "CampaignConfig",
    "CampaignJob",
    "CampaignJobResponse",
    "CampaignProgress",
    "CampaignResult",
    "CampaignStatus",
    "PlannerName",
]
