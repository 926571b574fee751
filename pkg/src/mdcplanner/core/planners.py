"""
Shared planner interface.

Every tour constructor returns a PlannerResult so the campaign pushes all of
them through the same schedule and metric pipeline.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..config import DiffusionConfig
from ..models.campaign_models import PlannerName
from ..models.network_models import IntentWeights, NetworkScenario, RpPlan
from ..models.planning_models import WaypointTrajectory
from ..utils.exceptions import ConfigurationError
from .baseline_planners import greedy_insertion_tour, nearest_neighbor_tour, random_tour
from .diffusion_planner import plan_tour, two_opt


@dataclass(frozen=True)
class PlannerResult:
    order: List[int]
    trajectory: Optional[WaypointTrajectory] = None


class TourPlanner(ABC):
    """A tour constructor over a fixed RP plan."""

    name: PlannerName

    @abstractmethod
    def build(self, seed: int, scenario: NetworkScenario, plan: RpPlan,
              weights: IntentWeights) -> PlannerResult:
        """Return a visiting order over plan's RPs."""


class DiffusionPlanner(TourPlanner):
    name = PlannerName.DIFFUSION

    def __init__(self, config: DiffusionConfig):
        self.config = config

    def build(self, seed, scenario, plan, weights):
        order, trajectory = plan_tour(seed, scenario, plan, weights, self.config)
        return PlannerResult(order=order, trajectory=trajectory)


class NearestNeighborPlanner(TourPlanner):
    def __init__(self, refine: bool = False, max_passes: int = 64):
        self.refine = refine
        self.max_passes = max_passes
        self.name = PlannerName.NN_2OPT if refine else PlannerName.NN

    def build(self, seed, scenario, plan, weights):
        order = nearest_neighbor_tour(plan.positions(), start=scenario.sink)
        if self.refine:
            order = two_opt(order, plan.positions(), scenario.closed_tour, self.max_passes)
        return PlannerResult(order=order)


class GreedyInsertionPlanner(TourPlanner):
    name = PlannerName.GREEDY_INSERTION

    def build(self, seed, scenario, plan, weights):
        return PlannerResult(order=greedy_insertion_tour(plan.positions(), scenario.closed_tour))


class RandomPlanner(TourPlanner):
    name = PlannerName.RANDOM

    def build(self, seed, scenario, plan, weights):
        return PlannerResult(order=random_tour(seed, plan.m))


def get_planner(name, diffusion: Optional[DiffusionConfig] = None) -> TourPlanner:
    """
    Instantiate a planner by name.

    Raises:
        ConfigurationError: If the name is not a known planner
    """
    diffusion = diffusion or DiffusionConfig()
    try:
        key = PlannerName(name)
    except ValueError:
        raise ConfigurationError(f"Unknown planner '{name}'",
                                 details={"known": [p.value for p in PlannerName]})
    if key == PlannerName.DIFFUSION:
        return DiffusionPlanner(diffusion)
    if key == PlannerName.NN:
        return NearestNeighborPlanner(refine=False)
    if key == PlannerName.NN_2OPT:
        return NearestNeighborPlanner(refine=True, max_passes=diffusion.max_passes)
    if key == PlannerName.GREEDY_INSERTION:
        return GreedyInsertionPlanner()
    return RandomPlanner()


def build_planners(names: Sequence, diffusion: Optional[DiffusionConfig] = None) -> Dict[PlannerName, TourPlanner]:
    return {PlannerName(n): get_planner(n, diffusion) for n in names}
