"""Shared fixtures for the planner test suite."""

import numpy as np
import pytest

from mdcplanner.config import CandidateConfig
from mdcplanner.core.deployment import build_candidates, generate_scenario
from mdcplanner.core.rp_placement import select_rps
from mdcplanner.models.campaign_models import CampaignConfig
from mdcplanner.models.network_models import (
    Area,
    NetworkScenario,
    Point2D,
    ScenarioTemplate,
    SensorNode,
)
from mdcplanner.utils.helpers import setup_logging


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    setup_logging("WARNING")


@pytest.fixture
def nominal_template() -> ScenarioTemplate:
    """200 x 200 m, 500 b/s per sensor, R_c = 25 m, v = 2 m/s, C = 2 Mb/s, B = 50 MB."""
    return ScenarioTemplate()


@pytest.fixture
def nominal_scenario(nominal_template) -> NetworkScenario:
    return generate_scenario(42, 100, nominal_template)


@pytest.fixture
def nominal_plan(nominal_scenario):
    candidates = build_candidates(nominal_scenario, CandidateConfig())
    return select_rps(nominal_scenario, candidates, 15)


def make_scenario(points, rate_bps=500.0, comm_range_m=25.0, width=200.0, height=200.0,
                  buffer_bits=4e8, upload_rate_bps=2e6, closed_tour=True) -> NetworkScenario:
    """Scenario with sensors at explicit coordinates."""
    sensors = [
        SensorNode(id=i, position=Point2D(x=float(x), y=float(y)), rate_bps=rate_bps)
        for i, (x, y) in enumerate(points)
    ]
    return NetworkScenario(
        area=Area(width=width, height=height),
        sensors=sensors,
        comm_range_m=comm_range_m,
        sink=Point2D(x=0.0, y=0.0),
        mdc_speed_mps=2.0,
        upload_rate_bps=upload_rate_bps,
        buffer_bits=buffer_bits,
        closed_tour=closed_tour,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def smoke_config(tmp_path) -> CampaignConfig:
    """Two cells, three planners, small diffusion; runs in well under a second per cell."""
    return CampaignConfig.model_validate({
        "name": "smoke",
        "sweep": [40],
        "seeds": 2,
        "planners": ["diffusion", "nn+2opt", "random"],
        "m_rps": {"rule": "fixed", "value": 8},
        "diffusion": {"waypoints": 30, "k_steps": 10},
        "output": {"out_dir": str(tmp_path / "smoke")},
    })


@pytest.fixture
def scenario_factory():
    return make_scenario
