from datetime import datetime, timedelta

import pytest
from pydantic import ValidationError

from mdcplanner.models.campaign_models import (
    CampaignConfig,
    CampaignJob,
    CampaignJobResponse,
    CampaignStatus,
    MRule,
    RpCountRule,
    ScenarioSection,
)
from mdcplanner.models.network_models import DeploymentLayout


class TestScenarioSection:
    def test_unit_alternates(self):
        section = ScenarioSection.model_validate({"rate_kbps": 0.5, "upload_rate_mbps": 2, "buffer_mb": 50})
        assert section.rate_bps == pytest.approx(500.0)
        assert section.upload_rate_bps == pytest.approx(2e6)
        assert section.buffer_bits == pytest.approx(4e8)

    def test_both_forms_rejected(self):
        with pytest.raises(ValidationError):
            ScenarioSection.model_validate({"rate_bps": 500.0, "rate_kbps": 0.5})

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            ScenarioSection.model_validate({"rate_mbps": 1.0})

    def test_to_template(self):
        template = ScenarioSection(layout=DeploymentLayout.CLUSTERED, sink_x_m=10.0).to_template()
        assert template.layout == DeploymentLayout.CLUSTERED
        assert template.sink.x == 10.0
        assert template.area.width == 200.0


class TestRpCountRule:
    def test_fixed(self):
        assert RpCountRule().m_for(500) == 15

    @pytest.mark.parametrize("n, expected", [(50, 15), (100, 15), (110, 17), (130, 20), (200, 30)])
    def test_proportional(self, n, expected):
        assert RpCountRule(rule=MRule.PROPORTIONAL).m_for(n) == expected

    def test_rounds_half_up(self):
        rule = RpCountRule(rule=MRule.PROPORTIONAL, minimum=1, fraction=0.5)
        assert rule.m_for(5) == 3
        assert rule.m_for(7) == 4


class TestCampaignConfig:
    def test_defaults(self):
        config = CampaignConfig()
        assert config.total_cells == 30
        assert config.planners[0].value == "diffusion"

    def test_extra_keys_forbidden(self):
        with pytest.raises(ValidationError):
            CampaignConfig.model_validate({"sweeps": [50]})

    def test_sweep_must_be_positive(self):
        with pytest.raises(ValidationError):
            CampaignConfig(sweep=[50, 0])

    def test_planners_unique_and_known(self):
        with pytest.raises(ValidationError):
            CampaignConfig(planners=["nn", "nn"])
        with pytest.raises(ValidationError):
            CampaignConfig(planners=["annealing"])

    def test_total_cells(self):
        assert CampaignConfig(sweep=[50, 100, 150], seeds=4).total_cells == 12

    def test_frozen(self):
        with pytest.raises(ValidationError):
            CampaignConfig().seeds = 3


class TestCampaignJob:
    def test_progress_created(self):
        job = CampaignJob(config=CampaignConfig(sweep=[50, 100], seeds=3))
        assert job.progress.total_cells == 6
        assert job.progress.get_progress_percentage() == 0.0

    def test_status_timestamps(self):
        job = CampaignJob(config=CampaignConfig())
        job.update_status(CampaignStatus.RUNNING)
        assert job.started_at is not None
        job.started_at = datetime.utcnow() - timedelta(seconds=5)
        job.update_status(CampaignStatus.FAILED, error_message="boom")
        assert job.completed_at is not None
        assert job.error_message == "boom"
        assert job.get_duration() >= 5

    def test_response(self):
        job = CampaignJob(config=CampaignConfig(name="x"))
        response = CampaignJobResponse.from_campaign_job(job)
        assert response.name == "x"
        assert response.status == CampaignStatus.PENDING
        assert response.summary_url is None
        job.update_status(CampaignStatus.COMPLETED)
        assert CampaignJobResponse.from_campaign_job(job).summary_url.endswith("/summary")
