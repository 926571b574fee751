import numpy as np
import pytest

from mdcplanner.config import IntentConfig
from mdcplanner.core.metrics import full_report
from mdcplanner.core.service_model import build_schedule
from mdcplanner.core.tour_model import (
    bind_intent,
    importance_score,
    objective,
    tour_length,
    travel_time,
)
from mdcplanner.models.metric_models import MetricReport
from mdcplanner.models.network_models import IntentWeights, Point2D
from mdcplanner.models.planning_models import TourSchedule
from mdcplanner.utils.exceptions import InvalidArgumentError

TRIANGLE = np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]])


def _report(**overrides) -> MetricReport:
    values = dict(
        tour_time_s=100.0, tour_length_m=200.0, travel_time_s=100.0, total_dwell_s=0.0,
        freshness_s=100.0, collection_ratio=1.0, pdr=1.0, energy_efficiency=0.5,
        throughput_bps=10.0, fairness=1.0, total_energy_j=1.0, generated_bits=1.0,
        collected_bits=1.0, delivered_bits=1.0, t_ref_s=100.0, e_ref_j=1.0, delta_ref_s=100.0,
    )
    values.update(overrides)
    return MetricReport(**values)


def _schedule(m: int = 3) -> TourSchedule:
    return TourSchedule(order=list(range(m)), dwell_s=[0.0] * m, travel_time_s=100.0,
                        tour_time_s=100.0, tour_length_m=200.0)


class TestTourLength:
    def test_single_rp_open_is_zero(self):
        assert tour_length([0], [[5.0, 5.0]], closed=False) == 0.0

    def test_triangle_closed(self):
        assert tour_length([0, 1, 2], TRIANGLE, closed=True) == pytest.approx(12.0)

    def test_triangle_open_drops_return_leg(self):
        assert tour_length([0, 1, 2], TRIANGLE, closed=False) == pytest.approx(7.0)

    def test_accepts_points(self):
        points = [Point2D(x=x, y=y) for x, y in TRIANGLE]
        assert tour_length([2, 1, 0], points) == pytest.approx(12.0)

    def test_rejects_non_permutation(self):
        with pytest.raises(InvalidArgumentError):
            tour_length([0, 0, 1], TRIANGLE)

    def test_rejects_empty_rp_set(self):
        with pytest.raises(InvalidArgumentError):
            tour_length([], np.zeros((0, 2)))

    def test_rotation_invariance_when_closed(self, rng):
        for _ in range(100):
            m = int(rng.integers(2, 20))
            xy = rng.uniform(0, 200, size=(m, 2))
            order = rng.permutation(m).tolist()
            shift = int(rng.integers(0, m))
            rotated = order[shift:] + order[:shift]
            assert tour_length(rotated, xy) == pytest.approx(tour_length(order, xy), rel=1e-9)

    def test_reversal_invariance(self, rng):
        xy = rng.uniform(0, 200, size=(12, 2))
        order = rng.permutation(12).tolist()
        assert tour_length(order[::-1], xy) == pytest.approx(tour_length(order, xy), rel=1e-12)
        assert tour_length(order[::-1], xy, closed=False) == pytest.approx(
            tour_length(order, xy, closed=False), rel=1e-12)


class TestTravelTime:
    def test_direct_division(self):
        assert travel_time([0, 1, 2], TRIANGLE, speed_mps=2.0) == pytest.approx(6.0)

    def test_nine_hundred_meters_at_two_mps(self):
        xy = np.array([[0.0, 0.0], [450.0, 0.0]])
        assert travel_time([0, 1], xy, speed_mps=2.0) == pytest.approx(450.0)

    def test_zero_length(self):
        assert travel_time([0], [[1.0, 1.0]], speed_mps=3.0) == 0.0

    @pytest.mark.parametrize("speed", [0.0, -1.0, float("nan")])
    def test_invalid_speed(self, speed):
        with pytest.raises(InvalidArgumentError):
            travel_time([0, 1, 2], TRIANGLE, speed_mps=speed)


class TestImportanceScore:
    def test_all_zero_weights_score_one(self):
        assert importance_score([2, 0, 1], [0.0, 0.0, 0.0]) == 1.0

    def test_heavy_rp_first_scores_higher(self):
        w = [5.0, 1.0, 1.0]
        assert importance_score([0, 1, 2], w) > importance_score([1, 2, 0], w)

    def test_single_rp(self):
        assert importance_score([0], [2.0]) == pytest.approx(1.0)


class TestObjective:
    def test_all_weights_zero(self):
        assert objective(_schedule(), IntentWeights(), _report()) == 0.0

    def test_normalization_identity(self):
        weights = IntentWeights(eta_t=1.0)
        assert objective(_schedule(), weights, _report(t_ref_s=100.0)) == pytest.approx(1.0)

    def test_each_term_scales(self):
        report = _report(tour_time_s=200.0, travel_time_s=200.0, total_energy_j=3.0,
                         freshness_s=50.0)
        schedule = TourSchedule(order=[0, 1, 2], dwell_s=[0.0] * 3, travel_time_s=200.0,
                                tour_time_s=200.0, tour_length_m=400.0)
        weights = IntentWeights(eta_t=0.5, eta_e=1.0, eta_f=2.0, eta_p=0.0)
        assert objective(schedule, weights, report) == pytest.approx(0.5 * 2.0 + 3.0 + 2.0 * 0.5)

    def test_non_positive_reference_rejected(self):
        with pytest.raises(InvalidArgumentError):
            objective(_schedule(), IntentWeights(eta_t=1.0), _report(t_ref_s=0.0))

    def test_deterministic_on_nominal_configuration(self, nominal_scenario, nominal_plan):
        order = list(range(nominal_plan.m))
        weights = bind_intent(IntentConfig(), nominal_plan)
        values = []
        for _ in range(2):
            schedule, solution = build_schedule(order, nominal_scenario, nominal_plan)
            report = full_report(nominal_scenario, nominal_plan, schedule, solution)
            values.append(objective(schedule, weights, report))
        assert values[0] == values[1]
        assert np.isfinite(values[0]) and values[0] > 0


class TestBindIntent:
    def test_uniform(self, nominal_plan):
        weights = bind_intent(IntentConfig(rp_importance="uniform"), nominal_plan)
        assert weights.rp_importance == [1.0] * nominal_plan.m

    def test_load_has_unit_mean(self, nominal_plan):
        weights = bind_intent(IntentConfig(rp_importance="load"), nominal_plan)
        assert np.mean(weights.rp_importance) == pytest.approx(1.0)
        heaviest = int(np.argmax(nominal_plan.rp_rate_bps))
        assert weights.rp_importance[heaviest] == max(weights.rp_importance)

    def test_explicit_list_length_checked(self, nominal_plan):
        with pytest.raises(InvalidArgumentError):
            bind_intent(IntentConfig(rp_importance=[1.0, 2.0]), nominal_plan)
